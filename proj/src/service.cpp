#include "proxilab/service.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

namespace proxilab::service {

const char* to_string(RejectCode code) {
  switch (code) {
    case RejectCode::FloodWait:
      return "FLOOD_WAIT";
    case RejectCode::SpeedBan:
      return "SPEED_BAN";
    case RejectCode::BadRequest:
      return "BAD_REQUEST";
  }
  return "BAD_REQUEST";
}

Admission admit_query(AccountState& st, const AdmissionPolicy& policy,
                      const geo::GeoPoint& pos, double ts) {
  if (!std::isfinite(ts)) {
    return {Rejection{RejectCode::BadRequest, 0.0, "timestamp is not finite"}};
  }
  if (st.last_ts && ts < *st.last_ts) {
    return {Rejection{RejectCode::BadRequest, 0.0, "non-monotonic timestamp"}};
  }
  if (st.ban_until && ts < *st.ban_until) {
    return {Rejection{st.ban_reason, *st.ban_until - ts, "account banned"}};
  }

  const auto day = static_cast<std::int64_t>(std::floor(ts / kSecondsPerDay));
  if (day != st.day_epoch) {
    st.day_epoch = day;
    st.queries_today = 0;
  }
  if (st.queries_today >= policy.daily_quota) {
    st.ban_until = ts + policy.flood_ban_s;
    st.ban_reason = RejectCode::FloodWait;
    return {Rejection{RejectCode::FloodWait, policy.flood_ban_s, "daily quota exceeded"}};
  }

  if (st.last_pos && st.last_ts) {
    const double d = geo::distance(*st.last_pos, pos);
    const double dt = ts - *st.last_ts;
    if (d > 0.0 && (dt <= 0.0 || d / dt > policy.speed_limit_mps)) {
      st.ban_until = ts + policy.speed_ban_s;
      st.ban_reason = RejectCode::SpeedBan;
      return {Rejection{RejectCode::SpeedBan, policy.speed_ban_s, "implied speed too high"}};
    }
  }

  Admission out;
  if (policy.geofence) {
    if (!st.fence_anchor || ts - st.fence_since >= policy.geofence->window_s) {
      st.fence_anchor = pos;
      st.fence_since = ts;
    } else if (geo::distance(*st.fence_anchor, pos) > policy.geofence->radius_m) {
      out.dropped = true;
    }
  }

  ++st.queries_today;
  ++st.admitted_total;
  st.last_pos = pos;
  st.last_ts = ts;
  return out;
}

// --- registry ---------------------------------------------------------------

void TargetRegistry::add(Target t) {
  if (t.id.empty()) throw std::invalid_argument("target id must not be empty");
  const std::string id = t.id;
  if (!targets_.emplace(id, std::move(t)).second) {
    throw std::invalid_argument("duplicate target id: " + id);
  }
}

void TargetRegistry::move(const std::string& id, const geo::GeoPoint& pos) {
  auto it = targets_.find(id);
  if (it == targets_.end()) throw std::out_of_range("unknown target: " + id);
  it->second.pos = pos;
}

const Target* TargetRegistry::find(const std::string& id) const {
  auto it = targets_.find(id);
  return it == targets_.end() ? nullptr : &it->second;
}

TargetRegistry TargetRegistry::load_jsonl(std::istream& in) {
  TargetRegistry reg;
  for (auto& t : read_jsonl(in)) reg.add(std::move(t));
  return reg;
}

std::vector<Target> TargetRegistry::read_jsonl(std::istream& in) {
  std::vector<Target> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw RegistryError(lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      Target t;
      t.id = j.at("id").get<std::string>();
      t.pos = geo::make_point(j.at("lat").get<double>(), j.at("lon").get<double>());
      if (j.contains("contact_of")) {
        for (const auto& a : j.at("contact_of")) t.contact_of.insert(a.get<std::string>());
      }
      if (t.id.empty()) throw std::invalid_argument("target id must not be empty");
      if (!seen.insert(t.id).second) throw std::invalid_argument("duplicate target id: " + t.id);
      out.push_back(std::move(t));
    } catch (const std::exception& e) {
      throw RegistryError(lineno, e.what());
    }
  }
  return out;
}

TargetRegistry TargetRegistry::load_jsonl_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open registry file: " + path);
  return load_jsonl(in);
}

// --- service ----------------------------------------------------------------

Service::Service(ServiceConfig cfg, TargetRegistry registry)
    : cfg_(std::move(cfg)), registry_(std::move(registry)) {
  if (!(cfg_.quantizer.grid_deg > 0.0)) {
    throw std::invalid_argument("grid_deg must be positive");
  }
  for (const auto& [id, t] : registry_.targets()) indexed_.emplace(id, index(t));
}

Service::IndexedTarget Service::index(const Target& t) const {
  return IndexedTarget{t.id, node_point(cfg_.quantizer, snap(cfg_.quantizer, t.pos)),
                       t.contact_of};
}

Service::AccountSlot& Service::slot(const std::string& account) {
  std::lock_guard lock(accounts_mu_);
  auto& s = accounts_[account];
  if (!s) {
    s = std::make_unique<AccountSlot>();
    s->state.id = account;
  }
  return *s;
}

SearchResult Service::search_chats_nearby(const std::string& account,
                                          const geo::GeoPoint& pos, double ts) {
  SearchResult result;
  geo::GeoPoint querier_node;
  try {
    querier_node = node_point(cfg_.quantizer, snap(cfg_.quantizer, pos));
  } catch (const geo::DomainError& e) {
    result.rejection = Rejection{RejectCode::BadRequest, 0.0, e.what()};
    return result;
  }

  Admission adm;
  {
    AccountSlot& s = slot(account);
    std::lock_guard lock(s.mu);
    adm = admit_query(s.state, cfg_.policy, pos, ts);
  }
  if (!adm.admitted()) {
    result.rejection = adm.rejection;
    return result;
  }
  if (adm.dropped) return result;

  {
    std::shared_lock lock(registry_mu_);
    for (const auto& [id, t] : indexed_) {
      if (id == account) continue;
      const bool contact = t.contact_of.count(account) > 0;
      const double d = geo::distance(querier_node, t.node_pos);
      if (auto c = classify(d, contact, cfg_.classes, cfg_.cutoff_m)) {
        result.entries.push_back(Entry{id, *c});
      }
    }
  }
  std::stable_sort(result.entries.begin(), result.entries.end(),
                   [](const Entry& a, const Entry& b) {
                     if (a.class_m != b.class_m) return a.class_m < b.class_m;
                     return a.id < b.id;
                   });
  if (result.entries.size() > cfg_.max_entries) result.entries.resize(cfg_.max_entries);
  return result;
}

void Service::place_target(const std::string& id, const geo::GeoPoint& pos,
                           std::set<std::string> contact_of) {
  std::unique_lock lock(registry_mu_);
  if (registry_.find(id)) {
    registry_.move(id, pos);
  } else {
    registry_.add(Target{id, pos, std::move(contact_of)});
  }
  indexed_[id] = index(*registry_.find(id));
}

std::optional<geo::GeoPoint> Service::target_position(const std::string& id) const {
  std::shared_lock lock(registry_mu_);
  if (const Target* t = registry_.find(id)) return t->pos;
  return std::nullopt;
}

std::size_t Service::target_count() const {
  std::shared_lock lock(registry_mu_);
  return registry_.size();
}

AccountState Service::account(const std::string& id) const {
  std::lock_guard lock(accounts_mu_);
  auto it = accounts_.find(id);
  if (it == accounts_.end()) {
    AccountState st;
    st.id = id;
    return st;
  }
  std::lock_guard slot_lock(it->second->mu);
  return it->second->state;
}

}  // namespace proxilab::service
