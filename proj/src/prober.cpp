#include "proxilab/prober.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace proxilab::probe {

namespace {

// Outward headings cycle through the compass so that every side of the
// boundary gets crossed: cardinals first, then diagonals.
constexpr std::array<double, 8> kHeadingSchedule = {0.0,  90.0,  180.0, 270.0,
                                                    45.0, 135.0, 225.0, 315.0};
constexpr double kHeadingJitter = 15.0;
constexpr double kReentryJitter = 20.0;
constexpr int kMaxRecoveries = 64;

double wrap_bearing(double b) {
  double r = std::fmod(b, 360.0);
  if (r < 0.0) r += 360.0;
  return r;
}

// Running bounding box of known boundary/inside points in the finder's own
// frame (anchored at its starting position).
class BoxEstimate {
 public:
  explicit BoxEstimate(const geo::GeoPoint& anchor) : anchor_(anchor) { add(anchor); }

  void add(const geo::GeoPoint& p) {
    const geo::LocalXY xy = geo::to_local(anchor_, p);
    x_lo_ = std::min(x_lo_, xy.x);
    x_hi_ = std::max(x_hi_, xy.x);
    y_lo_ = std::min(y_lo_, xy.y);
    y_hi_ = std::max(y_hi_, xy.y);
  }

  geo::GeoPoint center() const {
    return geo::from_local(geo::LocalXY{(x_lo_ + x_hi_) / 2.0, (y_lo_ + y_hi_) / 2.0, anchor_});
  }

 private:
  geo::GeoPoint anchor_;
  double x_lo_ = std::numeric_limits<double>::infinity();
  double x_hi_ = -std::numeric_limits<double>::infinity();
  double y_lo_ = std::numeric_limits<double>::infinity();
  double y_hi_ = -std::numeric_limits<double>::infinity();
};

}  // namespace

void ProbeConfig::validate() const {
  if (!(accuracy > 0.0)) throw std::invalid_argument("accuracy must be positive");
  if (!(jump > accuracy)) throw std::invalid_argument("jump must exceed accuracy");
  if (max_queries < 0) throw std::invalid_argument("max_queries must be non-negative");
  if (!(reset_distance > jump)) throw std::invalid_argument("reset_distance must exceed jump");
  if (target_transitions < 1) throw std::invalid_argument("target_transitions must be >= 1");
}

const char* to_string(Direction d) { return d == Direction::Out ? "OUT" : "IN"; }

const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Complete:
      return "complete";
    case RunStatus::BudgetExhausted:
      return "budget";
    case RunStatus::Banned:
      return "banned";
    case RunStatus::NotFound:
      return "not_found";
  }
  return "complete";
}

double pace(const geo::GeoPoint& prev_pos, const geo::GeoPoint& next_pos, double prev_ts) {
  const double d = geo::distance(prev_pos, next_pos);
  return prev_ts + std::max(kMinPaceStep, d / kPaceSpeed);
}

Prober::Prober(wire::NearbyClient& client, std::string target_id, ProbeConfig cfg)
    : client_(client), target_(std::move(target_id)), cfg_(cfg), rng_(cfg.seed), ts_(cfg.start_ts) {
  cfg_.validate();
}

int Prober::take_query_count() {
  const int n = since_mark_;
  since_mark_ = 0;
  return n;
}

int Prober::observe(const geo::GeoPoint& p) {
  if (used_ >= cfg_.max_queries) throw BudgetExhausted("query budget exhausted");
  const double ts = last_query_pos_ ? pace(*last_query_pos_, p, ts_) : ts_;
  const wire::Response resp = client_.search(p, ts);
  if (!resp.ok()) {
    if (resp.code == "BAD_REQUEST") {
      throw std::runtime_error("service rejected the request as malformed");
    }
    throw Banned(resp.code, phase_);
  }
  ts_ = ts;
  last_query_pos_ = p;
  ++used_;
  ++since_mark_;
  return resp.class_of(target_);
}

geo::GeoPoint Prober::find_inward_start(const geo::GeoPoint& hint) {
  phase_ = "start";
  if (observe(hint) == kInnerClass) {
    pos_ = hint;
    return hint;
  }
  for (int k = 0; k < cfg_.start_probes; ++k) {
    const double b = rng_.uniform(0.0, 360.0);
    const double r = cfg_.start_radius * std::sqrt(rng_.uniform());
    const geo::GeoPoint p = geo::destination(hint, b, r);
    if (observe(p) == kInnerClass) {
      pos_ = p;
      return p;
    }
  }
  throw NotFound("no 500 m position found near the hint");
}

double Prober::choose_direction(const BearingSource& source) {
  phase_ = "direction";
  for (int attempt = 0; attempt < cfg_.max_direction_draws; ++attempt) {
    const double b = wrap_bearing(source());
    const geo::GeoPoint next = geo::destination(pos_, b, cfg_.jump);
    if (observe(next) == kInnerClass) {
      pos_ = next;
      return b;
    }
  }
  throw Exhausted("no bearing keeps the walker inside");
}

double Prober::choose_direction(std::optional<double> preferred) {
  bool first = true;
  return choose_direction([&]() {
    if (first && preferred) {
      first = false;
      return *preferred;
    }
    first = false;
    return rng_.uniform(0.0, 360.0);
  });
}

std::pair<geo::GeoPoint, geo::GeoPoint> Prober::probe_outward(double bearing) {
  phase_ = "probe";
  const geo::GeoPoint origin = pos_;
  geo::GeoPoint inside = pos_;
  for (;;) {
    const geo::GeoPoint next = geo::destination(inside, bearing, cfg_.jump);
    if (geo::distance(origin, next) > cfg_.reset_distance) {
      throw Reset("outward walk left the reset radius");
    }
    if (observe(next) != kInnerClass) {
      pos_ = next;
      return {inside, next};
    }
    inside = next;
    pos_ = next;
  }
}

std::pair<geo::GeoPoint, geo::GeoPoint> Prober::probe_inward(const geo::GeoPoint& from,
                                                             double bearing) {
  phase_ = "reenter";
  geo::GeoPoint outside = from;
  for (;;) {
    const geo::GeoPoint next = geo::destination(outside, bearing, cfg_.jump);
    if (geo::distance(from, next) > cfg_.reset_distance) {
      throw Reset("inward walk left the reset radius");
    }
    pos_ = next;
    if (observe(next) == kInnerClass) return {next, outside};
    outside = next;
  }
}

Transition Prober::bisect_boundary(geo::GeoPoint inside, geo::GeoPoint outside,
                                   Direction dir, double bearing) {
  phase_ = "bisect";
  if (cfg_.verify_endpoints && geo::distance(inside, outside) > 0.0 &&
      observe(outside) == kInnerClass) {
    throw InconsistentOracle("outer endpoint now reports 500");
  }
  while (geo::distance(inside, outside) > cfg_.accuracy) {
    const geo::GeoPoint mid = geo::midpoint(inside, outside);
    const int c = observe(mid);
    pos_ = mid;
    if (c == kInnerClass) {
      inside = mid;
    } else if (c == kOuterClass) {
      outside = mid;
    } else {
      throw InconsistentOracle("midpoint reported class " + std::to_string(c));
    }
  }
  Transition t;
  t.inside = inside;
  t.outside = outside;
  t.bearing = bearing;
  t.dir = dir;
  return t;
}

TransitionSet Prober::collect_transitions(const geo::GeoPoint& hint) {
  TransitionSet out;
  out.target = target_;
  auto record = [&](Transition t) {
    t.queries = take_query_count();
    out.transitions.push_back(t);
  };

  try {
    const geo::GeoPoint start = find_inward_start(hint);
    out.exploration_queries += take_query_count();
    BoxEstimate box(start);
    geo::GeoPoint last_inside = start;
    std::size_t sector = 0;
    int recoveries = 0;
    const auto wanted = static_cast<std::size_t>(cfg_.target_transitions);

    while (out.transitions.size() < wanted) {
      try {
        phase_ = "reposition";
        const geo::GeoPoint center = box.center();
        if (geo::distance(center, pos_) > 1.0) {
          pos_ = observe(center) == kInnerClass ? center : last_inside;
        }

        const double heading = kHeadingSchedule[sector % kHeadingSchedule.size()] +
                               rng_.uniform(-kHeadingJitter, kHeadingJitter);
        ++sector;
        const double b = choose_direction(heading);
        const auto [in, o] = probe_outward(b);
        const Transition t_out = bisect_boundary(in, o, Direction::Out, b);
        record(t_out);
        box.add(t_out.midpoint());
        last_inside = t_out.inside;
        if (out.transitions.size() >= wanted) break;

        const double rb = wrap_bearing(b + 180.0 + rng_.uniform(-kReentryJitter, kReentryJitter));
        const auto [in2, o2] = probe_inward(t_out.outside, rb);
        const Transition t_in = bisect_boundary(in2, o2, Direction::In, rb);
        record(t_in);
        box.add(t_in.midpoint());
        last_inside = t_in.inside;
        pos_ = t_in.inside;
      } catch (const Reset&) {
        pos_ = last_inside;
        if (++recoveries > kMaxRecoveries) break;
      } catch (const Exhausted&) {
        pos_ = last_inside;
        if (++recoveries > kMaxRecoveries) break;
      }
    }
  } catch (const BudgetExhausted&) {
    out.status = RunStatus::BudgetExhausted;
  } catch (const Banned& b) {
    out.status = RunStatus::Banned;
    out.ban_code = b.code;
    out.ban_step = b.step;
  } catch (const NotFound&) {
    out.status = RunStatus::NotFound;
  }
  out.exploration_queries += take_query_count();
  out.total_queries = used_;
  return out;
}

}  // namespace proxilab::probe
