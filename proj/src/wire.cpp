#include "proxilab/wire.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

namespace proxilab::wire {

using ojson = nlohmann::ordered_json;

namespace {

std::string_view strip_newline(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
    line.remove_suffix(1);
  }
  return line;
}

ojson parse_object(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(strip_newline(line));
  } catch (const ojson::parse_error& e) {
    throw DecodeError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw DecodeError("message is not a JSON object");
  const auto v = j.find("v");
  if (v == j.end() || !v->is_number_integer() || v->get<int>() != kVersion) {
    throw DecodeError("unsupported or missing protocol version");
  }
  if (!j.contains("type") || !j["type"].is_string()) {
    throw DecodeError("missing message type");
  }
  return j;
}

double finite_number(const ojson& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_number()) {
    throw DecodeError(std::string("missing numeric field '") + key + "'");
  }
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw DecodeError(std::string("non-finite '") + key + "'");
  return v;
}

}  // namespace

int Response::class_of(std::string_view id) const {
  if (kind != Kind::Result) return 0;
  for (const auto& e : entries) {
    if (e.id == id) return e.class_m;
  }
  return 0;
}

Response Response::result(std::vector<service::Entry> entries) {
  Response r;
  r.kind = Kind::Result;
  r.entries = std::move(entries);
  return r;
}

Response Response::error(std::string code, double retry_after_s) {
  Response r;
  r.kind = Kind::Error;
  r.code = std::move(code);
  r.retry_after_s = retry_after_s;
  return r;
}

std::string encode(const Request& req) {
  ojson j;
  j["v"] = req.v;
  j["type"] = req.type;
  j["account"] = req.account;
  j["lat"] = req.lat;
  j["lon"] = req.lon;
  j["ts"] = req.ts;
  return j.dump() + "\n";
}

std::string encode(const Response& resp) {
  ojson j;
  j["v"] = resp.v;
  if (resp.kind == Response::Kind::Result) {
    j["type"] = "result";
    j["entries"] = ojson::array();
    for (const auto& e : resp.entries) {
      ojson entry;
      entry["id"] = e.id;
      entry["class_m"] = e.class_m;
      j["entries"].push_back(std::move(entry));
    }
  } else {
    j["type"] = "error";
    j["code"] = resp.code;
    j["retry_after_s"] = resp.retry_after_s;
  }
  return j.dump() + "\n";
}

Request decode_request(std::string_view line) {
  const ojson j = parse_object(line);
  Request req;
  req.type = j["type"].get<std::string>();
  if (req.type != "search") throw DecodeError("unknown request type '" + req.type + "'");
  const auto acc = j.find("account");
  if (acc == j.end() || !acc->is_string() || acc->get<std::string>().empty()) {
    throw DecodeError("missing account");
  }
  req.account = acc->get<std::string>();
  req.lat = finite_number(j, "lat");
  req.lon = finite_number(j, "lon");
  req.ts = finite_number(j, "ts");
  if (req.lat < -90.0 || req.lat > 90.0 || req.lon < -180.0 || req.lon > 180.0) {
    throw DecodeError("coordinates out of range");
  }
  return req;
}

Response decode_response(std::string_view line) {
  const ojson j = parse_object(line);
  const std::string type = j["type"].get<std::string>();
  if (type == "error") {
    const auto code = j.find("code");
    if (code == j.end() || !code->is_string()) throw DecodeError("missing error code");
    const std::string c = code->get<std::string>();
    if (c != "FLOOD_WAIT" && c != "SPEED_BAN" && c != "BAD_REQUEST") {
      throw DecodeError("unknown error code '" + c + "'");
    }
    return Response::error(c, finite_number(j, "retry_after_s"));
  }
  if (type != "result") throw DecodeError("unknown response type '" + type + "'");
  const auto entries = j.find("entries");
  if (entries == j.end() || !entries->is_array()) throw DecodeError("missing entries");
  const auto& allowed = service::default_classes();
  std::vector<service::Entry> out;
  for (const auto& e : *entries) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string() ||
        !e.contains("class_m") || !e["class_m"].is_number_integer()) {
      throw DecodeError("malformed entry");
    }
    service::Entry entry{e["id"].get<std::string>(), e["class_m"].get<int>()};
    if (std::find(allowed.begin(), allowed.end(), entry.class_m) == allowed.end()) {
      throw DecodeError("class_m outside the allowed class set");
    }
    if (!out.empty()) {
      const auto& prev = out.back();
      if (prev.class_m > entry.class_m ||
          (prev.class_m == entry.class_m && prev.id >= entry.id)) {
        throw DecodeError("entries not sorted by (class_m, id)");
      }
    }
    out.push_back(std::move(entry));
  }
  return Response::result(std::move(out));
}

Response to_response(const service::SearchResult& r) {
  if (r.rejection) {
    return Response::error(service::to_string(r.rejection->code), r.rejection->retry_after_s);
  }
  return Response::result(r.entries);
}

Response handle_line(service::Service& svc, std::string_view line) {
  Request req;
  try {
    req = decode_request(line);
  } catch (const DecodeError&) {
    return Response::error("BAD_REQUEST", 0.0);
  }
  const auto pos = geo::make_point(req.lat, req.lon);
  return to_response(svc.search_chats_nearby(req.account, pos, req.ts));
}

}  // namespace proxilab::wire
