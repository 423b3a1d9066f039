#include "proxilab/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "proxilab/service.hpp"

namespace proxilab::io {

namespace {

ojson point_json(const geo::GeoPoint& p) { return ojson::array({p.lat, p.lon}); }

geo::GeoPoint point_from_json(const ojson& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw FormatError("expected [lat, lon]");
  }
  return geo::make_point(j[0].get<double>(), j[1].get<double>());
}

}  // namespace

std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

ojson transition_to_json(const std::string& target, const probe::Transition& t) {
  ojson j;
  j["target"] = target;
  j["inside"] = point_json(t.inside);
  j["outside"] = point_json(t.outside);
  j["bearing"] = t.bearing;
  j["dir"] = probe::to_string(t.dir);
  j["queries"] = t.queries;
  return j;
}

probe::Transition transition_from_json(const ojson& j) {
  probe::Transition t;
  try {
    t.inside = point_from_json(j.at("inside"));
    t.outside = point_from_json(j.at("outside"));
    t.bearing = j.at("bearing").get<double>();
    const std::string dir = j.at("dir").get<std::string>();
    if (dir == "OUT") {
      t.dir = probe::Direction::Out;
    } else if (dir == "IN") {
      t.dir = probe::Direction::In;
    } else {
      throw FormatError("dir must be IN or OUT");
    }
    t.queries = j.at("queries").get<int>();
  } catch (const ojson::exception& e) {
    throw FormatError(e.what());
  }
  return t;
}

void write_transitions(std::ostream& out, const probe::TransitionSet& set,
                       const std::optional<ojson>& config) {
  if (config) out << ojson{{"config", *config}}.dump() << '\n';
  for (const auto& t : set.transitions) out << transition_to_json(set.target, t).dump() << '\n';
}

TransitionsFile read_transitions(std::istream& in) {
  TransitionsFile file;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const ojson j = ojson::parse(line);
      if (!j.is_object()) throw FormatError("record is not an object");
      if (j.contains("config") && !j.contains("target")) {
        file.config = j["config"];
        continue;
      }
      const std::string target = j.at("target").get<std::string>();
      if (file.set.target.empty()) {
        file.set.target = target;
      } else if (file.set.target != target) {
        throw FormatError("mixed targets in one file");
      }
      file.set.transitions.push_back(transition_from_json(j));
      file.set.total_queries += file.set.transitions.back().queries;
    } catch (const std::exception& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return file;
}

ojson report_to_json(const analysis::PrivacyReport& rep) {
  ojson j;
  j["rect"] = {{"x_m", rep.rect.x_min}, {"x_M", rep.rect.x_max},
               {"y_m", rep.rect.y_min}, {"y_M", rep.rect.y_max}};
  j["centroid"] = ojson::array({rep.centroid.x, rep.centroid.y});
  j["l"] = rep.l ? ojson(*rep.l) : ojson(nullptr);
  j["D"] = rep.D ? ojson(*rep.D) : ojson(nullptr);
  j["shape"] = analysis::to_string(rep.shape);
  j["n_transitions"] = rep.n_transitions;
  j["n_queries"] = rep.n_queries;
  return j;
}

void write_config_comment(std::ostream& out, const std::optional<ojson>& config) {
  if (config) out << "# config: " << config->dump() << '\n';
}

void write_sweep_csv(std::ostream& out, std::span<const analysis::SweepRow> rows,
                     const std::optional<ojson>& config) {
  write_config_comment(out, config);
  out << "name,lat,lon,l_m,D_m,shape\n";
  for (const auto& r : rows) {
    out << r.name << ',' << fmt(r.lat) << ',' << fmt(r.lon) << ','
        << (r.l ? fmt(*r.l, 1) : "") << ',' << (r.D ? fmt(*r.D, 1) : "") << ','
        << analysis::to_string(r.shape) << '\n';
  }
}

void write_ecdf_csv(std::ostream& out, const stats::Ecdf& ecdf,
                    const std::optional<ojson>& config) {
  write_config_comment(out, config);
  out << "value,F,lo,hi\n";
  for (double v : ecdf.samples()) {
    out << fmt(v, 3) << ',' << fmt(ecdf(v)) << ',' << fmt(ecdf.lower(v)) << ','
        << fmt(ecdf.upper(v)) << '\n';
  }
}

std::vector<analysis::Location> table1_locations() {
  return {
      {"Kourou", {5.154237, -52.648526}},      {"Coban", {15.46463, -90.403683}},
      {"Doha", {25.26174, 51.359269}},         {"Lakatamya", {35.11438, 33.296804}},
      {"Carcassonne", {43.21324, 2.344961}},   {"Winnipeg", {50.00542, -97.16734}},
      {"Malmo", {55.555275, 13.015577}},       {"Helsinki", {60.239339, 24.922424}},
      {"Bodo", {67.277398, 14.374172}},        {"Utqiagvik", {71.300602, -156.754113}},
  };
}

std::vector<analysis::Location> locations_from_registry(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open locations file: " + path);
  std::vector<analysis::Location> out;
  for (const auto& t : service::TargetRegistry::read_jsonl(in)) out.push_back({t.id, t.pos});
  return out;
}

}  // namespace proxilab::io
