#include "proxilab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <numbers>
#include <thread>

#include "proxilab/rng.hpp"
#include "proxilab/stats.hpp"

namespace proxilab::experiment {

namespace {

constexpr const char* kTargetId = "target";

io::ojson probe_to_json(const probe::ProbeConfig& p) {
  io::ojson j;
  j["accuracy"] = p.accuracy;
  j["jump"] = p.jump;
  j["max_queries"] = p.max_queries;
  j["reset_distance"] = p.reset_distance;
  j["speed_limit"] = p.speed_limit;
  j["seed"] = p.seed;
  j["target_transitions"] = p.target_transitions;
  j["start_ts"] = p.start_ts;
  j["start_probes"] = p.start_probes;
  j["start_radius"] = p.start_radius;
  j["max_direction_draws"] = p.max_direction_draws;
  j["verify_endpoints"] = p.verify_endpoints;
  return j;
}

template <typename T>
void read_opt(const io::ojson& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

probe::ProbeConfig probe_from_json(const io::ojson& j) {
  probe::ProbeConfig p;
  read_opt(j, "accuracy", p.accuracy);
  read_opt(j, "jump", p.jump);
  read_opt(j, "max_queries", p.max_queries);
  read_opt(j, "reset_distance", p.reset_distance);
  read_opt(j, "speed_limit", p.speed_limit);
  read_opt(j, "seed", p.seed);
  read_opt(j, "target_transitions", p.target_transitions);
  read_opt(j, "start_ts", p.start_ts);
  read_opt(j, "start_probes", p.start_probes);
  read_opt(j, "start_radius", p.start_radius);
  read_opt(j, "max_direction_draws", p.max_direction_draws);
  read_opt(j, "verify_endpoints", p.verify_endpoints);
  return p;
}

// Runs fn(i) for i in [0, n) on a bounded pool; results keep index order.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, F fn) {
  std::vector<R> out(n);
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  for (std::size_t begin = 0; begin < n; begin += width) {
    const std::size_t end = std::min(n, begin + width);
    std::vector<std::future<R>> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = begin; i < end; ++i) out[i] = batch[i - begin].get();
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

io::ojson ks_json(const stats::KsResult& r) {
  return io::ojson{{"statistic", r.statistic}, {"p_value", r.p_value}};
}

}  // namespace

io::ojson ExperimentConfig::to_json() const {
  io::ojson j;
  j["seed"] = seed;
  j["grid_deg"] = grid_deg;
  j["classes"] = classes;
  j["quota"] = quota;
  j["speed_limit"] = speed_limit;
  j["step"] = step;
  j["targets"] = targets;
  j["out"] = out;
  j["probe"] = probe_to_json(probe);
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const io::ojson& j) {
  ExperimentConfig c;
  try {
    read_opt(j, "seed", c.seed);
    read_opt(j, "grid_deg", c.grid_deg);
    read_opt(j, "classes", c.classes);
    read_opt(j, "quota", c.quota);
    read_opt(j, "speed_limit", c.speed_limit);
    read_opt(j, "step", c.step);
    read_opt(j, "targets", c.targets);
    read_opt(j, "out", c.out);
    if (j.contains("probe")) c.probe = probe_from_json(j.at("probe"));
  } catch (const io::ojson::exception& e) {
    throw io::FormatError(std::string("bad config: ") + e.what());
  }
  return c;
}

service::ServiceConfig ExperimentConfig::service_config() const {
  service::ServiceConfig sc;
  sc.quantizer.grid_deg = grid_deg;
  sc.classes = classes;
  sc.policy.daily_quota = quota;
  sc.policy.speed_limit_mps = speed_limit;
  return sc;
}

probe::ProbeConfig ExperimentConfig::probe_config(std::uint64_t stream) const {
  probe::ProbeConfig p = probe;
  p.speed_limit = speed_limit;
  p.seed = stream == 0 ? seed : Rng(seed).fork(stream).next();
  return p;
}

AttackResult run_attack(const ExperimentConfig& cfg, const geo::GeoPoint& target,
                        const geo::GeoPoint& hint) {
  service::Service svc(cfg.service_config());
  svc.place_target(kTargetId, target);
  wire::LocalClient client(svc, "finder");
  probe::Prober prober(client, kTargetId, cfg.probe_config());

  AttackResult res;
  res.target = target;
  res.set = prober.collect_transitions(hint);
  try {
    res.report = analysis::make_report(res.set, target);
  } catch (const std::exception& e) {
    res.report_error = e.what();
  }
  return res;
}

AttackResult equator_attack(const ExperimentConfig& cfg) {
  const geo::GeoPoint target{0.0, 0.0};
  const geo::GeoPoint hint = geo::destination(target, 60.0, 300.0);
  return run_attack(cfg, target, hint);
}

DeploymentStudy deployment_study(const ExperimentConfig& cfg, double lat, double lon, int n) {
  if (n <= 0) throw std::invalid_argument("deployment count must be positive");
  DeploymentStudy study;
  study.lat = lat;
  study.cell = service::cell_size(service::Quantizer{cfg.grid_deg}, lat);

  // Targets and hints are drawn up front so the result does not depend on
  // the scheduling of the parallel runs.
  Rng rng(cfg.seed);
  struct Plan {
    geo::GeoPoint target;
    geo::GeoPoint hint;
  };
  std::vector<Plan> plans;
  const double half_box = 0.02;
  for (int i = 0; i < n; ++i) {
    Plan p;
    p.target = geo::make_point(lat + rng.uniform(-half_box, half_box),
                               lon + rng.uniform(-half_box, half_box));
    const double bearing = rng.uniform(0.0, 360.0);
    const double dist = 300.0 * std::sqrt(rng.uniform());
    p.hint = geo::destination(p.target, bearing, dist);
    plans.push_back(p);
  }

  auto run_one = [&](std::size_t i) -> std::optional<DeploymentSample> {
    service::Service svc(cfg.service_config());
    svc.place_target(kTargetId, plans[i].target);
    wire::LocalClient client(svc, "finder-" + std::to_string(i));
    probe::Prober prober(client, kTargetId, cfg.probe_config(i + 1));
    const auto set = prober.collect_transitions(plans[i].hint);
    try {
      const auto lt = analysis::localize(set, plans[i].target);
      DeploymentSample s;
      s.target = plans[i].target;
      s.rect = analysis::bounding_box(lt);
      s.centroid = analysis::centroid(s.rect);
      s.phasor = analysis::phasor({}, s.centroid);
      s.transitions = static_cast<int>(set.transitions.size());
      s.queries = set.total_queries;
      return s;
    } catch (const analysis::InsufficientCoverage&) {
      return std::nullopt;
    }
  };

  for (auto& s : parallel_map<std::optional<DeploymentSample>>(plans.size(), run_one)) {
    if (!s) {
      ++study.failures;
      continue;
    }
    study.offsets.append(analysis::edge_offsets(s->rect));
    study.rho.push_back(s->phasor.rho);
    study.phase.push_back(s->phasor.phase);
    study.samples.push_back(*s);
  }
  return study;
}

std::vector<analysis::SweepRow> sweep(const ExperimentConfig& cfg,
                                      std::span<const analysis::Location> locations) {
  service::Service svc(cfg.service_config());
  for (const auto& loc : locations) svc.place_target(loc.name, loc.pos);
  analysis::ServicePlacement placement(svc);
  const analysis::ClientFactory clients = [&svc](const std::string& account) {
    return std::make_unique<wire::LocalClient>(svc, account);
  };
  return analysis::latitude_sweep(clients, placement, locations, cfg.step, cfg.probe_config());
}

TileScan tile_scan(const ExperimentConfig& cfg, const analysis::Location& loc, double step,
                   analysis::Axis axis) {
  service::Service svc(cfg.service_config());
  analysis::ServicePlacement placement(svc);
  placement.place(loc.name, loc.pos);
  wire::LocalClient client(svc, "finder-tile");
  probe::Prober prober(client, loc.name, cfg.probe_config());
  return TileScan{loc, analysis::estimate_tile_size(prober, placement, loc.name, loc.pos, step,
                                                    axis)};
}

UncertaintyRatio uncertainty_ratio(const ExperimentConfig& cfg, const geo::GeoPoint& base) {
  UncertaintyRatio out;
  out.base = base;
  const analysis::Location loc{kTargetId, base};
  out.l_x = tile_scan(cfg, loc, cfg.step, analysis::Axis::X).estimate.l;
  out.l_y = tile_scan(cfg, loc, cfg.step, analysis::Axis::Y).estimate.l;

  const AttackResult attack = run_attack(cfg, base, base);
  out.bbox = analysis::bounding_box(analysis::localize(attack.set, base));
  out.ratio = out.l_x * out.l_y / out.bbox.area();
  return out;
}

ShapeProbe shape_at(const ExperimentConfig& cfg, const geo::GeoPoint& base) {
  ShapeProbe out;
  out.lat = base.lat;
  const AttackResult attack = run_attack(cfg, base, base);
  const auto lt = analysis::localize(attack.set, base);
  out.shape = analysis::classify_shape(lt);
  try {
    out.rect = analysis::bounding_box(lt);
  } catch (const analysis::InsufficientCoverage&) {
  }
  return out;
}

io::ojson write_figures(const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  fs::create_directories(root);
  const std::optional<io::ojson> config = cfg.to_json();
  io::ojson summary;
  summary["config"] = *config;

  // Collection run at the equator (transition map and efficiency).
  {
    const AttackResult eq = equator_attack(cfg);
    auto f = open_out(root / "equator_transitions.jsonl");
    io::write_transitions(f, eq.set, config);
    io::ojson s{{"transitions", eq.set.transitions.size()},
                {"queries", eq.set.total_queries},
                {"status", probe::to_string(eq.set.status)}};
    if (eq.report) {
      io::ojson rep = io::report_to_json(*eq.report);
      auto rf = open_out(root / "equator_report.json");
      io::ojson doc{{"config", *config}};
      for (const auto& [k, v] : rep.items()) doc[k] = v;
      rf << doc.dump(2) << '\n';
      s["report"] = rep;
    } else {
      s["report_error"] = eq.report_error;
    }
    summary["equator"] = s;
  }

  // Pooled deployments at lat 23: edge-offset and phasor distributions.
  {
    const DeploymentStudy st = deployment_study(cfg, 23.0, 10.0, 300);
    const double s = st.cell;
    io::ojson d{{"deployments", st.samples.size()}, {"failures", st.failures}, {"cell", s}};
    const std::pair<const char*, const std::vector<double>*> edges[] = {
        {"right", &st.offsets.right},
        {"left", &st.offsets.left},
        {"top", &st.offsets.top},
        {"bottom", &st.offsets.bottom}};
    for (const auto& [name, samples] : edges) {
      const stats::Ecdf ecdf(*samples);
      auto f = open_out(root / (std::string("ecdf_") + name + ".csv"));
      io::write_ecdf_csv(f, ecdf, config);
      const auto fit = stats::fit_uniform(*samples);
      d[name] = {{"fit", {fit.first, fit.second}},
                 {"ks", ks_json(stats::ks_uniform(*samples, s, 2.0 * s))}};
    }
    {
      auto f = open_out(root / "ecdf_rho.csv");
      io::write_ecdf_csv(f, stats::Ecdf(st.rho), config);
      auto g = open_out(root / "ecdf_phase.csv");
      io::write_ecdf_csv(g, stats::Ecdf(st.phase), config);
    }
    const auto near = std::count_if(st.rho.begin(), st.rho.end(), [](double r) { return r <= 200.0; });
    d["p_rho_le_200"] = static_cast<double>(near) / static_cast<double>(st.rho.size());
    d["phase_ks"] = ks_json(stats::ks_uniform(st.phase, -std::numbers::pi, std::numbers::pi));
    summary["deployments"] = d;
  }

  // Latitude sweep over the reference cities.
  {
    const auto locations = cfg.targets.empty() ? io::table1_locations()
                                               : io::locations_from_registry(cfg.targets);
    const auto rows = sweep(cfg, locations);
    auto f = open_out(root / "sweep.csv");
    io::write_sweep_csv(f, rows, config);
    io::ojson arr = io::ojson::array();
    for (const auto& r : rows) {
      arr.push_back({{"name", r.name},
                     {"D", r.D ? io::ojson(*r.D) : io::ojson(nullptr)},
                     {"shape", analysis::to_string(r.shape)}});
    }
    summary["sweep"] = arr;
  }

  // Uncertainty region vs 500-class region at mid latitude.
  {
    const UncertaintyRatio u = uncertainty_ratio(cfg, {40.0, 10.0});
    summary["uncertainty_ratio"] = {{"l_x", u.l_x},
                                    {"l_y", u.l_y},
                                    {"bbox_w", u.bbox.width()},
                                    {"bbox_h", u.bbox.height()},
                                    {"ratio", u.ratio}};
  }

  // Shape of the 500-class region along latitude.
  {
    auto f = open_out(root / "shape_scan.csv");
    io::write_config_comment(f, config);
    f << "lat,shape,width_m,height_m\n";
    for (int k = 0; k <= 45; ++k) {
      const ShapeProbe sp = shape_at(cfg, {static_cast<double>(k), 10.0});
      f << k << ',' << analysis::to_string(sp.shape) << ','
        << (sp.rect ? io::fmt(sp.rect->width(), 1) : "") << ','
        << (sp.rect ? io::fmt(sp.rect->height(), 1) : "") << '\n';
    }
  }

  auto f = open_out(root / "summary.json");
  f << summary.dump(2) << '\n';
  return summary;
}

}  // namespace proxilab::experiment
