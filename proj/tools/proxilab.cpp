// proxilab: run the simulated service, attack it, analyze the results.
//
//   proxilab serve   --bind 127.0.0.1:7878 --targets data/table1.jsonl
//   proxilab attack  [--endpoint host:port --target ID --hint LAT,LON] --out run.jsonl
//   proxilab analyze run.jsonl --anchor LAT,LON --out report.json
//   proxilab sweep   [--targets cities.jsonl] --step 10 --out sweep.csv
//   proxilab figures --out figures/
//
// Exit codes: 0 success, 1 usage or input error, 2 query budget exhausted,
// 3 banned by the service, 4 target not found.

#include <atomic>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "proxilab/experiment.hpp"
#include "proxilab/io.hpp"
#include "proxilab/net.hpp"

namespace {

using namespace proxilab;

enum Exit { kOk = 0, kError = 1, kBudget = 2, kBanned = 3, kNotFound = 4 };

struct Options {
  experiment::ExperimentConfig cfg;
  std::string bind = wire::kDefaultBind;
  std::string endpoint;
  std::string target;
  std::string account = "finder";
  std::string hint;
  std::string anchor;
  std::string input;
  std::optional<double> tile_size;
  bool wall_clock = false;
};

geo::GeoPoint parse_point(const std::string& text) {
  std::istringstream in(text);
  double lat = 0.0;
  double lon = 0.0;
  char comma = 0;
  if (!(in >> lat >> comma >> lon) || comma != ',' || !(in >> std::ws).eof()) {
    throw CLI::ValidationError("expected LAT,LON, got '" + text + "'");
  }
  return geo::make_point(lat, lon);
}

// Writes to --out when given, stdout otherwise.
template <typename F>
void emit(const std::string& path, F write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  write(f);
}

// Sleeps until real time catches up with the prober's virtual clock.
class WallClockClient final : public wire::NearbyClient {
 public:
  WallClockClient(wire::NearbyClient& inner, double ts0)
      : inner_(inner), ts0_(ts0), t0_(std::chrono::steady_clock::now()) {}
  wire::Response search(const geo::GeoPoint& pos, double ts) override {
    std::this_thread::sleep_until(t0_ + std::chrono::duration<double>(ts - ts0_));
    return inner_.search(pos, ts);
  }

 private:
  wire::NearbyClient& inner_;
  double ts0_;
  std::chrono::steady_clock::time_point t0_;
};

std::atomic<wire::Server*> g_server{nullptr};

extern "C" void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int cmd_serve(const Options& o) {
  service::TargetRegistry reg;
  if (!o.cfg.targets.empty()) {
    try {
      reg = service::TargetRegistry::load_jsonl_file(o.cfg.targets);
    } catch (const service::RegistryError& e) {
      std::cerr << "proxilab: " << o.cfg.targets << ": " << e.what() << '\n';
      return kError;
    }
  }
  if (reg.empty()) std::cerr << "proxilab: warning: serving an empty registry\n";
  service::Service svc(o.cfg.service_config(), std::move(reg));
  wire::Server server(svc, wire::Endpoint::parse(o.bind));
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "proxilab: serving " << svc.target_count() << " targets on "
            << wire::Endpoint{wire::Endpoint::parse(o.bind).host, server.port()}.str() << '\n';
  server.wait();
  g_server = nullptr;
  return kOk;
}

int exit_for(const probe::TransitionSet& set) {
  switch (set.status) {
    case probe::RunStatus::Complete:
      return kOk;
    case probe::RunStatus::BudgetExhausted:
      return kBudget;
    case probe::RunStatus::Banned:
      return kBanned;
    case probe::RunStatus::NotFound:
      return kNotFound;
  }
  return kError;
}

int cmd_attack(const Options& o) {
  const auto& cfg = o.cfg;
  std::unique_ptr<service::Service> local;
  std::unique_ptr<wire::NearbyClient> client;
  std::string target = o.target;
  std::optional<geo::GeoPoint> hint;
  if (!o.hint.empty()) hint = parse_point(o.hint);

  if (!o.endpoint.empty()) {
    if (target.empty() || !hint) {
      throw CLI::ValidationError("--endpoint needs --target and --hint");
    }
    client = std::make_unique<wire::TcpClient>(wire::Endpoint::parse(o.endpoint), o.account);
  } else {
    service::TargetRegistry reg;
    if (cfg.targets.empty()) {
      // Canned scenario: one target on the grid node at the origin.
      reg.add({"target", {0.0, 0.0}, {}});
      if (target.empty()) target = "target";
    } else {
      reg = service::TargetRegistry::load_jsonl_file(cfg.targets);
    }
    if (target.empty()) throw CLI::ValidationError("--target is required with --targets");
    const service::Target* t = reg.find(target);
    if (!hint) hint = t ? geo::destination(t->pos, 60.0, 300.0) : geo::GeoPoint{0.0, 0.0};
    local = std::make_unique<service::Service>(cfg.service_config(), std::move(reg));
    client = std::make_unique<wire::LocalClient>(*local, o.account);
  }

  probe::ProbeConfig pc = cfg.probe_config();
  std::unique_ptr<WallClockClient> timed;
  wire::NearbyClient* active = client.get();
  if (o.wall_clock) {
    pc.start_ts = std::floor(std::chrono::duration<double>(
                                 std::chrono::system_clock::now().time_since_epoch())
                                 .count());
    timed = std::make_unique<WallClockClient>(*client, pc.start_ts);
    active = timed.get();
  }

  probe::Prober prober(*active, target, pc);
  const probe::TransitionSet set = prober.collect_transitions(*hint);
  emit(cfg.out, [&](std::ostream& out) { io::write_transitions(out, set, std::optional<io::ojson>(cfg.to_json())); });
  std::cerr << "proxilab: " << set.transitions.size() << " transitions, " << set.total_queries
            << " queries, " << probe::to_string(set.status);
  if (set.status == probe::RunStatus::Banned) {
    std::cerr << " (" << set.ban_code << " during " << set.ban_step << ")";
  }
  std::cerr << '\n';
  return exit_for(set);
}

int cmd_analyze(const Options& o) {
  std::ifstream in(o.input);
  if (!in) throw CLI::ValidationError("cannot open input file '" + o.input + "'");
  const io::TransitionsFile file = io::read_transitions(in);
  if (file.set.transitions.empty()) throw std::runtime_error("no transitions in " + o.input);
  const geo::GeoPoint anchor =
      o.anchor.empty() ? file.set.transitions.front().inside : parse_point(o.anchor);
  const analysis::PrivacyReport rep = analysis::make_report(file.set, anchor, o.tile_size);

  io::ojson doc;
  doc["config"] = file.config ? *file.config : o.cfg.to_json();
  doc["anchor"] = io::ojson::array({anchor.lat, anchor.lon});
  const io::ojson fields = io::report_to_json(rep);
  for (const auto& [k, v] : fields.items()) doc[k] = v;
  emit(o.cfg.out, [&](std::ostream& out) { out << doc.dump(2) << '\n'; });
  return kOk;
}

int cmd_sweep(const Options& o) {
  const auto locations = o.cfg.targets.empty() ? io::table1_locations()
                                               : io::locations_from_registry(o.cfg.targets);
  const auto rows = experiment::sweep(o.cfg, locations);
  emit(o.cfg.out, [&](std::ostream& out) { io::write_sweep_csv(out, rows, std::optional<io::ojson>(o.cfg.to_json())); });
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      std::cerr << "proxilab: " << r.name << ": " << r.error << '\n';
      ++failed;
    }
  }
  return failed == 0 ? kOk : kError;
}

int cmd_figures(const Options& o) {
  const std::string dir = o.cfg.out.empty() ? "figures" : o.cfg.out;
  const io::ojson summary = experiment::write_figures(o.cfg, dir);
  std::cout << summary.dump(2) << '\n';
  return kOk;
}

void add_common(CLI::App* app, Options& o) {
  auto& c = o.cfg;
  app->add_option("--seed", c.seed, "RNG seed (falls back to PROXILAB_SEED)")
      ->envname("PROXILAB_SEED");
  app->add_option("--grid-deg", c.grid_deg, "Quantization grid (degrees)")
      ->check(CLI::PositiveNumber);
  app->add_option("--accuracy", c.probe.accuracy, "Bisection stop width (m)")
      ->check(CLI::PositiveNumber);
  app->add_option("--jump", c.probe.jump, "Walking step (m)")->check(CLI::PositiveNumber);
  app->add_option("--max-queries", c.probe.max_queries, "Query budget per run")
      ->check(CLI::PositiveNumber);
  app->add_option("--step", c.step, "Tile-size scan step (m)")->check(CLI::Range(0.001, 100.0));
  app->add_option("--targets", c.targets, "Registry / locations JSONL file");
  app->add_option("--out", c.out, "Output file or directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximity-service location privacy simulator"};
  app.require_subcommand(1);
  Options o;

  auto* serve = app.add_subcommand("serve", "Serve the simulated service over TCP");
  add_common(serve, o);
  serve->add_option("--bind", o.bind, "host:port to listen on");

  auto* attack = app.add_subcommand("attack", "Collect boundary transitions for one target");
  add_common(attack, o);
  attack->add_option("--endpoint", o.endpoint, "Remote service host:port");
  attack->add_option("--target", o.target, "Target id");
  attack->add_option("--account", o.account, "Finder account name");
  attack->add_option("--hint", o.hint, "Rough target location LAT,LON");
  attack->add_flag("--wall-clock", o.wall_clock, "Pace queries in real time");

  auto* analyze = app.add_subcommand("analyze", "Build a privacy report from transitions");
  add_common(analyze, o);
  analyze->add_option("input", o.input, "Transitions JSONL")->required();
  analyze->add_option("--anchor", o.anchor, "Local frame origin LAT,LON");
  analyze->add_option("--tile-size", o.tile_size, "Known tile size (m)");

  auto* sweep = app.add_subcommand("sweep", "Tile size and shape across latitudes");
  add_common(sweep, o);

  auto* figures = app.add_subcommand("figures", "Regenerate every canned dataset");
  add_common(figures, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kError;
  }

  try {
    if (*serve) return cmd_serve(o);
    if (*attack) return cmd_attack(o);
    if (*analyze) return cmd_analyze(o);
    if (*sweep) return cmd_sweep(o);
    if (*figures) return cmd_figures(o);
  } catch (const CLI::Error& e) {
    std::cerr << "proxilab: " << e.what() << "\n\n" << app.help();
    return kError;
  } catch (const service::RegistryError& e) {
    std::cerr << "proxilab: " << o.cfg.targets << ": " << e.what() << '\n';
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "proxilab: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
