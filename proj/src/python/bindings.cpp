#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "proxilab/experiment.hpp"
#include "proxilab/io.hpp"
#include "proxilab/wire.hpp"

namespace py = pybind11;
using namespace proxilab;

namespace {

// JSON crosses the boundary as text; the Python side parses it with json.loads.
std::string transitions_jsonl(const probe::TransitionSet& set,
                              const std::optional<io::ojson>& config) {
  std::ostringstream out;
  io::write_transitions(out, set, config);
  return out.str();
}

py::dict set_summary(const probe::TransitionSet& set) {
  py::dict d;
  d["target"] = set.target;
  d["transitions"] = set.transitions.size();
  d["total_queries"] = set.total_queries;
  d["status"] = probe::to_string(set.status);
  d["ban_code"] = set.ban_code;
  return d;
}

experiment::ExperimentConfig config_from(std::uint64_t seed, double grid_deg, double step) {
  experiment::ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.grid_deg = grid_deg;
  cfg.step = step;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_proxilab, m) {
  m.doc() = "Proximity-service quantization simulator and boundary-probing attack";

  py::class_<geo::GeoPoint>(m, "GeoPoint")
      .def(py::init([](double lat, double lon) { return geo::make_point(lat, lon); }),
           py::arg("lat"), py::arg("lon"))
      .def_readonly("lat", &geo::GeoPoint::lat)
      .def_readonly("lon", &geo::GeoPoint::lon)
      .def("__eq__", [](const geo::GeoPoint& a, const geo::GeoPoint& b) { return a == b; })
      .def("__repr__", [](const geo::GeoPoint& p) {
        return "GeoPoint(" + std::to_string(p.lat) + ", " + std::to_string(p.lon) + ")";
      });

  m.def("distance", &geo::distance, py::arg("a"), py::arg("b"));
  m.def("destination", &geo::destination, py::arg("p"), py::arg("bearing_deg"), py::arg("dist"));
  m.def(
      "cell_size",
      [](double lat, double grid_deg) { return service::cell_size({grid_deg}, lat); },
      py::arg("lat"), py::arg("grid_deg") = 0.005);
  m.def(
      "snap",
      [](double lat, double lon, double grid_deg) {
        const auto n = service::snap({grid_deg}, geo::make_point(lat, lon));
        return py::make_tuple(n.i, n.j);
      },
      py::arg("lat"), py::arg("lon"), py::arg("grid_deg") = 0.005);
  m.def(
      "classify",
      [](double d, bool contact) { return service::classify(d, contact); }, py::arg("d"),
      py::arg("contact") = false);
  m.def("max_localization_error", &analysis::max_localization_error, py::arg("l"));

  py::class_<service::Service>(m, "Service")
      .def(py::init([](double grid_deg, int quota) {
             service::ServiceConfig cfg;
             cfg.quantizer.grid_deg = grid_deg;
             cfg.policy.daily_quota = quota;
             return std::make_unique<service::Service>(cfg);
           }),
           py::arg("grid_deg") = 0.005, py::arg("quota") = 1000)
      .def("place_target",
           [](service::Service& s, const std::string& id, double lat, double lon) {
             s.place_target(id, geo::make_point(lat, lon));
           })
      .def("handle_line",
           [](service::Service& s, const std::string& line) {
             return wire::encode(wire::handle_line(s, line));
           })
      .def("search", [](service::Service& s, const std::string& account, double lat, double lon,
                        double ts) {
        const auto r = s.search_chats_nearby(account, geo::make_point(lat, lon), ts);
        py::dict d;
        if (r.rejection) {
          d["error"] = service::to_string(r.rejection->code);
          d["retry_after_s"] = r.rejection->retry_after_s;
          return d;
        }
        py::list entries;
        for (const auto& e : r.entries) entries.append(py::make_tuple(e.id, e.class_m));
        d["entries"] = entries;
        return d;
      });

  m.def(
      "attack",
      [](double lat, double lon, std::uint64_t seed, int max_queries) {
        auto cfg = config_from(seed, 0.005, 10.0);
        cfg.probe.max_queries = max_queries;
        const geo::GeoPoint target = geo::make_point(lat, lon);
        const auto r = experiment::run_attack(cfg, target, geo::destination(target, 60.0, 300.0));
        py::dict d = set_summary(r.set);
        d["jsonl"] = transitions_jsonl(r.set, cfg.to_json());
        d["report"] = r.report ? py::object(py::str(io::report_to_json(*r.report).dump()))
                               : py::object(py::none());
        return d;
      },
      py::arg("lat") = 0.0, py::arg("lon") = 0.0, py::arg("seed") = 1,
      py::arg("max_queries") = 1000,
      "Collects transitions around a target placed at (lat, lon); returns JSONL and a report.");

  m.def(
      "analyze",
      [](const std::string& jsonl, double anchor_lat, double anchor_lon) {
        std::istringstream in(jsonl);
        const auto file = io::read_transitions(in);
        return io::report_to_json(
                   analysis::make_report(file.set, geo::make_point(anchor_lat, anchor_lon)))
            .dump();
      },
      py::arg("jsonl"), py::arg("anchor_lat"), py::arg("anchor_lon"));

  m.def(
      "sweep",
      [](std::uint64_t seed, double step) {
        const auto cfg = config_from(seed, 0.005, step);
        const auto rows = experiment::sweep(cfg, io::table1_locations());
        std::ostringstream out;
        io::write_sweep_csv(out, rows, std::optional<io::ojson>(cfg.to_json()));
        return out.str();
      },
      py::arg("seed") = 1, py::arg("step") = 10.0, "Table 1 latitude sweep as CSV text.");

  m.def(
      "tile_size",
      [](double lat, double lon, double step) {
        const auto scan = experiment::tile_scan(config_from(1, 0.005, step),
                                                {"target", geo::make_point(lat, lon)}, step,
                                                analysis::Axis::X);
        return scan.estimate.l;
      },
      py::arg("lat"), py::arg("lon"), py::arg("step") = 10.0);

  m.def(
      "ks_uniform",
      [](const std::vector<double>& samples, double a, double b) {
        const auto r = stats::ks_uniform(samples, a, b);
        return py::make_tuple(r.statistic, r.p_value);
      },
      py::arg("samples"), py::arg("a"), py::arg("b"));

  py::register_exception<service::RegistryError>(m, "RegistryError");
  py::register_exception<io::FormatError>(m, "FormatError");
  py::register_exception<analysis::InsufficientCoverage>(m, "InsufficientCoverage");
}
