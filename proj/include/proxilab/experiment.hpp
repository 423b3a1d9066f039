#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "proxilab/analysis.hpp"
#include "proxilab/io.hpp"
#include "proxilab/prober.hpp"
#include "proxilab/service.hpp"

// Canned experiments: each one builds an in-process service, attacks it and
// returns the measurements that the CLI writes out and the acceptance suite
// checks. All of them are deterministic functions of the configuration.
namespace proxilab::experiment {

struct ExperimentConfig {
  std::uint64_t seed = 1;
  double grid_deg = 0.005;
  std::vector<int> classes = service::default_classes();
  int quota = 1000;
  double speed_limit = 25.0;
  probe::ProbeConfig probe;
  double step = 10.0;
  std::string targets;  // registry / locations file
  std::string out;      // output path or directory

  io::ojson to_json() const;
  static ExperimentConfig from_json(const io::ojson& j);

  service::ServiceConfig service_config() const;
  /// Probe settings with the experiment seed mixed with `stream`.
  probe::ProbeConfig probe_config(std::uint64_t stream = 0) const;
};

struct AttackResult {
  geo::GeoPoint target;
  probe::TransitionSet set;
  std::optional<analysis::PrivacyReport> report;
  std::string report_error;
};

/// One collection run against a single target at `target`, starting from `hint`.
AttackResult run_attack(const ExperimentConfig& cfg, const geo::GeoPoint& target,
                        const geo::GeoPoint& hint);

/// Target on the grid node at the origin, hint a few hundred meters away.
AttackResult equator_attack(const ExperimentConfig& cfg);

struct DeploymentSample {
  geo::GeoPoint target;
  analysis::Rect rect;
  analysis::LocalPoint centroid;
  analysis::Phasor phasor;
  int transitions = 0;
  int queries = 0;
};

struct DeploymentStudy {
  double lat = 0.0;
  double cell = 0.0;  // model tile size at `lat`
  std::vector<DeploymentSample> samples;
  analysis::EdgeOffsets offsets;
  std::vector<double> rho;
  std::vector<double> phase;
  int failures = 0;
};

/// `n` targets dropped uniformly in a ~4 km box around (lat, lon), each
/// attacked by a fresh finder account.
DeploymentStudy deployment_study(const ExperimentConfig& cfg, double lat, double lon, int n);

std::vector<analysis::SweepRow> sweep(const ExperimentConfig& cfg,
                                      std::span<const analysis::Location> locations);

struct UncertaintyRatio {
  geo::GeoPoint base;
  double l_x = 0.0;
  double l_y = 0.0;
  analysis::Rect bbox;
  double ratio = 0.0;  // l_x * l_y / bbox area
};

UncertaintyRatio uncertainty_ratio(const ExperimentConfig& cfg, const geo::GeoPoint& base);

struct ShapeProbe {
  double lat = 0.0;
  analysis::Shape shape = analysis::Shape::Unknown;
  std::optional<analysis::Rect> rect;
};

ShapeProbe shape_at(const ExperimentConfig& cfg, const geo::GeoPoint& base);

struct TileScan {
  analysis::Location location;
  analysis::TileEstimate estimate;
};

TileScan tile_scan(const ExperimentConfig& cfg, const analysis::Location& loc, double step,
                   analysis::Axis axis);

/// Writes every canned dataset into `dir` and returns a summary object.
io::ojson write_figures(const ExperimentConfig& cfg, const std::string& dir);

}  // namespace proxilab::experiment
