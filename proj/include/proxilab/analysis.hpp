#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "proxilab/geo.hpp"
#include "proxilab/net.hpp"
#include "proxilab/prober.hpp"

namespace proxilab::analysis {

struct LocalPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Axis-aligned box in a target-anchored local frame (meters).
struct Rect {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

class InsufficientCoverage : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A transition expressed in a local frame; `mid` is its representative
/// position (midpoint of the straddle).
struct LocalTransition {
  LocalPoint inside;
  LocalPoint outside;
  LocalPoint mid;
  probe::Direction dir = probe::Direction::Out;
};

std::vector<LocalTransition> localize(const probe::TransitionSet& set,
                                      const geo::GeoPoint& anchor);

/// Component-wise min/max of transition midpoints. Requires at least four
/// transitions crossing at least three distinct sides (by outward normal),
/// otherwise throws InsufficientCoverage.
Rect bounding_box(std::span<const LocalTransition> ts);

LocalPoint centroid(const Rect& r);

/// Distances from each edge of `rect` to the target coordinate.
struct EdgeOffsets {
  std::vector<double> right;   // x_max - x_t
  std::vector<double> left;    // x_t - x_min
  std::vector<double> top;     // y_max - y_t
  std::vector<double> bottom;  // y_t - y_min

  void append(const EdgeOffsets& other);
};

EdgeOffsets edge_offsets(const Rect& rect, const LocalPoint& target = {});
EdgeOffsets edge_offsets(const probe::TransitionSet& set, const geo::GeoPoint& true_target);

struct Phasor {
  double rho = 0.0;
  double phase = 0.0;  // radians in [-pi, pi]
};

/// Amplitude and phase of the centroid -> target offset.
Phasor phasor(const LocalPoint& true_target, const LocalPoint& centroid);

/// Half-diagonal of a square uncertainty region of side l.
double max_localization_error(double l);

enum class Shape { Square, Cross, Unknown };

const char* to_string(Shape s);

/// Square when no boundary point sits notched inside the box corners, Cross
/// when notches of at least cell/3 on both axes appear in two or more
/// quadrants. `cell` defaults to min(width, height) / 3. Unknown below 20
/// transitions or without a transition in every quadrant.
Shape classify_shape(std::span<const LocalTransition> ts,
                     std::optional<double> cell = std::nullopt);

struct PrivacyReport {
  Rect rect;
  LocalPoint centroid;
  std::optional<double> l;  // tile size (m)
  std::optional<double> D;  // max localization error (m)
  Shape shape = Shape::Unknown;
  int n_transitions = 0;
  int n_queries = 0;
};

/// bounding box + centroid + shape. When the shape is Square the box spans
/// three tiles per side, so l defaults to the mean side / 3.
PrivacyReport make_report(const probe::TransitionSet& set, const geo::GeoPoint& anchor,
                          std::optional<double> tile_size = std::nullopt);

// --- active measurements (need control over the target device) -------------

/// Moves the target device, as the attacker does with its own spoofed phone.
class TargetPlacement {
 public:
  virtual ~TargetPlacement() = default;
  virtual void place(const std::string& target, const geo::GeoPoint& pos) = 0;
};

class ServicePlacement final : public TargetPlacement {
 public:
  explicit ServicePlacement(service::Service& svc) : svc_(svc) {}
  void place(const std::string& target, const geo::GeoPoint& pos) override {
    svc_.place_target(target, pos);
  }

 private:
  service::Service& svc_;
};

enum class Axis { X, Y };

class NoShiftObserved : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TileEstimate {
  double l = 0.0;
  std::vector<double> shift_offsets;    // deployment offsets where the boundary moved
  std::vector<double> boundary_offsets; // boundary position (m from base) after each shift
  int deployments = 0;
  int queries = 0;
};

struct TileScanOptions {
  int min_shifts = 4;
  double max_span = 5000.0;
};

/// Redeploys the target every `step` meters along `axis` from `base` and
/// watches the boundary crossing on that axis; l is the mean gap between
/// consecutive deployment offsets at which the boundary shifted.
TileEstimate estimate_tile_size(probe::Prober& prober, TargetPlacement& placement,
                                const std::string& target, const geo::GeoPoint& base,
                                double step, Axis axis, TileScanOptions opts = {});

struct Location {
  std::string name;
  geo::GeoPoint pos;
};

struct SweepRow {
  std::string name;
  double lat = 0.0;
  double lon = 0.0;
  std::optional<double> l;
  std::optional<double> D;
  Shape shape = Shape::Unknown;
  std::string error;
};

using ClientFactory = std::function<std::unique_ptr<wire::NearbyClient>(const std::string& account)>;

/// One tile-size estimate and one transition collection per location, each
/// on its own finder accounts. Failures are recorded per row.
std::vector<SweepRow> latitude_sweep(const ClientFactory& clients, TargetPlacement& placement,
                                     std::span<const Location> locations, double step,
                                     const probe::ProbeConfig& cfg, bool parallel = true);

}  // namespace proxilab::analysis
