#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "proxilab/geo.hpp"

namespace proxilab::service {

enum class Rounding {
  Nearest,  // round half toward +inf on each Mercator axis
  Floor,
};

/// Tessellation of the map into Web-Mercator cells of `grid_deg` per side.
struct Quantizer {
  double grid_deg = 0.005;
  Rounding rounding = Rounding::Nearest;
};

/// Column (i) and row (j) index of a tessellation cell.
struct GridNode {
  std::int64_t i = 0;
  std::int64_t j = 0;

  friend bool operator==(const GridNode&, const GridNode&) = default;
  friend auto operator<=>(const GridNode&, const GridNode&) = default;
};

GridNode snap(const Quantizer& q, const geo::GeoPoint& p);

/// Geographic coordinate of the node's representative point.
geo::GeoPoint node_point(const Quantizer& q, const GridNode& n);

/// Ground side length of a cell at `lat_deg`, identical on both axes.
double cell_size(const Quantizer& q, double lat_deg);

/// Distance in meters between the snapped representatives of two points.
double snapped_distance(const Quantizer& q, const geo::GeoPoint& a,
                        const geo::GeoPoint& b);

// --- distance classes -------------------------------------------------------

inline constexpr int kContactClass = 100;
inline constexpr double kDefaultCutoff = 12500.0;

/// {100, 500, 1000, 2000, ..., 12000}.
const std::vector<int>& default_classes();

/// Nearest class by absolute difference, ties toward the smaller class.
/// The contact-only class is skipped for non-contacts. nullopt when the
/// distance exceeds `cutoff` (not listed).
std::optional<int> classify(double d, bool contact,
                            std::span<const int> classes = default_classes(),
                            double cutoff = kDefaultCutoff);

}  // namespace proxilab::service
