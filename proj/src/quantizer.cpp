#include "proxilab/quantizer.hpp"

#include <cmath>
#include <stdexcept>

namespace proxilab::service {

namespace {

std::int64_t round_index(double v, Rounding mode) {
  switch (mode) {
    case Rounding::Floor:
      return static_cast<std::int64_t>(std::floor(v));
    case Rounding::Nearest:
    default:
      return static_cast<std::int64_t>(std::floor(v + 0.5));
  }
}

void check_grid(const Quantizer& q) {
  if (!(q.grid_deg > 0.0)) {
    throw std::invalid_argument("grid_deg must be positive");
  }
}

}  // namespace

GridNode snap(const Quantizer& q, const geo::GeoPoint& p) {
  check_grid(q);
  const geo::MercatorPoint m = geo::to_mercator(p);
  return GridNode{round_index(m.x / q.grid_deg, q.rounding),
                  round_index(m.y / q.grid_deg, q.rounding)};
}

geo::GeoPoint node_point(const Quantizer& q, const GridNode& n) {
  check_grid(q);
  return geo::from_mercator(geo::MercatorPoint{static_cast<double>(n.i) * q.grid_deg,
                                               static_cast<double>(n.j) * q.grid_deg});
}

double cell_size(const Quantizer& q, double lat_deg) {
  check_grid(q);
  if (!(std::abs(lat_deg) < geo::kMercatorMaxLat)) {
    throw geo::DomainError("latitude outside Mercator domain");
  }
  return geo::deg2rad(q.grid_deg) * geo::kEarthRadius *
         std::cos(geo::deg2rad(lat_deg));
}

double snapped_distance(const Quantizer& q, const geo::GeoPoint& a,
                        const geo::GeoPoint& b) {
  return geo::distance(node_point(q, snap(q, a)), node_point(q, snap(q, b)));
}

const std::vector<int>& default_classes() {
  static const std::vector<int> classes = {100,  500,  1000, 2000, 3000,
                                           4000, 5000, 6000, 7000, 8000,
                                           9000, 10000, 11000, 12000};
  return classes;
}

std::optional<int> classify(double d, bool contact, std::span<const int> classes,
                            double cutoff) {
  if (d < 0.0 || !std::isfinite(d)) {
    throw std::invalid_argument("distance must be finite and non-negative");
  }
  if (d > cutoff) return std::nullopt;
  std::optional<int> best;
  double best_diff = 0.0;
  for (int c : classes) {
    if (c == kContactClass && !contact) continue;
    const double diff = std::abs(d - static_cast<double>(c));
    if (!best || diff < best_diff || (diff == best_diff && c < *best)) {
      best = c;
      best_diff = diff;
    }
  }
  return best;
}

}  // namespace proxilab::service
