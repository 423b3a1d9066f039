#include "proxilab/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <numbers>
#include <set>

namespace proxilab::analysis {

namespace {

LocalPoint to_point(const geo::LocalXY& xy) { return LocalPoint{xy.x, xy.y}; }

enum class Side { East, North, West, South, None };

Side crossing_side(const LocalTransition& t) {
  const double dx = t.outside.x - t.inside.x;
  const double dy = t.outside.y - t.inside.y;
  if (dx == 0.0 && dy == 0.0) return Side::None;
  if (std::abs(dx) >= std::abs(dy)) return dx > 0.0 ? Side::East : Side::West;
  return dy > 0.0 ? Side::North : Side::South;
}

double along_axis(const geo::GeoPoint& base, const geo::GeoPoint& p, Axis axis) {
  const geo::LocalXY xy = geo::to_local(base, p);
  return axis == Axis::X ? xy.x : xy.y;
}

}  // namespace

std::vector<LocalTransition> localize(const probe::TransitionSet& set,
                                      const geo::GeoPoint& anchor) {
  std::vector<LocalTransition> out;
  out.reserve(set.transitions.size());
  for (const auto& t : set.transitions) {
    LocalTransition lt;
    lt.inside = to_point(geo::to_local(anchor, t.inside));
    lt.outside = to_point(geo::to_local(anchor, t.outside));
    lt.mid = LocalPoint{(lt.inside.x + lt.outside.x) / 2.0, (lt.inside.y + lt.outside.y) / 2.0};
    lt.dir = t.dir;
    out.push_back(lt);
  }
  return out;
}

Rect bounding_box(std::span<const LocalTransition> ts) {
  if (ts.size() < 4) {
    throw InsufficientCoverage("need at least 4 transitions, got " + std::to_string(ts.size()));
  }
  std::set<Side> sides;
  for (const auto& t : ts) {
    if (const Side s = crossing_side(t); s != Side::None) sides.insert(s);
  }
  if (sides.size() < 3) {
    throw InsufficientCoverage("transitions cross fewer than 3 distinct sides");
  }
  Rect r{ts[0].mid.x, ts[0].mid.x, ts[0].mid.y, ts[0].mid.y};
  for (const auto& t : ts) {
    r.x_min = std::min(r.x_min, t.mid.x);
    r.x_max = std::max(r.x_max, t.mid.x);
    r.y_min = std::min(r.y_min, t.mid.y);
    r.y_max = std::max(r.y_max, t.mid.y);
  }
  return r;
}

LocalPoint centroid(const Rect& r) {
  return LocalPoint{(r.x_min + r.x_max) / 2.0, (r.y_min + r.y_max) / 2.0};
}

void EdgeOffsets::append(const EdgeOffsets& other) {
  right.insert(right.end(), other.right.begin(), other.right.end());
  left.insert(left.end(), other.left.begin(), other.left.end());
  top.insert(top.end(), other.top.begin(), other.top.end());
  bottom.insert(bottom.end(), other.bottom.begin(), other.bottom.end());
}

EdgeOffsets edge_offsets(const Rect& rect, const LocalPoint& target) {
  EdgeOffsets e;
  e.right.push_back(rect.x_max - target.x);
  e.left.push_back(target.x - rect.x_min);
  e.top.push_back(rect.y_max - target.y);
  e.bottom.push_back(target.y - rect.y_min);
  return e;
}

EdgeOffsets edge_offsets(const probe::TransitionSet& set, const geo::GeoPoint& true_target) {
  const auto lt = localize(set, true_target);
  return edge_offsets(bounding_box(lt));
}

Phasor phasor(const LocalPoint& true_target, const LocalPoint& centroid) {
  const double dx = true_target.x - centroid.x;
  const double dy = true_target.y - centroid.y;
  return Phasor{std::hypot(dx, dy), std::atan2(dy, dx)};
}

double max_localization_error(double l) {
  if (l < 0.0) throw std::invalid_argument("tile size must be non-negative");
  return l / 2.0 * std::numbers::sqrt2;
}

const char* to_string(Shape s) {
  switch (s) {
    case Shape::Square:
      return "square";
    case Shape::Cross:
      return "cross";
    case Shape::Unknown:
      return "unknown";
  }
  return "unknown";
}

Shape classify_shape(std::span<const LocalTransition> ts, std::optional<double> cell) {
  if (ts.size() < 20) return Shape::Unknown;
  Rect r;
  try {
    r = bounding_box(ts);
  } catch (const InsufficientCoverage&) {
    return Shape::Unknown;
  }
  const LocalPoint c = centroid(r);
  const double s = cell.value_or(std::min(r.width(), r.height()) / 3.0);
  const double notch = s / 3.0;

  std::array<int, 4> hits{};
  std::array<bool, 4> notched{};
  for (const auto& t : ts) {
    const double dx = t.mid.x - c.x;
    const double dy = t.mid.y - c.y;
    const int q = (dx >= 0.0 ? 0 : 1) + (dy >= 0.0 ? 0 : 2);
    ++hits[q];
    const double inset_x = r.width() / 2.0 - std::abs(dx);
    const double inset_y = r.height() / 2.0 - std::abs(dy);
    if (inset_x >= notch && inset_y >= notch) notched[q] = true;
  }
  if (std::any_of(hits.begin(), hits.end(), [](int h) { return h == 0; })) {
    return Shape::Unknown;
  }
  const auto n_notched = std::count(notched.begin(), notched.end(), true);
  if (n_notched == 0) return Shape::Square;
  if (n_notched >= 2) return Shape::Cross;
  return Shape::Unknown;
}

PrivacyReport make_report(const probe::TransitionSet& set, const geo::GeoPoint& anchor,
                          std::optional<double> tile_size) {
  const auto lt = localize(set, anchor);
  PrivacyReport rep;
  rep.rect = bounding_box(lt);
  rep.centroid = centroid(rep.rect);
  rep.shape = classify_shape(lt);
  rep.n_transitions = static_cast<int>(set.transitions.size());
  rep.n_queries = set.total_queries;
  if (tile_size) {
    rep.l = *tile_size;
  } else if (rep.shape == Shape::Square) {
    rep.l = (rep.rect.width() + rep.rect.height()) / 6.0;
  }
  if (rep.l) rep.D = max_localization_error(*rep.l);
  return rep;
}

TileEstimate estimate_tile_size(probe::Prober& prober, TargetPlacement& placement,
                                const std::string& target, const geo::GeoPoint& base,
                                double step, Axis axis, TileScanOptions opts) {
  if (!(step > 0.0) || step > 100.0) throw std::invalid_argument("step must be in (0, 100] m");
  if (opts.min_shifts < 2) throw std::invalid_argument("min_shifts must be >= 2");
  const double bearing = axis == Axis::X ? 90.0 : 0.0;
  const auto deploy_at = [&](double offset) {
    return geo::from_local(axis == Axis::X ? geo::LocalXY{offset, 0.0, base}
                                           : geo::LocalXY{0.0, offset, base});
  };

  TileEstimate est;
  const int used_before = prober.queries_used();
  placement.place(target, base);
  prober.set_position(base);
  if (prober.observe(base) != probe::kInnerClass) {
    throw probe::NotFound("target is not reported at 500 m from its own position");
  }
  auto locate = [&]() {
    const auto [in, out] = prober.probe_outward(bearing);
    return prober.bisect_boundary(in, out, probe::Direction::Out, bearing);
  };
  probe::Transition edge = locate();

  for (int k = 1; static_cast<double>(k) * step <= opts.max_span; ++k) {
    const double offset = static_cast<double>(k) * step;
    placement.place(target, deploy_at(offset));
    ++est.deployments;
    if (prober.observe(edge.outside) != probe::kInnerClass) continue;
    est.shift_offsets.push_back(offset);
    prober.set_position(edge.outside);
    edge = locate();
    est.boundary_offsets.push_back(along_axis(base, edge.midpoint(), axis));
    if (static_cast<int>(est.shift_offsets.size()) >= opts.min_shifts) break;
  }
  est.queries = prober.queries_used() - used_before;
  if (est.shift_offsets.size() < 2) {
    throw NoShiftObserved("fewer than two boundary shifts within the scanned span");
  }
  est.l = (est.shift_offsets.back() - est.shift_offsets.front()) /
          static_cast<double>(est.shift_offsets.size() - 1);
  return est;
}

std::vector<SweepRow> latitude_sweep(const ClientFactory& clients, TargetPlacement& placement,
                                     std::span<const Location> locations, double step,
                                     const probe::ProbeConfig& cfg, bool parallel) {
  auto run_one = [&](std::size_t i) {
    const Location& loc = locations[i];
    SweepRow row;
    row.name = loc.name;
    row.lat = loc.pos.lat;
    row.lon = loc.pos.lon;
    try {
      probe::ProbeConfig pc = cfg;
      pc.seed = cfg.seed + i;
      auto tile_client = clients("finder-tile-" + loc.name);
      probe::Prober tile_prober(*tile_client, loc.name, pc);
      const TileEstimate est =
          estimate_tile_size(tile_prober, placement, loc.name, loc.pos, step, Axis::X);
      row.l = est.l;
      row.D = max_localization_error(est.l);

      placement.place(loc.name, loc.pos);
      auto shape_client = clients("finder-shape-" + loc.name);
      probe::Prober shape_prober(*shape_client, loc.name, pc);
      const auto set = shape_prober.collect_transitions(loc.pos);
      row.shape = classify_shape(localize(set, loc.pos));
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    return row;
  };

  std::vector<SweepRow> rows;
  rows.reserve(locations.size());
  if (parallel) {
    std::vector<std::future<SweepRow>> futures;
    for (std::size_t i = 0; i < locations.size(); ++i) {
      futures.push_back(std::async(std::launch::async, run_one, i));
    }
    for (auto& f : futures) rows.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < locations.size(); ++i) rows.push_back(run_one(i));
  }
  return rows;
}

}  // namespace proxilab::analysis
