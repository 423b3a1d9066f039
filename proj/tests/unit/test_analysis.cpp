#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "proxilab/analysis.hpp"
#include "proxilab/rng.hpp"
#include "proxilab/service.hpp"

using namespace proxilab;
using namespace proxilab::analysis;

namespace {

constexpr double kPi = std::numbers::pi;

double oracle_cell(double lat) { return 0.005 * kPi / 180.0 * 6378137.0 * std::cos(lat * kPi / 180.0); }

// A transition whose straddle is centered on local point (x, y) and points
// away from the origin.
probe::Transition synthetic(double x, double y, const geo::GeoPoint& anchor = {0, 0}) {
  probe::Transition t;
  t.inside = geo::from_local({x * 0.995, y * 0.995, anchor});
  t.outside = geo::from_local({x * 1.005, y * 1.005, anchor});
  return t;
}

probe::TransitionSet set_of(std::initializer_list<std::pair<double, double>> pts) {
  probe::TransitionSet s;
  s.target = "t";
  for (auto [x, y] : pts) s.transitions.push_back(synthetic(x, y));
  return s;
}

probe::TransitionSet simulate(const geo::GeoPoint& target, std::uint64_t seed = 1) {
  service::Service svc;
  svc.place_target("t", target);
  wire::LocalClient client(svc, "f");
  probe::ProbeConfig cfg;
  cfg.seed = seed;
  probe::Prober p(client, "t", cfg);
  return p.collect_transitions(target);
}

TileEstimate tile(const geo::GeoPoint& base, double step, Axis axis = Axis::X) {
  service::Service svc;
  ServicePlacement placement(svc);
  placement.place("t", base);
  wire::LocalClient client(svc, "f");
  probe::Prober p(client, "t", {});
  return estimate_tile_size(p, placement, "t", base, step, axis);
}

}  // namespace

TEST_CASE("bounding box and centroid") {
  const auto lt = localize(set_of({{800, 0}, {-800, 0}, {0, 800}, {0, -800}}), {0, 0});
  const Rect r = bounding_box(lt);
  CHECK(r.x_min == doctest::Approx(-800));
  CHECK(r.x_max == doctest::Approx(800));
  CHECK(r.y_min == doctest::Approx(-800));
  CHECK(r.y_max == doctest::Approx(800));
  CHECK(centroid(r).x == doctest::Approx(0.0));
  CHECK(centroid(r).y == doctest::Approx(0.0));

  const LocalPoint c = centroid(Rect{0, 1000, 0, 500});
  CHECK(c.x == 500);
  CHECK(c.y == 250);

  const auto collinear = localize(set_of({{100, 0}, {200, 0}, {300, 0}}), {0, 0});
  CHECK_THROWS_AS(bounding_box(collinear), InsufficientCoverage);
  const auto two_sides = localize(set_of({{800, 0}, {-800, 0}, {800, 10}, {-800, 10}}), {0, 0});
  CHECK_THROWS_AS(bounding_box(two_sides), InsufficientCoverage);
}

TEST_CASE("edge offsets and phasor") {
  const EdgeOffsets on_edge = edge_offsets(Rect{-100, 0, -50, 50}, {0, 0});
  CHECK(on_edge.right.front() == 0.0);
  CHECK(on_edge.left.front() == 100.0);

  const Phasor zero = phasor({0, 0}, {0, 0});
  CHECK(zero.rho == 0.0);
  CHECK(zero.phase == 0.0);
  const Phasor p = phasor({3, 4}, {0, 0});
  CHECK(p.rho == doctest::Approx(5.0));
  CHECK(p.phase == doctest::Approx(std::atan2(4.0, 3.0)));
}

TEST_CASE("max localization error") {
  CHECK(max_localization_error(500) == doctest::Approx(353.55).epsilon(0.005 / 353.55));
  CHECK(max_localization_error(400) == doctest::Approx(282.84).epsilon(0.005 / 282.84));
  CHECK(max_localization_error(0) == 0.0);
  CHECK_THROWS(max_localization_error(-1));
}

TEST_CASE("simulator run at the equator") {
  const auto set = simulate({0, 0});
  REQUIRE(set.transitions.size() >= 30);
  const auto lt = localize(set, {0, 0});
  const Rect r = bounding_box(lt);
  const double edge = 1.5 * oracle_cell(0.0);
  CHECK(std::abs(r.x_max - edge) <= 10.0);
  CHECK(std::abs(r.x_min + edge) <= 10.0);
  CHECK(std::abs(r.y_max - edge) <= 10.0);
  CHECK(std::abs(r.y_min + edge) <= 10.0);
  const LocalPoint c = centroid(r);
  CHECK(std::hypot(c.x, c.y) <= 15.0);
  CHECK(classify_shape(lt) == Shape::Cross);
}

TEST_CASE("centroid tracks the snapped node, not the target") {
  const service::Quantizer q;
  const geo::GeoPoint target{23.001, 10.0017};
  const geo::GeoPoint node = service::node_point(q, service::snap(q, target));
  const auto lt = localize(simulate(target), node);
  const LocalPoint c = centroid(bounding_box(lt));
  CHECK(std::hypot(c.x, c.y) <= 15.0);
}

TEST_CASE("shape classification") {
  const auto four = localize(set_of({{800, 0}, {-800, 0}, {0, 800}, {0, -800}}), {0, 0});
  CHECK(classify_shape(four) == Shape::Unknown);
  CHECK(classify_shape(localize(simulate({40, 10}), {40, 10})) == Shape::Square);
  CHECK(classify_shape(localize(simulate({5, 10}), {5, 10})) == Shape::Cross);
}

TEST_CASE("report") {
  const auto set = simulate({30, 10});
  const PrivacyReport rep = make_report(set, {30, 10});
  CHECK(rep.shape == Shape::Square);
  REQUIRE(rep.l.has_value());
  CHECK(*rep.l == doctest::Approx(oracle_cell(30)).epsilon(10.0 / oracle_cell(30)));
  CHECK(*rep.D == doctest::Approx(max_localization_error(*rep.l)));
  CHECK(rep.n_transitions == static_cast<int>(set.transitions.size()));

  const PrivacyReport given = make_report(set, {30, 10}, 500.0);
  CHECK(*given.D == doctest::Approx(353.553).epsilon(1e-5));
}

TEST_CASE("tile size estimation") {
  const TileEstimate eq = tile({0, 0}, 10);
  CHECK(std::abs(eq.l - 556.6) <= 15.0);
  CHECK(eq.shift_offsets.size() == 4);
  const TileEstimate north = tile({0, 0}, 10, Axis::Y);
  CHECK(std::abs(north.l - 556.6) <= 15.0);

  const TileEstimate polar = tile({71.3, 10}, 10);
  CHECK(std::abs(polar.l - 178.4) <= 15.0);

  // The coarse 100 m scan quantizes l to multiples of 100/3.
  const TileEstimate kourou = tile({5.154237, -52.648526}, 100);
  CHECK(kourou.l >= 400.0);
  CHECK(kourou.l <= 560.0);

  CHECK_THROWS(tile({0, 0}, 150));
}

TEST_CASE("latitude sweep") {
  service::Service svc;
  ServicePlacement placement(svc);
  const std::vector<Location> one{{"Doha", {25.26174, 51.359269}}};
  svc.place_target("Doha", one[0].pos);
  const ClientFactory clients = [&](const std::string& acct) {
    return std::make_unique<wire::LocalClient>(svc, acct);
  };
  const auto rows = latitude_sweep(clients, placement, one, 10, {});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error.empty());
  REQUIRE(rows[0].D.has_value());
  const double oracle = oracle_cell(25.26174) * std::sqrt(2.0) / 2.0;
  CHECK(std::abs(*rows[0].D - 356.0) <= 15.0);
  CHECK(std::abs(*rows[0].D - oracle) <= 15.0);
  CHECK(rows[0].shape == Shape::Square);
}

TEST_CASE("property: bounding box is permutation invariant and monotone") {
  const auto set = simulate({12, 34});
  auto lt = localize(set, {12, 34});
  const Rect full = bounding_box(lt);
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    for (std::size_t k = lt.size() - 1; k > 0; --k) std::swap(lt[k], lt[rng.next() % (k + 1)]);
    const Rect r = bounding_box(lt);
    CHECK(r.x_min == full.x_min);
    CHECK(r.x_max == full.x_max);
    CHECK(r.y_min == full.y_min);
    CHECK(r.y_max == full.y_max);
  }
  std::vector<LocalTransition> grow;
  std::optional<Rect> prev;
  for (const auto& t : lt) {
    grow.push_back(t);
    Rect r;
    try {
      r = bounding_box(grow);
    } catch (const InsufficientCoverage&) {
      continue;
    }
    if (prev) {
      CHECK(r.x_min <= prev->x_min);
      CHECK(r.x_max >= prev->x_max);
      CHECK(r.y_min <= prev->y_min);
      CHECK(r.y_max >= prev->y_max);
    }
    prev = r;
  }
}

TEST_CASE("property: square/cross flips exactly once between 0 and 45 degrees") {
  std::vector<Shape> shapes;
  for (double lat = 0.0; lat <= 45.0; lat += 1.5) {
    const geo::GeoPoint base{lat, 10.0};
    const Shape s = classify_shape(localize(simulate(base), base));
    CAPTURE(lat);
    CHECK(s != Shape::Unknown);
    shapes.push_back(s);
  }
  int flips = 0;
  for (std::size_t k = 1; k < shapes.size(); ++k) flips += shapes[k] != shapes[k - 1];
  CHECK(flips == 1);
  CHECK(shapes.front() == Shape::Cross);
  CHECK(shapes.back() == Shape::Square);
}
