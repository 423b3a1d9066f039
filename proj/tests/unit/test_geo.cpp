#include <doctest.h>

#include <cmath>
#include <numbers>

#include "proxilab/geo.hpp"
#include "proxilab/rng.hpp"

using namespace proxilab;
using namespace proxilab::geo;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double R = 6378137.0;

// Arc length of `deg` degrees on a parallel at `lat`.
double arc(double deg, double lat = 0.0) { return deg * kPi / 180.0 * R * std::cos(lat * kPi / 180.0); }

}  // namespace

TEST_CASE("haversine distance") {
  CHECK(distance({0, 0}, {0, 0}) == 0.0);
  CHECK(distance({0, 0}, {0, 0.005}) == doctest::Approx(arc(0.005)).epsilon(1e-9));
  CHECK(distance({0, 0}, {0, 0.005}) == doctest::Approx(556.6).epsilon(0.1 / 556.6));
  // Along a parallel the great-circle is marginally shorter than the arc.
  CHECK(distance({60, 0}, {60, 0.005}) == doctest::Approx(278.3).epsilon(0.1 / 278.3));
  CHECK(distance({10, 20}, {-5, 40}) == doctest::Approx(distance({-5, 40}, {10, 20})));
}

TEST_CASE("mercator projection") {
  const auto origin = to_mercator({0, 0});
  CHECK(origin.x == 0.0);
  CHECK(origin.y == 0.0);
  const double y60 = 180.0 / kPi * std::log(std::tan(kPi / 4 + 60.0 * kPi / 360.0));
  CHECK(to_mercator({60, 0}).y == doctest::Approx(y60).epsilon(1e-12));
  CHECK(to_mercator({60, 0}).y == doctest::Approx(75.456).epsilon(5e-4 / 75.456));
  CHECK_THROWS_AS(to_mercator({85.1, 0}), DomainError);
  CHECK_THROWS_AS(to_mercator({-85.1, 0}), DomainError);

  for (double lat : {-80.0, -33.3, 0.0, 12.5, 47.0, 71.3}) {
    const auto back = from_mercator(to_mercator({lat, 17.0}));
    CHECK(back.lat == doctest::Approx(lat).epsilon(1e-12));
    CHECK(back.lon == doctest::Approx(17.0));
  }
}

TEST_CASE("local tangent frame") {
  const GeoPoint a{43.2, 2.34};
  const auto same = to_local(a, a);
  CHECK(same.x == 0.0);
  CHECK(same.y == 0.0);

  const auto east = to_local({0, 0}, {0, 0.005});
  CHECK(east.x == doctest::Approx(556.6).epsilon(0.1 / 556.6));
  CHECK(east.y == doctest::Approx(0.0));

  const auto north = from_local(LocalXY{0, 556.6, {0, 0}});
  CHECK(north.lat == doctest::Approx(0.005).epsilon(1e-6 / 0.005));
  CHECK(north.lon == doctest::Approx(0.0));

  CHECK_THROWS_AS(to_local({0, 0}, {1, 0}), RangeError);
}

TEST_CASE("destination") {
  const GeoPoint p{25.26174, 51.359269};
  CHECK(destination(p, 123.0, 0.0) == p);
  const auto e = destination({0, 0}, 90.0, 556.6);
  CHECK(e.lat == doctest::Approx(0.0));
  CHECK(e.lon == doctest::Approx(0.005).epsilon(1e-6 / 0.005));
  const auto n = destination({0, 0}, 0.0, 556.6);
  CHECK(n.lat == doctest::Approx(0.005).epsilon(1e-6 / 0.005));
  CHECK(n.lon == doctest::Approx(0.0));
}

TEST_CASE("longitude normalization") {
  CHECK(normalize_lon(180.0) == doctest::Approx(-180.0));
  CHECK(normalize_lon(190.0) == doctest::Approx(-170.0));
  CHECK(normalize_lon(-190.0) == doctest::Approx(170.0));
  CHECK_THROWS(make_point(91.0, 0.0));
  CHECK_THROWS(make_point(NAN, 0.0));
}

TEST_CASE("property: triangle inequality and symmetry") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    const GeoPoint b{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    const GeoPoint c{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    CHECK(distance(a, b) == doctest::Approx(distance(b, a)));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-6);
  }
}

TEST_CASE("property: destination lands at the requested distance") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint p{rng.uniform(-80, 80), rng.uniform(-180, 180)};
    const double d = rng.uniform(1.0, 20000.0);
    const double b = rng.uniform(0.0, 360.0);
    const GeoPoint q = destination(p, b, d);
    CHECK(std::abs(distance(p, q) - d) <= 1e-3 * d);
  }
}

TEST_CASE("property: local frame round trip within 10 km") {
  Rng rng(13);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint anchor{rng.uniform(-70, 70), rng.uniform(-180, 180)};
    const GeoPoint p = destination(anchor, rng.uniform(0, 360), rng.uniform(0, 10000));
    const GeoPoint back = from_local(to_local(anchor, p));
    CHECK(distance(p, back) < 1e-6);
  }
}

TEST_CASE("rng streams are reproducible") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng c(42);
  const double u = c.uniform();
  CHECK(u >= 0.0);
  CHECK(u < 1.0);
  // mt19937_64 is fully specified: its first output for seed 5489 is fixed.
  Rng d(5489);
  CHECK(d.next() == 14514284786278117030ULL);
}
