#include "proxilab/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace proxilab::geo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw DomainError(std::string(what) + " is not finite");
  }
}

}  // namespace

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

double normalize_lon(double lon) {
  double r = std::fmod(lon + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  r -= 180.0;
  // fmod can land exactly on +180 after the shift for inputs like -180 - 1e-17
  if (r >= 180.0) r -= 360.0;
  return r;
}

GeoPoint make_point(double lat, double lon) {
  require_finite(lat, "latitude");
  require_finite(lon, "longitude");
  if (lat < -90.0 || lat > 90.0) {
    throw DomainError("latitude out of range: " + std::to_string(lat));
  }
  return GeoPoint{lat, normalize_lon(lon)};
}

double distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dphi = phi2 - phi1;
  const double dlambda = deg2rad(normalize_lon(b.lon - a.lon));
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::min(1.0, std::max(0.0, h));
  return 2.0 * kEarthRadius * std::asin(std::sqrt(h));
}

double bearing(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = deg2rad(a.lat);
  const double phi2 = deg2rad(b.lat);
  const double dlambda = deg2rad(normalize_lon(b.lon - a.lon));
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  double deg = rad2deg(std::atan2(y, x));
  if (deg < 0.0) deg += 360.0;
  return deg >= 360.0 ? 0.0 : deg;
}

GeoPoint destination(const GeoPoint& p, double bearing_deg, double dist) {
  if (dist == 0.0) return p;
  const double delta = dist / kEarthRadius;
  const double theta = deg2rad(bearing_deg);
  const double phi1 = deg2rad(p.lat);
  const double lambda1 = deg2rad(p.lon);
  const double sin_phi2 = std::sin(phi1) * std::cos(delta) +
                          std::cos(phi1) * std::sin(delta) * std::cos(theta);
  const double phi2 = std::asin(std::min(1.0, std::max(-1.0, sin_phi2)));
  const double lambda2 =
      lambda1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                           std::cos(delta) - std::sin(phi1) * sin_phi2);
  return GeoPoint{rad2deg(phi2), normalize_lon(rad2deg(lambda2))};
}

MercatorPoint to_mercator(const GeoPoint& p) {
  if (!(std::abs(p.lat) < kMercatorMaxLat)) {
    throw DomainError("latitude outside Mercator domain: " +
                      std::to_string(p.lat));
  }
  const double phi = deg2rad(p.lat);
  return MercatorPoint{p.lon, rad2deg(std::asinh(std::tan(phi)))};
}

GeoPoint from_mercator(const MercatorPoint& m) {
  const double lat = rad2deg(std::atan(std::sinh(deg2rad(m.y))));
  if (!(std::abs(lat) < kMercatorMaxLat)) {
    throw DomainError("northing outside Mercator domain");
  }
  return GeoPoint{lat, normalize_lon(m.x)};
}

LocalXY to_local(const GeoPoint& anchor, const GeoPoint& p) {
  if (distance(anchor, p) > kLocalFrameRange) {
    throw RangeError("point farther than 50 km from local-frame anchor");
  }
  const double dlon = normalize_lon(p.lon - anchor.lon);
  const double dlat = p.lat - anchor.lat;
  return LocalXY{deg2rad(dlon) * kEarthRadius * std::cos(deg2rad(anchor.lat)),
                 deg2rad(dlat) * kEarthRadius, anchor};
}

GeoPoint from_local(const LocalXY& xy) {
  const double coslat = std::cos(deg2rad(xy.anchor.lat));
  if (coslat <= 0.0) {
    throw DomainError("local frame undefined at the poles");
  }
  const double dlat = rad2deg(xy.y / kEarthRadius);
  const double dlon = rad2deg(xy.x / (kEarthRadius * coslat));
  return make_point(xy.anchor.lat + dlat, xy.anchor.lon + dlon);
}

GeoPoint midpoint(const GeoPoint& a, const GeoPoint& b) {
  const LocalXY d = to_local(a, b);
  return from_local(LocalXY{d.x / 2.0, d.y / 2.0, a});
}

}  // namespace proxilab::geo
