#pragma once

#include <stdexcept>

namespace proxilab::geo {

// Spherical earth, WGS-84 equatorial radius.
inline constexpr double kEarthRadius = 6378137.0;
// Web-Mercator projection domain (|lat| strictly below).
inline constexpr double kMercatorMaxLat = 85.06;
// Maximum anchor-to-point distance accepted by the local tangent frame.
inline constexpr double kLocalFrameRange = 50000.0;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Geodetic position in degrees; lon is kept in [-180, 180).
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

/// Validates latitude and wraps longitude. Throws DomainError for lat
/// outside [-90, 90] or non-finite input.
GeoPoint make_point(double lat, double lon);

double normalize_lon(double lon);

struct MercatorPoint {
  double x = 0.0;  // degrees, equals lon
  double y = 0.0;  // degrees-equivalent northing
};

/// Meters east (x) and north (y) of `anchor` in an equirectangular frame.
struct LocalXY {
  double x = 0.0;
  double y = 0.0;
  GeoPoint anchor;
};

double deg2rad(double deg);
double rad2deg(double rad);

/// Great-circle (haversine) distance in meters.
double distance(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from a to b, degrees in [0, 360).
double bearing(const GeoPoint& a, const GeoPoint& b);

/// Point reached after travelling `dist` meters from `p` along `bearing_deg`
/// (clockwise from north).
GeoPoint destination(const GeoPoint& p, double bearing_deg, double dist);

MercatorPoint to_mercator(const GeoPoint& p);
GeoPoint from_mercator(const MercatorPoint& m);

LocalXY to_local(const GeoPoint& anchor, const GeoPoint& p);
GeoPoint from_local(const LocalXY& xy);

/// Midpoint of the straight segment a-b in a frame anchored at a.
GeoPoint midpoint(const GeoPoint& a, const GeoPoint& b);

}  // namespace proxilab::geo
