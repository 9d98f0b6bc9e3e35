// Geodetic points and the local equirectangular ENU approximation used by
// the motion model and the channel (valid in the small-angle regime, a few
// kilometers).
#pragma once

namespace aeronet {

struct GeoPoint {
  double latitude = 0.0;   // degrees
  double longitude = 0.0;  // degrees
  double altitude = 0.0;   // meters above ground

  bool operator==(const GeoPoint&) const = default;
};

struct EnuVec {
  double east = 0.0;   // meters
  double north = 0.0;  // meters
  double up = 0.0;     // meters
};

constexpr double kEarthRadiusM = 6371000.0;

// Local offset from `from` to `to`: north = dlat*(pi/180)*R,
// east = dlon*(pi/180)*R*cos(lat_from), up = dalt.
EnuVec enu_offset(const GeoPoint& from, const GeoPoint& to);

// Inverse of enu_offset at the same reference point.
GeoPoint enu_apply(const GeoPoint& from, const EnuVec& offset);

double enu_norm(const EnuVec& v);
double enu_horizontal(const EnuVec& v);
double distance_m(const GeoPoint& a, const GeoPoint& b);
double horizontal_distance_m(const GeoPoint& a, const GeoPoint& b);

}  // namespace aeronet
