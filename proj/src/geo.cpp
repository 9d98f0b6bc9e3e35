#include "aeronet/geo.hpp"

#include <cmath>

namespace aeronet {

namespace {
constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
}

EnuVec enu_offset(const GeoPoint& from, const GeoPoint& to) {
  EnuVec v;
  v.north = (to.latitude - from.latitude) * kDegToRad * kEarthRadiusM;
  v.east = (to.longitude - from.longitude) * kDegToRad * kEarthRadiusM *
           std::cos(from.latitude * kDegToRad);
  v.up = to.altitude - from.altitude;
  return v;
}

GeoPoint enu_apply(const GeoPoint& from, const EnuVec& offset) {
  GeoPoint p = from;
  p.latitude += offset.north / (kDegToRad * kEarthRadiusM);
  p.longitude += offset.east / (kDegToRad * kEarthRadiusM * std::cos(from.latitude * kDegToRad));
  p.altitude += offset.up;
  return p;
}

double enu_norm(const EnuVec& v) {
  return std::sqrt(v.east * v.east + v.north * v.north + v.up * v.up);
}

double enu_horizontal(const EnuVec& v) { return std::hypot(v.east, v.north); }

double distance_m(const GeoPoint& a, const GeoPoint& b) { return enu_norm(enu_offset(a, b)); }

double horizontal_distance_m(const GeoPoint& a, const GeoPoint& b) {
  return enu_horizontal(enu_offset(a, b));
}

}  // namespace aeronet
