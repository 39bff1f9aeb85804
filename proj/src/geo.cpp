#include "roadmind/geo.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "roadmind/error.hpp"

namespace roadmind {

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lon >= -180.0 && p.lon <= 180.0;
}

void BBox::extend(const GeoPoint& p) {
  min_lat = std::min(min_lat, p.lat);
  max_lat = std::max(max_lat, p.lat);
  min_lon = std::min(min_lon, p.lon);
  max_lon = std::max(max_lon, p.lon);
}

bool BBox::contains(const GeoPoint& p) const {
  return p.lat >= min_lat && p.lat <= max_lat && p.lon >= min_lon &&
         p.lon <= max_lon;
}

GeoPoint BBox::center() const {
  return {(min_lat + max_lat) / 2.0, (min_lon + max_lon) / 2.0};
}

double BBox::area_km2() const {
  if (empty()) return 0.0;
  const double km_per_deg = kEarthRadiusM * kDegToRad / 1000.0;
  const double height = (max_lat - min_lat) * km_per_deg;
  const double width =
      (max_lon - min_lon) * km_per_deg * std::cos(center().lat * kDegToRad);
  return height * width;
}

double haversine_m(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double sin_dphi = std::sin((phi2 - phi1) / 2.0);
  const double sin_dlambda = std::sin((b.lon - a.lon) * kDegToRad / 2.0);
  const double h = sin_dphi * sin_dphi +
                   std::cos(phi1) * std::cos(phi2) * sin_dlambda * sin_dlambda;
  // atan2 form stays well conditioned for near-antipodal pairs.
  return 2.0 * kEarthRadiusM *
         std::atan2(std::sqrt(h), std::sqrt(std::max(0.0, 1.0 - h)));
}

double initial_bearing_deg(const GeoPoint& from, const GeoPoint& to) {
  if (from == to) {
    throw Error(ErrorKind::DegeneratePair,
                "bearing is undefined for identical points");
  }
  const double phi1 = from.lat * kDegToRad;
  const double phi2 = to.lat * kDegToRad;
  const double dlambda = (to.lon - from.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  double deg = std::atan2(y, x) / kDegToRad;
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg = 0.0;  // -tiny + 360 rounds up to 360
  return deg;
}

CompassDirection compass_of(double bearing_deg) {
  // Boundaries 22.5 + 45k are exact in binary, so plain comparisons give
  // the half-open sectors without rounding surprises.
  if (bearing_deg < 22.5 || bearing_deg >= 337.5) return CompassDirection::N;
  double upper = 67.5;
  int idx = 1;
  while (bearing_deg >= upper) {
    upper += 45.0;
    ++idx;
  }
  return static_cast<CompassDirection>(idx);
}

std::string_view to_string(CompassDirection d) {
  static constexpr std::array<std::string_view, 8> names = {
      "N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[index_of(d)];
}

std::optional<CompassDirection> parse_direction(std::string_view token) {
  std::string upper;
  for (char c : token) {
    upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  for (auto d : kAllDirections) {
    if (upper == to_string(d)) return d;
  }
  return std::nullopt;
}

CompassDirection opposite(CompassDirection d) {
  return static_cast<CompassDirection>((index_of(d) + 4) % 8);
}

double snap_coord(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::nearbyint(value * scale) / scale;
}

GeoPoint snap(const GeoPoint& p, int decimals) {
  return {snap_coord(p.lat, decimals), snap_coord(p.lon, decimals)};
}

std::string format_coord(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  if (s.starts_with("-") && s.find_first_not_of("-0.") == std::string::npos) {
    s.erase(0, 1);  // no "-0.00000"
  }
  return s;
}

std::string format_point(const GeoPoint& p, int decimals) {
  return "(" + format_coord(p.lat, decimals) + ", " +
         format_coord(p.lon, decimals) + ")";
}

}  // namespace roadmind
