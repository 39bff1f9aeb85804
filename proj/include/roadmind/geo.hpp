#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace roadmind {

// Shared by segment lengths and every distance query so the two agree.
inline constexpr double kEarthRadiusM = 6371000.0;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

/// WGS84 latitude/longitude in degrees.
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

struct BBox {
  double min_lat = 90.0;
  double max_lat = -90.0;
  double min_lon = 180.0;
  double max_lon = -180.0;

  bool empty() const { return min_lat > max_lat || min_lon > max_lon; }
  void extend(const GeoPoint& p);
  bool contains(const GeoPoint& p) const;
  GeoPoint center() const;
  /// Planar area estimate in km^2 at the box's mid latitude.
  double area_km2() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine_m(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from `from` to `to` in [0, 360), clockwise
/// from true north. Throws DegeneratePair when the points are equal.
double initial_bearing_deg(const GeoPoint& from, const GeoPoint& to);

enum class CompassDirection : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

inline constexpr std::array<CompassDirection, 8> kAllDirections = {
    CompassDirection::N, CompassDirection::NE, CompassDirection::E,
    CompassDirection::SE, CompassDirection::S, CompassDirection::SW,
    CompassDirection::W, CompassDirection::NW};

// 45-degree sectors centered on each direction. Lower bound inclusive,
// upper exclusive; N covers [337.5, 360) and [0, 22.5).
CompassDirection compass_of(double bearing_deg);

std::string_view to_string(CompassDirection d);
std::optional<CompassDirection> parse_direction(std::string_view token);
CompassDirection opposite(CompassDirection d);

inline std::size_t index_of(CompassDirection d) {
  return static_cast<std::size_t>(d);
}

/// Rounds a coordinate to `decimals` places; the result formats back to
/// exactly the same decimal string and parses back bit-identically.
double snap_coord(double value, int decimals);
GeoPoint snap(const GeoPoint& p, int decimals);

/// Fixed-point rendering with exactly `decimals` places, e.g. "-43.51030".
std::string format_coord(double value, int decimals);
/// "(lat, lon)" rendering used in every corpus and task text.
std::string format_point(const GeoPoint& p, int decimals);

}  // namespace roadmind
