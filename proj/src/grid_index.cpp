#include "roadmind/grid_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace roadmind {
namespace {

constexpr double kMetersPerDegree = kEarthRadiusM * kDegToRad;

// Floating slack applied to every lower bound so rounding never makes it
// exceed the true distance.
constexpr double kBoundSlack = 1.0 - 1e-9;

// Smallest distance between two points whose longitudes differ by at least
// `dlon_deg` while both latitudes have magnitude <= `max_abs_lat_deg`.
double lon_gap_distance(double dlon_deg, double max_abs_lat_deg) {
  if (max_abs_lat_deg >= 90.0) return 0.0;
  const double half = std::min(dlon_deg * kDegToRad / 2.0, kPi / 2.0);
  const double s = std::cos(max_abs_lat_deg * kDegToRad) * std::sin(half);
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, s));
}

}  // namespace

SegmentGrid::SegmentGrid(std::uint32_t count, const GeometryFn& geometry_of, double cell_m)
    : cell_m_(cell_m) {
  for (std::uint32_t i = 0; i < count; ++i) {
    for (const auto& p : geometry_of(i)) extent_.extend(p);
  }
  if (extent_.empty()) return;

  cell_lat_deg_ = cell_m / kMetersPerDegree;
  const double cos_mid = std::max(std::cos(extent_.center().lat * kDegToRad), 1e-6);
  cell_lon_deg_ = cell_lat_deg_ / cos_mid;
  rows_ = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor((extent_.max_lat - extent_.min_lat) / cell_lat_deg_)) + 1);
  cols_ = std::max<std::int64_t>(
      1, static_cast<std::int64_t>(std::floor((extent_.max_lon - extent_.min_lon) / cell_lon_deg_)) + 1);

  auto clamp_row = [&](std::int64_t r) { return std::clamp<std::int64_t>(r, 0, rows_ - 1); };
  auto clamp_col = [&](std::int64_t c) { return std::clamp<std::int64_t>(c, 0, cols_ - 1); };

  std::vector<std::pair<std::uint32_t, std::uint32_t>> entries;  // (cell, id)
  for (std::uint32_t id = 0; id < count; ++id) {
    const auto geom = geometry_of(id);
    const std::size_t before = entries.size();
    for (std::size_t k = 0; k + 1 < geom.size() || (geom.size() == 1 && k == 0); ++k) {
      const GeoPoint& a = geom[k];
      const GeoPoint& b = geom.size() == 1 ? geom[k] : geom[k + 1];
      const auto ca = cell_of({std::min(a.lat, b.lat), std::min(a.lon, b.lon)});
      const auto cb = cell_of({std::max(a.lat, b.lat), std::max(a.lon, b.lon)});
      for (auto r = clamp_row(ca.row); r <= clamp_row(cb.row); ++r) {
        for (auto c = clamp_col(ca.col); c <= clamp_col(cb.col); ++c) {
          entries.emplace_back(static_cast<std::uint32_t>(r * cols_ + c), id);
        }
      }
    }
    std::sort(entries.begin() + static_cast<std::ptrdiff_t>(before), entries.end());
    entries.erase(std::unique(entries.begin() + static_cast<std::ptrdiff_t>(before), entries.end()),
                  entries.end());
  }
  std::sort(entries.begin(), entries.end());

  offsets_.assign(static_cast<std::size_t>(rows_ * cols_) + 1, 0);
  for (const auto& [cell, id] : entries) ++offsets_[cell + 1];
  for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];
  ids_.reserve(entries.size());
  for (const auto& [cell, id] : entries) ids_.push_back(id);
}

SegmentGrid::Cell SegmentGrid::cell_of(const GeoPoint& p) const {
  return {static_cast<std::int64_t>(std::floor((p.lat - extent_.min_lat) / cell_lat_deg_)),
          static_cast<std::int64_t>(std::floor((p.lon - extent_.min_lon) / cell_lon_deg_))};
}

std::span<const std::uint32_t> SegmentGrid::ids_in(std::int64_t row, std::int64_t col) const {
  if (row < 0 || col < 0 || row >= rows_ || col >= cols_) return {};
  const auto cell = static_cast<std::size_t>(row * cols_ + col);
  return std::span<const std::uint32_t>(ids_).subspan(offsets_[cell], offsets_[cell + 1] - offsets_[cell]);
}

bool SegmentGrid::block_covers_grid(std::int64_t row_lo, std::int64_t row_hi,
                                    std::int64_t col_lo, std::int64_t col_hi) const {
  return row_lo <= 0 && col_lo <= 0 && row_hi >= rows_ - 1 && col_hi >= cols_ - 1;
}

double SegmentGrid::distance_outside_block(const GeoPoint& p, std::int64_t row_lo,
                                           std::int64_t row_hi, std::int64_t col_lo,
                                           std::int64_t col_hi) const {
  // Every id outside the block lives in cells whose boxes are outside it,
  // and those boxes bound the geometry. Clamped edge cells also hold
  // geometry beyond the grid extent, so only interior block edges count.
  const double lat_lo = extent_.min_lat + static_cast<double>(row_lo) * cell_lat_deg_;
  const double lat_hi = extent_.min_lat + static_cast<double>(row_hi + 1) * cell_lat_deg_;
  const double lon_lo = extent_.min_lon + static_cast<double>(col_lo) * cell_lon_deg_;
  const double lon_hi = extent_.min_lon + static_cast<double>(col_hi + 1) * cell_lon_deg_;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double gap_lat = std::min(row_lo > 0 ? p.lat - lat_lo : kInf,
                                  row_hi < rows_ - 1 ? lat_hi - p.lat : kInf);
  const double gap_lon = std::min(col_lo > 0 ? p.lon - lon_lo : kInf,
                                  col_hi < cols_ - 1 ? lon_hi - p.lon : kInf);

  double bound = kInf;
  if (std::isfinite(gap_lat)) bound = std::max(0.0, gap_lat) * kMetersPerDegree;
  if (std::isfinite(gap_lon)) {
    // Points escaping through the lon edges have |dlat| < gap_lat.
    // Geometry never leaves the grid extent's latitude band either.
    double max_lat = std::max(std::abs(extent_.min_lat), std::abs(extent_.max_lat));
    if (std::isfinite(gap_lat)) max_lat = std::min(max_lat, std::abs(p.lat) + std::max(0.0, gap_lat));
    bound = std::min(bound, lon_gap_distance(std::max(0.0, gap_lon), max_lat));
  }
  return bound * kBoundSlack;
}

std::vector<std::uint32_t> SegmentGrid::ids_overlapping(const BBox& box) const {
  std::vector<std::uint32_t> out;
  if (empty() || box.empty()) return out;
  const auto lo = cell_of({box.min_lat, box.min_lon});
  const auto hi = cell_of({box.max_lat, box.max_lon});
  for (auto r = std::max<std::int64_t>(0, lo.row); r <= std::min(rows_ - 1, hi.row); ++r) {
    for (auto c = std::max<std::int64_t>(0, lo.col); c <= std::min(cols_ - 1, hi.col); ++c) {
      const auto ids = ids_in(r, c);
      out.insert(out.end(), ids.begin(), ids.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BBox radius_bbox(const GeoPoint& p, double radius_m) {
  const double dlat = radius_m / kMetersPerDegree / kBoundSlack;
  BBox box;
  box.min_lat = std::max(-90.0, p.lat - dlat);
  box.max_lat = std::min(90.0, p.lat + dlat);
  const double max_abs_lat = std::abs(p.lat) + dlat;
  if (max_abs_lat >= 90.0) {
    box.min_lon = -180.0;
    box.max_lon = 180.0;
    return box;
  }
  // Invert lon_gap_distance: d = 2R asin(cos(phi) sin(dlon/2)).
  const double s = std::sin(std::min(radius_m / (2.0 * kEarthRadiusM), kPi / 2.0)) /
                   std::cos(max_abs_lat * kDegToRad);
  const double dlon = s >= 1.0 ? 180.0 : 2.0 * std::asin(s) / kDegToRad / kBoundSlack;
  box.min_lon = std::max(-180.0, p.lon - dlon);
  box.max_lon = std::min(180.0, p.lon + dlon);
  return box;
}

}  // namespace roadmind
