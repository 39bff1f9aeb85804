#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "roadmind/geo.hpp"

namespace roadmind {

/// Uniform lat/lon cell grid mapping cells to the ids of polylines whose
/// edges' bounding boxes overlap them. Iteration order inside a cell is
/// ascending id, so every query built on it is deterministic.
class SegmentGrid {
 public:
  struct Cell {
    std::int64_t row = 0;
    std::int64_t col = 0;
  };

  using GeometryFn = std::function<std::span<const GeoPoint>(std::uint32_t)>;

  SegmentGrid() = default;
  SegmentGrid(std::uint32_t count, const GeometryFn& geometry_of, double cell_m);

  bool empty() const { return rows_ == 0; }
  double cell_m() const { return cell_m_; }
  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  const BBox& extent() const { return extent_; }

  /// Cell containing `p`; may lie outside [0, rows) x [0, cols).
  Cell cell_of(const GeoPoint& p) const;
  std::span<const std::uint32_t> ids_in(std::int64_t row, std::int64_t col) const;

  /// Lower bound on the haversine distance from `p` to any point outside the
  /// block of cells [row_lo, row_hi] x [col_lo, col_hi] (p's cell inside it).
  double distance_outside_block(const GeoPoint& p, std::int64_t row_lo,
                                std::int64_t row_hi, std::int64_t col_lo,
                                std::int64_t col_hi) const;
  bool block_covers_grid(std::int64_t row_lo, std::int64_t row_hi,
                         std::int64_t col_lo, std::int64_t col_hi) const;

  /// Sorted unique ids registered in any cell overlapping `box`.
  std::vector<std::uint32_t> ids_overlapping(const BBox& box) const;

 private:
  double cell_m_ = 0.0;
  BBox extent_;
  double cell_lat_deg_ = 0.0;
  double cell_lon_deg_ = 0.0;
  std::int64_t rows_ = 0;
  std::int64_t cols_ = 0;
  std::vector<std::uint32_t> offsets_;  // CSR, rows_*cols_ + 1 entries
  std::vector<std::uint32_t> ids_;
};

/// Bounding box guaranteed to contain every point within `radius_m` of `p`.
BBox radius_bbox(const GeoPoint& p, double radius_m);

}  // namespace roadmind
