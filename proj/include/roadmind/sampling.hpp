#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "roadmind/geo.hpp"
#include "roadmind/road_graph.hpp"

namespace roadmind {

/// Mixes a base seed with a stream label and up to two integers into an
/// independent seed (SplitMix64 finalizer over an FNV-1a label hash).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream,
                          std::uint64_t a = 0, std::uint64_t b = 0);

/// mt19937_64 with portable conversions; the standard distributions are
/// implementation-defined, so they are avoided.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Largest-remainder apportionment of `total` over `weights` (integer
/// arithmetic). Remainder ties go to the lower index. Requires a positive
/// weight sum.
std::vector<std::uint64_t> largest_remainder(std::span<const std::uint64_t> weights,
                                             std::uint64_t total);

/// Uniform cell_km x cell_km grid laid over an AOI box. Cells on the
/// north/east edge are clipped to the box.
class DensityGrid {
 public:
  DensityGrid(const BBox& aoi, double cell_km);

  std::int64_t rows() const { return rows_; }
  std::int64_t cols() const { return cols_; }
  std::size_t size() const { return static_cast<std::size_t>(rows_ * cols_); }
  BBox cell_box(std::int64_t row, std::int64_t col) const;

  /// Row-major indices of the cells the polyline passes through, ascending.
  std::vector<std::uint32_t> cells_touched(std::span<const GeoPoint> polyline) const;

 private:
  BBox aoi_;
  double dlat_ = 0.0;
  double dlon_ = 0.0;
  std::int64_t rows_ = 1;
  std::int64_t cols_ = 1;
};

/// Density-aware sampling: `total_n` points apportioned over grid cells in
/// proportion to the number of segments touching each cell, drawn
/// uniformly inside each cell from a per-cell RNG stream. Output is in
/// row-major cell order. Throws EmptyNetwork.
std::vector<GeoPoint> density_sample(const RoadNetwork& net, std::uint64_t total_n,
                                     double cell_km, std::uint64_t seed);

struct PolylinePosition {
  GeoPoint point;
  std::size_t edge = 0;
};

/// Point at arc-length fraction `fraction` in [0, 1] along the polyline.
PolylinePosition interpolate_along(std::span<const GeoPoint> polyline, double fraction);

}  // namespace roadmind
