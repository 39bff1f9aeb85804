#include "roadmind/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "roadmind/error.hpp"
#include "roadmind/kernels.hpp"

namespace roadmind {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Liang-Barsky: does segment a-b touch the closed box?
bool segment_touches(const GeoPoint& a, const GeoPoint& b, const BBox& box) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = b.lon - a.lon;
  const double dy = b.lat - a.lat;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {a.lon - box.min_lon, box.max_lon - a.lon, a.lat - box.min_lat,
                       box.max_lat - a.lat};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, t);
    } else {
      t1 = std::min(t1, t);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix(splitmix(splitmix(splitmix(seed) ^ h) ^ a) ^ b);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = 0;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::vector<std::uint64_t> largest_remainder(std::span<const std::uint64_t> weights,
                                             std::uint64_t total) {
  const std::uint64_t sum = std::accumulate(weights.begin(), weights.end(), std::uint64_t{0});
  if (sum == 0) throw Error(ErrorKind::InvalidArgument, "largest_remainder: zero weight sum");
  std::vector<std::uint64_t> counts(weights.size());
  std::vector<std::pair<u128, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const u128 scaled = static_cast<u128>(total) * weights[i];
    counts[i] = static_cast<std::uint64_t>(scaled / sum);
    assigned += counts[i];
    remainders.emplace_back(scaled % sum, i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::uint64_t i = 0; assigned < total; ++i, ++assigned) ++counts[remainders[i].second];
  return counts;
}

DensityGrid::DensityGrid(const BBox& aoi, double cell_km) : aoi_(aoi) {
  if (aoi.empty() || !(cell_km > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "density grid needs a non-empty AOI and positive cell size");
  }
  dlat_ = cell_km * 1000.0 / (kEarthRadiusM * kDegToRad);
  dlon_ = dlat_ / std::max(std::cos(aoi.center().lat * kDegToRad), 1e-6);
  rows_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((aoi.max_lat - aoi.min_lat) / dlat_)));
  cols_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil((aoi.max_lon - aoi.min_lon) / dlon_)));
}

BBox DensityGrid::cell_box(std::int64_t row, std::int64_t col) const {
  BBox b;
  b.min_lat = aoi_.min_lat + static_cast<double>(row) * dlat_;
  b.max_lat = row + 1 == rows_ ? aoi_.max_lat : aoi_.min_lat + static_cast<double>(row + 1) * dlat_;
  b.min_lon = aoi_.min_lon + static_cast<double>(col) * dlon_;
  b.max_lon = col + 1 == cols_ ? aoi_.max_lon : aoi_.min_lon + static_cast<double>(col + 1) * dlon_;
  return b;
}

std::vector<std::uint32_t> DensityGrid::cells_touched(std::span<const GeoPoint> polyline) const {
  std::vector<std::uint32_t> cells;
  auto row_of = [&](double lat) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((lat - aoi_.min_lat) / dlat_)), 0, rows_ - 1);
  };
  auto col_of = [&](double lon) {
    return std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor((lon - aoi_.min_lon) / dlon_)), 0, cols_ - 1);
  };
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    const GeoPoint& a = polyline[i];
    const GeoPoint& b = polyline[i + 1];
    // Neighbouring rows/cols are included so boundary-touching edges are
    // tested against both cells.
    const auto r0 = std::max<std::int64_t>(0, row_of(std::min(a.lat, b.lat)) - 1);
    const auto r1 = std::min(rows_ - 1, row_of(std::max(a.lat, b.lat)) + 1);
    const auto c0 = std::max<std::int64_t>(0, col_of(std::min(a.lon, b.lon)) - 1);
    const auto c1 = std::min(cols_ - 1, col_of(std::max(a.lon, b.lon)) + 1);
    for (auto r = r0; r <= r1; ++r) {
      for (auto c = c0; c <= c1; ++c) {
        if (segment_touches(a, b, cell_box(r, c))) cells.push_back(static_cast<std::uint32_t>(r * cols_ + c));
      }
    }
  }
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
  return cells;
}

std::vector<GeoPoint> density_sample(const RoadNetwork& net, std::uint64_t total_n, double cell_km,
                                     std::uint64_t seed) {
  if (net.segments.empty()) throw Error(ErrorKind::EmptyNetwork, "cannot sample an empty network");
  if (total_n == 0) throw Error(ErrorKind::InvalidArgument, "density_sample needs total_n >= 1");
  const DensityGrid grid(net.aoi_bbox, cell_km);
  const auto weights = kernels::omp::cell_weights(net, grid);
  if (std::all_of(weights.begin(), weights.end(), [](auto w) { return w == 0; })) {
    throw Error(ErrorKind::EmptyNetwork, "no segment intersects the AOI");
  }
  const auto counts = largest_remainder(weights, total_n);

  std::vector<GeoPoint> points;
  points.reserve(total_n);
  for (std::int64_t r = 0; r < grid.rows(); ++r) {
    for (std::int64_t c = 0; c < grid.cols(); ++c) {
      const auto n = counts[static_cast<std::size_t>(r * grid.cols() + c)];
      if (n == 0) continue;
      const BBox box = grid.cell_box(r, c);
      Rng rng(derive_seed(seed, "density-cell", static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)));
      for (std::uint64_t i = 0; i < n; ++i) {
        const double lat = rng.uniform(box.min_lat, box.max_lat);
        const double lon = rng.uniform(box.min_lon, box.max_lon);
        points.push_back({lat, lon});
      }
    }
  }
  return points;
}

PolylinePosition interpolate_along(std::span<const GeoPoint> polyline, double fraction) {
  if (polyline.empty()) throw Error(ErrorKind::InvalidArgument, "empty polyline");
  if (polyline.size() == 1 || fraction <= 0.0) return {polyline.front(), 0};
  std::vector<double> lengths(polyline.size() - 1);
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) lengths[i] = haversine_m(polyline[i], polyline[i + 1]);
  const double total = std::accumulate(lengths.begin(), lengths.end(), 0.0);
  if (fraction >= 1.0 || total <= 0.0) return {polyline.back(), polyline.size() - 2};
  double target = fraction * total;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (target <= lengths[i] || i + 1 == lengths.size()) {
      const double t = lengths[i] > 0.0 ? std::clamp(target / lengths[i], 0.0, 1.0) : 0.0;
      const GeoPoint& a = polyline[i];
      const GeoPoint& b = polyline[i + 1];
      return {{a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)}, i};
    }
    target -= lengths[i];
  }
  return {polyline.back(), lengths.size() - 1};
}

}  // namespace roadmind
