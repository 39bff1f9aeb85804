#pragma once

// Batch query kernels. Every kernel exists twice with the same signature:
// a plain serial loop kept as the reference, and an OpenMP version used by
// the generators. Results are written by query index, so both produce
// identical output for any thread count.

#include <cstdint>
#include <span>
#include <vector>

#include "roadmind/geo.hpp"
#include "roadmind/road_graph.hpp"
#include "roadmind/sampling.hpp"
#include "roadmind/spatial.hpp"

namespace roadmind::kernels {

namespace serial {

std::vector<std::vector<RankedRoad>> nearest_roads_batch(const RoadNetwork& net,
                                                         std::span<const GeoPoint> queries,
                                                         std::size_t k);

std::vector<DirectionalRanking> directional_batch(const RoadNetwork& net,
                                                  std::span<const GeoPoint> queries,
                                                  double radius_m, std::size_t k);

/// Number of segments touching each density-grid cell (row-major).
std::vector<std::uint64_t> cell_weights(const RoadNetwork& net, const DensityGrid& grid);

}  // namespace serial

namespace omp {

std::vector<std::vector<RankedRoad>> nearest_roads_batch(const RoadNetwork& net,
                                                         std::span<const GeoPoint> queries,
                                                         std::size_t k);

std::vector<DirectionalRanking> directional_batch(const RoadNetwork& net,
                                                  std::span<const GeoPoint> queries,
                                                  double radius_m, std::size_t k);

std::vector<std::uint64_t> cell_weights(const RoadNetwork& net, const DensityGrid& grid);

}  // namespace omp

}  // namespace roadmind::kernels
