#include "roadmind/kernels.hpp"

namespace roadmind::kernels::serial {

std::vector<std::vector<RankedRoad>> nearest_roads_batch(const RoadNetwork& net,
                                                         std::span<const GeoPoint> queries,
                                                         std::size_t k) {
  std::vector<std::vector<RankedRoad>> out(queries.size());
  QueryScratch scratch;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out[i] = nearest_roads(queries[i], net, k, scratch);
  }
  return out;
}

std::vector<DirectionalRanking> directional_batch(const RoadNetwork& net,
                                                  std::span<const GeoPoint> queries,
                                                  double radius_m, std::size_t k) {
  std::vector<DirectionalRanking> out(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    out[i] = directional_ranked(queries[i], net, radius_m, k);
  }
  return out;
}

std::vector<std::uint64_t> cell_weights(const RoadNetwork& net, const DensityGrid& grid) {
  std::vector<std::uint64_t> weights(grid.size(), 0);
  for (const auto& seg : net.segments) {
    for (std::uint32_t cell : grid.cells_touched(seg.geometry)) ++weights[cell];
  }
  return weights;
}

}  // namespace roadmind::kernels::serial
