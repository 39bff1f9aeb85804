#include <omp.h>

#include <exception>

#include "roadmind/kernels.hpp"

namespace roadmind::kernels::omp {
namespace {

// Exceptions may not cross an OpenMP region; keep the first and rethrow.
class ErrorSlot {
 public:
  template <typename F>
  void run(F&& f) {
    try {
      f();
    } catch (...) {
#pragma omp critical(roadmind_error_slot)
      if (!error_) error_ = std::current_exception();
    }
  }
  void rethrow() const {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::exception_ptr error_;
};

}  // namespace

std::vector<std::vector<RankedRoad>> nearest_roads_batch(const RoadNetwork& net,
                                                         std::span<const GeoPoint> queries,
                                                         std::size_t k) {
  std::vector<std::vector<RankedRoad>> out(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
  ErrorSlot errors;
#pragma omp parallel
  {
    QueryScratch scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t i = 0; i < n; ++i) {
      errors.run([&] { out[i] = nearest_roads(queries[i], net, k, scratch); });
    }
  }
  errors.rethrow();
  return out;
}

std::vector<DirectionalRanking> directional_batch(const RoadNetwork& net,
                                                  std::span<const GeoPoint> queries,
                                                  double radius_m, std::size_t k) {
  std::vector<DirectionalRanking> out(queries.size());
  const auto n = static_cast<std::int64_t>(queries.size());
  ErrorSlot errors;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    errors.run([&] { out[i] = directional_ranked(queries[i], net, radius_m, k); });
  }
  errors.rethrow();
  return out;
}

std::vector<std::uint64_t> cell_weights(const RoadNetwork& net, const DensityGrid& grid) {
  std::vector<std::uint64_t> weights(grid.size(), 0);
  const auto n = static_cast<std::int64_t>(net.segments.size());
  ErrorSlot errors;
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(grid.size(), 0);
#pragma omp for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      errors.run([&] {
        for (std::uint32_t cell : grid.cells_touched(net.segments[i].geometry)) ++local[cell];
      });
    }
    // Integer sums: the reduction order cannot change the result.
#pragma omp critical(roadmind_cell_weights)
    for (std::size_t c = 0; c < local.size(); ++c) weights[c] += local[c];
  }
  errors.rethrow();
  return weights;
}

}  // namespace roadmind::kernels::omp
