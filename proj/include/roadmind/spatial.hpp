#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "roadmind/geo.hpp"
#include "roadmind/road_graph.hpp"

namespace roadmind {

struct ProjectionResult {
  GeoPoint point;  // projected point on the polyline
  double distance_m = 0.0;
  SegmentId seg_id = 0;
  double param = 0.0;  // arc-length fraction of `point` along the segment
};

/// Closest point of the polyline to `p`, chosen in a local equirectangular
/// plane centred on `p` and re-measured with haversine.
ProjectionResult project_to_segment(const GeoPoint& p, const RoadSegment& seg);

struct RankedRoad {
  std::string name;
  double distance_m = 0.0;

  friend bool operator==(const RankedRoad&, const RankedRoad&) = default;
};

/// Per-thread working memory for the indexed queries. Reusing one across
/// calls avoids reallocating per query; sharing one across threads is not
/// allowed.
class QueryScratch {
 public:
  void prepare(const RoadNetwork& net);

 private:
  friend std::vector<RankedRoad> nearest_roads(const GeoPoint&, const RoadNetwork&,
                                               std::size_t, QueryScratch&);
  std::vector<std::uint32_t> seg_stamp_;
  std::vector<std::uint32_t> road_stamp_;
  std::vector<double> road_best_;
  std::vector<RoadId> found_;
  std::uint32_t stamp_ = 0;
};

/// The k nearest named roads, ascending by distance then name. Uses the
/// grid index with ring expansion; results equal an exhaustive scan.
std::vector<RankedRoad> nearest_roads(const GeoPoint& p, const RoadNetwork& net,
                                      std::size_t k, QueryScratch& scratch);
std::vector<RankedRoad> nearest_roads(const GeoPoint& p, const RoadNetwork& net,
                                      std::size_t k);

/// Directional retrieval: entry per compass direction, absent when no
/// named road qualifies inside that sector within the radius.
struct DirectionalResult {
  std::array<std::optional<RankedRoad>, 8> entries;

  const std::optional<RankedRoad>& at(CompassDirection d) const { return entries[index_of(d)]; }
  std::size_t size() const;
};

/// Up to `k` roads per direction, ranked like nearest_roads.
struct DirectionalRanking {
  std::array<std::vector<RankedRoad>, 8> ranked;

  DirectionalResult nearest() const;
};

inline constexpr double kDefaultSectorRadiusM = 4000.0;

/// A named segment takes part in direction d when one of its vertices lies
/// in d's sector within `radius_m`; it then contributes its projection of
/// `p` when that projected point is itself in the sector and within the
/// radius. A projection landing exactly on `p` counts for every direction
/// the segment takes part in.
DirectionalRanking directional_ranked(const GeoPoint& p, const RoadNetwork& net,
                                      double radius_m, std::size_t k);
DirectionalResult directional_nearest(const GeoPoint& p, const RoadNetwork& net,
                                      double radius_m = kDefaultSectorRadiusM);

/// Minimal projection distance from `p` to any segment of the road.
double road_distance(const GeoPoint& p, const RoadNetwork& net, RoadId road);

/// Sorted unique names of roads with a segment within `radius_m` of `p`.
std::vector<std::string> roads_within(const GeoPoint& p, const RoadNetwork& net,
                                      double radius_m);

}  // namespace roadmind
