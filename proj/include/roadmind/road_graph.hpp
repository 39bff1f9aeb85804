#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "roadmind/geo.hpp"
#include "roadmind/grid_index.hpp"
#include "roadmind/osm_ingest.hpp"

namespace roadmind {

using SegmentId = std::uint32_t;
using RoadId = std::int32_t;
inline constexpr RoadId kNoRoad = -1;

struct SegmentMeta {
  std::optional<std::string> name;
  HighwayClass road_type;
  std::optional<int> maxspeed_kmh;
  std::optional<int> lanes;
  double length_m = 0.0;
};

struct RoadSegment {
  SegmentId seg_id = 0;
  std::vector<GeoPoint> geometry;  // >= 2 points, consecutive points distinct
  SegmentMeta meta;
  std::pair<OsmId, OsmId> endpoint_node_ids;
  RoadId road = kNoRoad;  // index into RoadNetwork::roads, kNoRoad if unnamed
  OsmId source_way = 0;   // smallest contributing way id
  std::uint32_t source_position = 0;
};

struct RoadMeta {
  double total_length_m = 0.0;
  HighwayClass road_type;
  std::optional<int> maxspeed_kmh;
  std::optional<int> lanes;
  std::uint32_t segment_count = 0;
};

struct NamedRoad {
  std::string name;
  std::vector<SegmentId> segment_ids;  // ascending
  RoadMeta meta;
};

struct NetworkOptions {
  double index_cell_m = 500.0;
  /// AOI; defaults to the bounding box of the referenced nodes.
  std::optional<BBox> aoi;
};

/// The road graph. Immutable once built; all queries are const.
class RoadNetwork {
 public:
  std::vector<RoadSegment> segments;
  std::vector<NamedRoad> roads;  // sorted by name
  std::map<OsmId, std::vector<SegmentId>> node_adjacency;
  BBox aoi_bbox;
  SegmentGrid index;
  std::string source_checksum;

  const NamedRoad* find_road(std::string_view name) const;
  RoadId road_id(std::string_view name) const;
  std::size_t named_segment_count() const;
  double total_length_m() const;

  /// Rebuilds `index` with the given cell size (after loading a snapshot).
  void rebuild_index(double cell_m);
};

/// Splits ways at junction nodes, merges tag-identical chains across
/// degree-2 nodes, and groups named segments into roads. Throws
/// EmptyNetwork when nothing survives.
RoadNetwork build_network(const std::vector<OsmNode>& nodes,
                          const std::vector<OsmWay>& ways,
                          const NetworkOptions& options = {});

/// Length-weighted mode per attribute; ties go to the larger value (or the
/// higher road class). Attributes absent on every segment stay absent.
RoadMeta aggregate_road_meta(const NamedRoad& road,
                             const std::vector<RoadSegment>& segments);

struct Connection {
  std::string road;
  GeoPoint at;

  friend bool operator==(const Connection&, const Connection&) = default;
};

/// Differently-named roads sharing a node with `road_name`, sorted by name,
/// then lat, then lon. Throws UnknownRoad.
std::vector<Connection> connected_roads(std::string_view road_name,
                                        const RoadNetwork& network);

double polyline_length_m(std::span<const GeoPoint> geometry);

}  // namespace roadmind
