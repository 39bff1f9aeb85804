#include "roadmind/road_graph.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

#include "roadmind/error.hpp"
#include "roadmind/text.hpp"

namespace roadmind {
namespace {

// A maximal run of a way between junction nodes.
struct Chain {
  OsmId way_id = 0;
  std::uint32_t position = 0;
  std::uint32_t tags = 0;  // index into the per-way normalized tags
  std::vector<OsmId> nodes;
};

struct Link {
  std::int64_t chain = -1;
  int end = 0;  // 0 = start node, 1 = end node of `chain`
};

template <typename T, typename Better>
std::optional<T> weighted_mode(const std::vector<std::pair<T, double>>& votes, Better better) {
  std::map<T, double> weight;
  for (const auto& [value, w] : votes) weight[value] += w;
  std::optional<T> best;
  double best_w = -1.0;
  for (const auto& [value, w] : weight) {
    if (!best || w > best_w || (w == best_w && better(value, *best))) {
      best = value;
      best_w = w;
    }
  }
  return best;
}

}  // namespace

double polyline_length_m(std::span<const GeoPoint> geometry) {
  double total = 0.0;
  for (std::size_t i = 1; i < geometry.size(); ++i) total += haversine_m(geometry[i - 1], geometry[i]);
  return total;
}

const NamedRoad* RoadNetwork::find_road(std::string_view name) const {
  auto it = std::lower_bound(roads.begin(), roads.end(), name,
                             [](const NamedRoad& r, std::string_view n) { return r.name < n; });
  return it != roads.end() && it->name == name ? &*it : nullptr;
}

RoadId RoadNetwork::road_id(std::string_view name) const {
  const NamedRoad* r = find_road(name);
  if (r == nullptr) r = find_road(text::normalize_name(name));
  if (r == nullptr) {
    const std::string key = text::match_key(name);
    auto it = std::find_if(roads.begin(), roads.end(), [&](const NamedRoad& road) { return text::match_key(road.name) == key; });
    if (it != roads.end()) r = &*it;
  }
  return r == nullptr ? kNoRoad : static_cast<RoadId>(r - roads.data());
}

std::size_t RoadNetwork::named_segment_count() const {
  return static_cast<std::size_t>(std::count_if(
      segments.begin(), segments.end(), [](const RoadSegment& s) { return s.road != kNoRoad; }));
}

double RoadNetwork::total_length_m() const {
  double total = 0.0;
  for (const auto& s : segments) total += s.meta.length_m;
  return total;
}

void RoadNetwork::rebuild_index(double cell_m) {
  index = SegmentGrid(
      static_cast<std::uint32_t>(segments.size()),
      [this](std::uint32_t id) { return std::span<const GeoPoint>(segments[id].geometry); }, cell_m);
}

RoadMeta aggregate_road_meta(const NamedRoad& road, const std::vector<RoadSegment>& segments) {
  RoadMeta meta;
  std::vector<std::pair<HighwayClass, double>> types;
  std::vector<std::pair<int, double>> speeds;
  std::vector<std::pair<int, double>> lanes;
  for (SegmentId id : road.segment_ids) {
    const SegmentMeta& m = segments.at(id).meta;
    meta.total_length_m += m.length_m;
    ++meta.segment_count;
    types.emplace_back(m.road_type, m.length_m);
    if (m.maxspeed_kmh) speeds.emplace_back(*m.maxspeed_kmh, m.length_m);
    if (m.lanes) lanes.emplace_back(*m.lanes, m.length_m);
  }
  auto larger = [](int a, int b) { return a > b; };
  meta.road_type = weighted_mode(types, [](const HighwayClass& a, const HighwayClass& b) {
                     return a < b;
                   }).value_or(HighwayClass{});
  meta.maxspeed_kmh = weighted_mode(speeds, larger);
  meta.lanes = weighted_mode(lanes, larger);
  return meta;
}

RoadNetwork build_network(const std::vector<OsmNode>& nodes, const std::vector<OsmWay>& ways,
                          const NetworkOptions& options) {
  std::unordered_map<OsmId, GeoPoint> coords;
  coords.reserve(nodes.size());
  for (const auto& n : nodes) coords.emplace(n.id, n.point());

  std::vector<const OsmWay*> ordered;
  ordered.reserve(ways.size());
  for (const auto& w : ways) ordered.push_back(&w);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const OsmWay* a, const OsmWay* b) { return a->id < b->id; });

  // Consecutive duplicate refs carry no geometry.
  std::vector<std::vector<OsmId>> refs;
  std::vector<NormalizedTags> tags;
  std::vector<OsmId> way_ids;
  for (const OsmWay* w : ordered) {
    std::vector<OsmId> r;
    for (OsmId id : w->node_refs) {
      if (!coords.contains(id)) continue;
      if (r.empty() || r.back() != id) r.push_back(id);
    }
    if (r.size() < 2) continue;
    refs.push_back(std::move(r));
    tags.push_back(normalize_tags(w->tags));
    way_ids.push_back(w->id);
  }

  // Junctions: nodes used by >= 2 distinct ways or repeated within one way.
  std::unordered_map<OsmId, std::uint32_t> way_count;
  std::unordered_map<OsmId, bool> junction;
  for (const auto& r : refs) {
    std::vector<OsmId> sorted = r;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      if (i > 0 && sorted[i] == sorted[i - 1]) {
        junction[sorted[i]] = true;
        continue;
      }
      if (++way_count[sorted[i]] >= 2) junction[sorted[i]] = true;
    }
  }

  std::vector<Chain> chains;
  for (std::size_t w = 0; w < refs.size(); ++w) {
    const auto& r = refs[w];
    std::uint32_t position = 0;
    std::size_t start = 0;
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (i + 1 == r.size() || junction.contains(r[i])) {
        chains.push_back({way_ids[w], position++, static_cast<std::uint32_t>(w),
                          std::vector<OsmId>(r.begin() + static_cast<std::ptrdiff_t>(start),
                                             r.begin() + static_cast<std::ptrdiff_t>(i) + 1)});
        start = i;
      }
    }
  }

  // Chain ends meeting at a node of degree 2 merge when the tags agree.
  std::unordered_map<OsmId, std::vector<Link>> incidence;
  for (std::size_t c = 0; c < chains.size(); ++c) {
    incidence[chains[c].nodes.front()].push_back({static_cast<std::int64_t>(c), 0});
    incidence[chains[c].nodes.back()].push_back({static_cast<std::int64_t>(c), 1});
  }
  std::vector<std::array<Link, 2>> links(chains.size());
  for (const auto& [node, ends] : incidence) {
    if (ends.size() != 2) continue;
    const Link a = ends[0];
    const Link b = ends[1];
    if (a.chain == b.chain) continue;
    if (!(tags[chains[a.chain].tags] == tags[chains[b.chain].tags])) continue;
    links[a.chain][a.end] = b;
    links[b.chain][b.end] = a;
  }

  RoadNetwork net;
  net.aoi_bbox = options.aoi.value_or(BBox{});
  if (!options.aoi) {
    for (const auto& n : nodes) net.aoi_bbox.extend(n.point());
  }
  if (!net.aoi_bbox.empty() && (net.aoi_bbox.min_lat < -85.0 || net.aoi_bbox.max_lat > 85.0 ||
                                net.aoi_bbox.max_lon - net.aoi_bbox.min_lon > 180.0)) {
    throw Error(ErrorKind::InvalidArgument, "AOI must stay within |lat| <= 85 and not span the antimeridian");
  }

  // Chains are in (way id, position) order, so the first unvisited chain is
  // the smallest of its component and fixes the segment's orientation.
  std::vector<bool> visited(chains.size(), false);
  for (std::size_t first = 0; first < chains.size(); ++first) {
    if (visited[first]) continue;
    visited[first] = true;
    std::vector<OsmId> path = chains[first].nodes;

    // Forward from the end of `first`.
    Link next = links[first][1];
    while (next.chain >= 0 && !visited[next.chain]) {
      visited[next.chain] = true;
      const auto& n = chains[next.chain].nodes;
      if (next.end == 0) {
        path.insert(path.end(), n.begin() + 1, n.end());
      } else {
        path.insert(path.end(), n.rbegin() + 1, n.rend());
      }
      next = links[next.chain][1 - next.end];
    }
    // Backward from the start of `first`.
    std::vector<OsmId> prefix;
    Link prev = links[first][0];
    while (prev.chain >= 0 && !visited[prev.chain]) {
      visited[prev.chain] = true;
      const auto& n = chains[prev.chain].nodes;
      // Collected in reverse, flipped once at the end.
      if (prev.end == 0) {
        prefix.insert(prefix.end(), n.begin() + 1, n.end());
      } else {
        prefix.insert(prefix.end(), n.rbegin() + 1, n.rend());
      }
      prev = links[prev.chain][1 - prev.end];
    }
    std::reverse(prefix.begin(), prefix.end());
    path.insert(path.begin(), prefix.begin(), prefix.end());

    RoadSegment seg;
    for (OsmId id : path) {
      const GeoPoint p = coords.at(id);
      if (seg.geometry.empty() || !(seg.geometry.back() == p)) seg.geometry.push_back(p);
    }
    if (seg.geometry.size() < 2) continue;
    const NormalizedTags& t = tags[chains[first].tags];
    seg.meta = {t.name, t.highway_class, t.maxspeed_kmh, t.lanes, polyline_length_m(seg.geometry)};
    seg.endpoint_node_ids = {path.front(), path.back()};
    seg.source_way = chains[first].way_id;
    seg.source_position = chains[first].position;
    seg.seg_id = static_cast<SegmentId>(net.segments.size());
    net.segments.push_back(std::move(seg));
  }
  if (net.segments.empty()) throw Error(ErrorKind::EmptyNetwork, "no road segments after graph build");

  std::map<std::string, std::vector<SegmentId>> by_name;
  for (const auto& s : net.segments) {
    if (s.meta.name) by_name[*s.meta.name].push_back(s.seg_id);
    net.node_adjacency[s.endpoint_node_ids.first].push_back(s.seg_id);
    if (s.endpoint_node_ids.second != s.endpoint_node_ids.first) {
      net.node_adjacency[s.endpoint_node_ids.second].push_back(s.seg_id);
    }
  }
  for (auto& [name, ids] : by_name) {
    NamedRoad road{name, std::move(ids), {}};
    road.meta = aggregate_road_meta(road, net.segments);
    for (SegmentId id : road.segment_ids) net.segments[id].road = static_cast<RoadId>(net.roads.size());
    net.roads.push_back(std::move(road));
  }
  net.rebuild_index(options.index_cell_m);
  return net;
}

std::vector<Connection> connected_roads(std::string_view road_name, const RoadNetwork& network) {
  const RoadId self = network.road_id(road_name);
  if (self == kNoRoad) throw Error(ErrorKind::UnknownRoad, "unknown road '" + std::string(road_name) + "'");

  std::set<std::pair<RoadId, OsmId>> seen;
  std::vector<Connection> out;
  for (SegmentId sid : network.roads[static_cast<std::size_t>(self)].segment_ids) {
    const RoadSegment& seg = network.segments[sid];
    const std::pair<OsmId, GeoPoint> ends[] = {
        {seg.endpoint_node_ids.first, seg.geometry.front()},
        {seg.endpoint_node_ids.second, seg.geometry.back()}};
    for (const auto& [node, at] : ends) {
      auto it = network.node_adjacency.find(node);
      if (it == network.node_adjacency.end()) continue;
      for (SegmentId other : it->second) {
        const RoadId r = network.segments[other].road;
        if (r == kNoRoad || r == self || !seen.emplace(r, node).second) continue;
        out.push_back({network.roads[static_cast<std::size_t>(r)].name, at});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const Connection& a, const Connection& b) {
    return std::tie(a.road, a.at.lat, a.at.lon) < std::tie(b.road, b.at.lat, b.at.lon);
  });
  return out;
}

}  // namespace roadmind
