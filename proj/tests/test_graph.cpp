#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "roadmind/error.hpp"
#include "roadmind/osm_ingest.hpp"
#include "roadmind/road_graph.hpp"
#include "synth_city.hpp"

using namespace roadmind;
using Geometry = std::vector<std::pair<double, double>>;

namespace {

Geometry canonical(std::vector<GeoPoint> pts) {
  Geometry g;
  for (const auto& p : pts) g.emplace_back(p.lat, p.lon);
  Geometry r(g.rbegin(), g.rend());
  return std::min(g, r);
}

// Piece-level reference: cut every way into node-to-node pieces, then glue
// pieces through nodes touched by exactly two pieces with equal tags.
std::multiset<Geometry> reference_segments(const std::vector<OsmNode>& nodes, const std::vector<OsmWay>& ways) {
  std::map<OsmId, GeoPoint> at;
  for (const auto& n : nodes) at[n.id] = n.point();
  struct Piece {
    OsmId a, b;
    NormalizedTags tags;
  };
  std::vector<Piece> pieces;
  std::map<OsmId, std::vector<std::size_t>> touching;
  for (const auto& w : ways) {
    const NormalizedTags t = normalize_tags(w.tags);
    for (std::size_t i = 0; i + 1 < w.node_refs.size(); ++i) {
      touching[w.node_refs[i]].push_back(pieces.size());
      touching[w.node_refs[i + 1]].push_back(pieces.size());
      pieces.push_back({w.node_refs[i], w.node_refs[i + 1], t});
    }
  }
  auto through = [&](OsmId n) {
    const auto& t = touching[n];
    return t.size() == 2 && t[0] != t[1] && pieces[t[0]].tags == pieces[t[1]].tags;
  };
  std::vector<bool> used(pieces.size(), false);
  std::multiset<Geometry> out;
  for (std::size_t start = 0; start < pieces.size(); ++start) {
    if (used[start]) continue;
    used[start] = true;
    std::vector<OsmId> seq{pieces[start].a, pieces[start].b};
    for (int side = 0; side < 2; ++side) {
      while (through(seq.back())) {
        const auto& t = touching[seq.back()];
        const std::size_t next = used[t[0]] ? t[1] : t[0];
        if (used[next]) break;
        used[next] = true;
        seq.push_back(pieces[next].a == seq.back() ? pieces[next].b : pieces[next].a);
      }
      std::reverse(seq.begin(), seq.end());
    }
    std::vector<GeoPoint> g;
    for (OsmId id : seq) g.push_back(at[id]);
    out.insert(canonical(g));
  }
  return out;
}

OsmWay way(OsmId id, std::vector<OsmId> refs, TagMap tags) { return {id, std::move(refs), std::move(tags)}; }

std::vector<OsmNode> line_nodes(int n) {
  std::vector<OsmNode> nodes;
  for (int i = 0; i < n; ++i) nodes.push_back({static_cast<OsmId>(i + 1), 0.0, 0.001 * i});
  return nodes;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("split and merge match the piece-level reference") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    testing::CityShape shape;
    shape.seed = seed;
    shape.rows = 6 + static_cast<int>(seed);
    shape.cols = 5 + static_cast<int>(seed % 3);
    const auto city = testing::make_city(shape);
    std::vector<OsmWay> roads;
    for (const auto& w : city.ways) {
      if (w.tags.at("highway") != "footway") roads.push_back(w);
    }
    const RoadNetwork net = city.network();
    std::multiset<Geometry> got;
    for (const auto& s : net.segments) got.insert(canonical(s.geometry));
    CHECK(got == reference_segments(city.nodes, roads));
  }
}

TEST_CASE("segment ids do not depend on input order") {
  const auto city = testing::make_city({});
  const RoadNetwork a = city.network();
  auto shuffled = city;
  std::mt19937_64 rng(9);
  std::shuffle(shuffled.ways.begin(), shuffled.ways.end(), rng);
  std::shuffle(shuffled.nodes.begin(), shuffled.nodes.end(), rng);
  const RoadNetwork b = shuffled.network();
  REQUIRE(a.segments.size() == b.segments.size());
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    CHECK(a.segments[i].geometry == b.segments[i].geometry);
    CHECK(a.segments[i].endpoint_node_ids == b.segments[i].endpoint_node_ids);
  }
}

TEST_CASE("tag-identical ways merge across a degree-2 node") {
  const auto nodes = line_nodes(5);
  const TagMap t{{"highway", "residential"}, {"name", "Bealey Avenue"}};
  const RoadNetwork net = build_network(nodes, {way(1, {1, 2, 3}, t), way(2, {5, 4, 3}, t)});
  REQUIRE(net.segments.size() == 1);
  CHECK(net.segments[0].geometry.size() == 5);
  CHECK(net.segments[0].endpoint_node_ids == std::pair<OsmId, OsmId>{1, 5});
  CHECK(net.segments[0].meta.length_m == doctest::Approx(polyline_length_m(net.segments[0].geometry)));
}

TEST_CASE("a tag change keeps chains apart") {
  const auto nodes = line_nodes(5);
  TagMap t{{"highway", "residential"}, {"name", "Bealey Avenue"}, {"maxspeed", "50"}};
  TagMap u = t;
  u["maxspeed"] = "40";
  const RoadNetwork net = build_network(nodes, {way(1, {1, 2, 3}, t), way(2, {3, 4, 5}, u)});
  CHECK(net.segments.size() == 2);
  REQUIRE(net.roads.size() == 1);
  CHECK(net.roads[0].segment_ids.size() == 2);
}

TEST_CASE("ways split at shared interior nodes") {
  const std::vector<OsmNode> nodes{{1, 0, 0}, {2, 0, 0.001}, {3, 0, 0.002}, {4, 0.001, 0.001}, {5, -0.001, 0.001}};
  const RoadNetwork net = build_network(nodes, {way(1, {1, 2, 3}, {{"highway", "primary"}, {"name", "A Road"}}),
                                                way(2, {4, 2, 5}, {{"highway", "primary"}, {"name", "B Road"}})});
  CHECK(net.segments.size() == 4);
  CHECK(net.node_adjacency.at(2).size() == 4);
}

TEST_CASE("closed ways keep their loop") {
  const std::vector<OsmNode> nodes{{1, 0, 0}, {2, 0, 0.001}, {3, 0.001, 0.001}};
  const RoadNetwork net = build_network(nodes, {way(1, {1, 2, 3, 1}, {{"highway", "service"}})});
  REQUIRE(net.segments.size() == 1);
  CHECK(net.segments[0].geometry.size() == 4);
  CHECK(net.roads.empty());
}

TEST_CASE("an unnamed-only network is empty") {
  const auto nodes = line_nodes(2);
  CHECK_NOTHROW(build_network(nodes, {way(1, {1, 2}, {{"highway", "service"}})}));
  try {
    build_network(nodes, {});
    FAIL("expected EmptyNetwork");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyNetwork);
  }
}

TEST_CASE("road metadata is a length-weighted mode") {
  // Four north-south pieces of identical length, so every vote below is an exact tie.
  std::vector<OsmNode> nodes;
  for (OsmId i = 0; i < 4; ++i) {
    nodes.push_back({2 * i + 1, 0.0, 0.01 * static_cast<double>(i)});
    nodes.push_back({2 * i + 2, 0.001, 0.01 * static_cast<double>(i)});
  }
  const RoadNetwork net = build_network(
      nodes, {way(1, {1, 2}, {{"highway", "residential"}, {"name", "C Street"}, {"maxspeed", "50"}, {"lanes", "2"}}),
              way(2, {3, 4}, {{"highway", "residential"}, {"name", "C Street"}, {"maxspeed", "50"}}),
              way(3, {5, 6}, {{"highway", "primary"}, {"name", "C Street"}, {"maxspeed", "30"}}),
              way(4, {7, 8}, {{"highway", "primary"}, {"name", "C Street"}, {"maxspeed", "30"}})});
  REQUIRE(net.roads.size() == 1);
  const RoadMeta& m = net.roads[0].meta;
  CHECK(m.segment_count == 4);
  CHECK(m.maxspeed_kmh == 50);  // tie goes to the larger value
  CHECK(m.lanes == 2);
  CHECK(m.road_type.kind == HighwayKind::Primary);  // tie goes to the higher class
  CHECK(m.total_length_m == doctest::Approx(net.total_length_m()));
}

TEST_CASE("connected roads") {
  const ParsedExtract x = parse_extract(ExtractSource::file(ROADMIND_TEST_DATA "/mini.osm"));
  const RoadNetwork net = build_network(x.nodes, x.ways);
  const auto c = connected_roads("Springfield Road", net);
  REQUIRE(c.size() == 1);
  CHECK(c[0].road == "Harper Avenue");
  CHECK(c[0].at == GeoPoint{-43.51, 172.63});
  CHECK(connected_roads("springfield  road", net).size() == 1);
  try {
    connected_roads("Nowhere Lane", net);
    FAIL("expected UnknownRoad");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownRoad);
  }
}

}
