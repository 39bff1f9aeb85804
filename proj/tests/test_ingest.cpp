#include <doctest.h>

#include "roadmind/error.hpp"
#include "roadmind/osm_ingest.hpp"
#include "roadmind/road_graph.hpp"

using namespace roadmind;

namespace {

ErrorKind kind_of(const std::string& xml) {
  try {
    parse_extract(ExtractSource::memory(xml));
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::InvalidArgument;
}

std::string message_of(const std::string& xml) {
  try {
    parse_extract(ExtractSource::memory(xml));
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("ingest") {

TEST_CASE("maxspeed parsing") {
  CHECK(parse_maxspeed_kmh("50") == 50);
  CHECK(parse_maxspeed_kmh(" 60 km/h") == 60);
  CHECK(parse_maxspeed_kmh("70kmh") == 70);
  CHECK(parse_maxspeed_kmh("30 mph") == 48);  // 48.28032
  CHECK(parse_maxspeed_kmh("25mph") == 40);   // 40.2336
  CHECK_FALSE(parse_maxspeed_kmh("none").has_value());
  CHECK_FALSE(parse_maxspeed_kmh("walk").has_value());
  CHECK_FALSE(parse_maxspeed_kmh("NZ:urban").has_value());
  CHECK_FALSE(parse_maxspeed_kmh("0").has_value());
  CHECK_FALSE(parse_maxspeed_kmh("").has_value());
}

TEST_CASE("lanes parsing") {
  CHECK(parse_lanes("2") == 2);
  CHECK(parse_lanes("2;3") == 2);
  CHECK_FALSE(parse_lanes("0").has_value());
  CHECK_FALSE(parse_lanes("two").has_value());
}

TEST_CASE("tag normalization round trips") {
  const NormalizedTags t = normalize_tags({{"highway", "secondary"}, {"name", " Colombo   Street "},
                                           {"maxspeed", "30 mph"}, {"lanes", "3"}});
  CHECK(t.name == "Colombo Street");
  CHECK(t.highway_class.kind == HighwayKind::Secondary);
  CHECK(t.maxspeed_kmh == 48);
  CHECK(t.lanes == 3);
  CHECK(normalize_tags(render_tags(t)) == t);

  const NormalizedTags odd = normalize_tags({{"highway", "busway"}});
  CHECK(odd.highway_class.kind == HighwayKind::Other);
  CHECK(odd.highway_class.name() == "busway");
  CHECK(normalize_tags(render_tags(odd)) == odd);
}

TEST_CASE("mini extract") {
  const ParsedExtract x = parse_extract(ExtractSource::file(ROADMIND_TEST_DATA "/mini.osm"));
  CHECK(x.stats.ways_seen == 7);
  CHECK(x.stats.excluded_ways == 2);
  CHECK(x.stats.dropped_ways == 1);
  CHECK(x.stats.dangling_refs == 1);
  CHECK(x.stats.road_ways == 3);
  CHECK(x.stats.nodes_seen == 8);
  CHECK(x.stats.nodes_kept == 6);
  CHECK(x.stats.checksum.size() == 64);
  REQUIRE(x.declared_bounds.has_value());
  CHECK(x.declared_bounds->min_lat == -43.52);

  const RoadNetwork net = build_network(x.nodes, x.ways);
  CHECK(net.segments.size() == 4);
  REQUIRE(net.roads.size() == 2);
  CHECK(net.roads[0].name == "Harper Avenue");
  CHECK(net.roads[1].name == "Springfield Road");
  CHECK(net.roads[1].meta.maxspeed_kmh == 50);
  CHECK(net.roads[0].meta.maxspeed_kmh == 48);
}

TEST_CASE("non-motorized ways on request") {
  IngestOptions opts;
  opts.include_non_motorized = true;
  const ParsedExtract x = parse_extract(ExtractSource::file(ROADMIND_TEST_DATA "/mini.osm"), opts);
  CHECK(x.stats.road_ways == 4);
  CHECK(x.stats.excluded_ways == 1);  // construction stays out
}

TEST_CASE("malformed input") {
  CHECK(kind_of("<osm><node id=\"1\" lat=\"1\" lon=\"2\"></osm>") == ErrorKind::MalformedXml);
  CHECK(message_of("<osm>\n<way id=\"1\">\n</osm>").find(":3:") != std::string::npos);
  CHECK(kind_of("<osm><node id=\"1\" lat=\"91\" lon=\"2\"/><node id=\"2\" lat=\"1\" lon=\"2\"/>"
                "<way id=\"1\"><nd ref=\"1\"/><nd ref=\"2\"/><tag k=\"highway\" v=\"primary\"/></way></osm>") ==
        ErrorKind::MalformedXml);
  CHECK(kind_of("<osm><node id=\"x\" lat=\"1\" lon=\"2\"/>"
                "<way id=\"1\"><nd ref=\"1\"/><nd ref=\"2\"/><tag k=\"highway\" v=\"primary\"/></way></osm>") ==
        ErrorKind::MalformedXml);
  try {
    parse_extract(ExtractSource::file("/nonexistent/file.osm"));
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::IoFailure);
  }
}

TEST_CASE("empty extracts") {
  CHECK(kind_of("<osm></osm>") == ErrorKind::EmptyExtract);
  CHECK(kind_of("<osm><node id=\"1\" lat=\"1\" lon=\"2\"/><way id=\"1\"><nd ref=\"1\"/>"
                "<tag k=\"building\" v=\"yes\"/></way></osm>") == ErrorKind::EmptyExtract);
  // A lone highway whose nodes are missing.
  CHECK(kind_of("<osm><way id=\"1\"><nd ref=\"1\"/><nd ref=\"2\"/><tag k=\"highway\" v=\"primary\"/></way></osm>") ==
        ErrorKind::EmptyExtract);
}

TEST_CASE("exit codes") {
  CHECK(exit_code(ErrorKind::MalformedXml) == 2);
  CHECK(exit_code(ErrorKind::IoFailure) == 2);
  CHECK(exit_code(ErrorKind::EmptyExtract) == 3);
  CHECK(exit_code(ErrorKind::EmptyNetwork) == 3);
  CHECK(exit_code(ErrorKind::SchemaError) == 4);
}

}
