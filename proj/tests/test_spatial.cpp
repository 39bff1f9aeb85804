#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "roadmind/error.hpp"
#include "roadmind/spatial.hpp"
#include "synth_city.hpp"

using namespace roadmind;

namespace {

const double kMetersPerDegree = kEarthRadiusM * kDegToRad;

OsmWay named(OsmId id, std::vector<OsmId> refs, const std::string& name) {
  return {id, std::move(refs), {{"highway", "residential"}, {"name", name}}};
}

// Two east-west roads north of the origin at the given offsets in meters.
RoadNetwork parallel_roads(double first_m, double second_m) {
  const double a = first_m / kMetersPerDegree, b = second_m / kMetersPerDegree;
  const std::vector<OsmNode> nodes{{1, a, -0.01}, {2, a, 0.01}, {3, b, -0.01}, {4, b, 0.01}, {5, -0.02, -0.02},
                                   {6, -0.02, -0.0199}};
  return build_network(nodes, {named(1, {1, 2}, "Near Road"), named(2, {3, 4}, "Far Road"),
                               named(3, {5, 6}, "Corner Lane")});
}

GeoPoint random_point(std::mt19937_64& rng, const BBox& box, double margin) {
  std::uniform_real_distribution<double> lat(box.min_lat - margin, box.max_lat + margin);
  std::uniform_real_distribution<double> lon(box.min_lon - margin, box.max_lon + margin);
  return {lat(rng), lon(rng)};
}

}  // namespace

TEST_SUITE("spatial") {

TEST_CASE("projection examples") {
  const std::vector<OsmNode> nodes{{1, 0, 0}, {2, 0, 0.02}, {3, 0.01, 0.03}};
  const RoadNetwork net = build_network(nodes, {named(1, {1, 2, 3}, "Equator Road")});
  const RoadSegment& seg = net.segments.at(0);

  const auto on_vertex = project_to_segment({0, 0.02}, seg);
  CHECK(on_vertex.distance_m == 0.0);
  CHECK(on_vertex.point == GeoPoint{0, 0.02});

  const double d = 250.0;
  const auto perp = project_to_segment({d / kMetersPerDegree, 0.01}, seg);
  CHECK(perp.distance_m == doctest::Approx(d).epsilon(1e-3));
  CHECK(perp.param == doctest::Approx(0.01 * kMetersPerDegree / seg.meta.length_m).epsilon(1e-6));

  const auto beyond = project_to_segment({-0.001, -0.005}, seg);
  CHECK(beyond.point == GeoPoint{0, 0});
  CHECK(beyond.param == 0.0);
}

TEST_CASE("parallel roads rank by distance") {
  const RoadNetwork net = parallel_roads(100, 300);
  const auto r = nearest_roads({0, 0}, net, 10);
  REQUIRE(r.size() == 3);
  CHECK(r[0].name == "Near Road");
  CHECK(r[0].distance_m == doctest::Approx(100).epsilon(1e-6));
  CHECK(r[1].name == "Far Road");
  CHECK(r[1].distance_m == doctest::Approx(300).epsilon(1e-6));
  CHECK(r[2].name == "Corner Lane");
  CHECK(nearest_roads({0, 0}, net, 1).size() == 1);
  CHECK(nearest_roads({0, 0}, net, 0).empty());
}

TEST_CASE("equal distances break ties by name") {
  const double a = 100 / kMetersPerDegree;
  const std::vector<OsmNode> nodes{{1, a, -0.01}, {2, a, 0.01}, {3, -a, -0.01}, {4, -a, 0.01}};
  const RoadNetwork net = build_network(nodes, {named(1, {1, 2}, "Zeta Street"), named(2, {3, 4}, "Alpha Street")});
  const auto r = nearest_roads({0, 0}, net, 2);
  CHECK(r[0].distance_m == r[1].distance_m);
  CHECK(r[0].name == "Alpha Street");
}

TEST_CASE("indexed nearest equals the full scan") {
  for (std::uint64_t seed : {3u, 4u}) {
    testing::CityShape shape;
    shape.seed = seed;
    shape.rows = 14;
    shape.cols = 10;
    const auto city = testing::make_city(shape);
    for (double cell : {40.0, 300.0, 5000.0}) {
      const RoadNetwork net = city.network(cell);
      std::mt19937_64 rng(seed * 100 + static_cast<std::uint64_t>(cell));
      for (int i = 0; i < 150; ++i) {
        const GeoPoint p = random_point(rng, net.aoi_bbox, i % 5 == 0 ? 0.03 : 0.0);
        for (std::size_t k : {1u, 10u}) {
          const auto got = nearest_roads(p, net, k);
          const auto want = oracle::nearest_scan(p, net, k);
          REQUIRE(got.size() == want.size());
          for (std::size_t j = 0; j < got.size(); ++j) {
            CHECK(got[j].name == want[j].name);
            CHECK(got[j].distance_m == want[j].distance_m);
          }
        }
      }
    }
  }
}

TEST_CASE("directional single road") {
  const double north = 200 / kMetersPerDegree;
  const std::vector<OsmNode> nodes{{1, north, -0.0005}, {2, north, 0.0005}};
  const RoadNetwork net = build_network(nodes, {named(1, {1, 2}, "North Road")});
  const auto d = directional_nearest({0, 0}, net, 1000);
  CHECK(d.size() == 1);
  REQUIRE(d.at(CompassDirection::N).has_value());
  CHECK(d.at(CompassDirection::N)->name == "North Road");
  CHECK(d.at(CompassDirection::N)->distance_m == doctest::Approx(200).epsilon(1e-6));
  CHECK(directional_nearest({0, 0}, net, 100).size() == 0);
  CHECK_THROWS_AS(directional_nearest({0, 0}, net, 0), Error);
}

TEST_CASE("a road through the query point counts in every sector it reaches") {
  const std::vector<OsmNode> nodes{{1, 0, -0.001}, {2, 0, 0}, {3, 0, 0.001}};
  const RoadNetwork net = build_network(nodes, {named(1, {1, 2, 3}, "Through Road")});
  const auto d = directional_nearest({0, 0}, net, 500);
  // A vertex at p qualifies the road for every sector.
  CHECK(d.size() == 8);
  CHECK(d.at(CompassDirection::E)->distance_m == 0.0);
}

TEST_CASE("directional retrieval equals the sector oracle") {
  testing::CityShape shape;
  shape.seed = 8;
  shape.rows = 10;
  shape.cols = 10;
  const RoadNetwork net = testing::make_city(shape).network();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 150; ++i) {
    const GeoPoint p = random_point(rng, net.aoi_bbox, 0.002);
    const double r = i % 2 == 0 ? 600.0 : 4000.0;
    const auto got = directional_nearest(p, net, r);
    const auto want = oracle::directional_scan(p, net, r);
    const auto nearest = nearest_roads(p, net, 1);
    for (auto d : kAllDirections) {
      const auto& g = got.at(d);
      const auto& w = want[index_of(d)];
      REQUIRE(g.has_value() == w.has_value());
      if (!g) continue;
      CHECK(g->name == w->name);
      CHECK(g->distance_m == doctest::Approx(w->distance_m).epsilon(1e-6));
      CHECK(g->distance_m >= nearest[0].distance_m);
    }
  }
}

TEST_CASE("ranked directional lists extend the nearest entry") {
  const RoadNetwork net = testing::make_city({}).network();
  const GeoPoint p = net.aoi_bbox.center();
  const auto ranked = directional_ranked(p, net, 4000, 5);
  const auto top = directional_nearest(p, net, 4000);
  for (auto d : kAllDirections) {
    const auto& list = ranked.ranked[index_of(d)];
    CHECK(list.size() <= 5);
    if (list.empty()) {
      CHECK_FALSE(top.at(d).has_value());
      continue;
    }
    CHECK(list.front() == *top.at(d));
    for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].distance_m <= list[i].distance_m);
  }
}

TEST_CASE("roads within a radius") {
  const RoadNetwork net = parallel_roads(100, 300);
  CHECK(roads_within({0, 0}, net, 50).empty());
  CHECK(roads_within({0, 0}, net, 150) == std::vector<std::string>{"Near Road"});
  CHECK(roads_within({0, 0}, net, 400) == std::vector<std::string>{"Far Road", "Near Road"});
  CHECK(road_distance({0, 0}, net, net.road_id("Far Road")) == doctest::Approx(300).epsilon(1e-6));
}

}
