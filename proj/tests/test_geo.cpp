#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "roadmind/error.hpp"
#include "roadmind/geo.hpp"
#include "roadmind/text.hpp"

using namespace roadmind;

TEST_SUITE("geo") {

// Values frozen from tests/oracle/geodesy_oracle.py (50-digit mpmath).
TEST_CASE("haversine against high precision values") {
  CHECK(haversine_m({0, 0}, {0, 1}) == doctest::Approx(111194.92664455873735).epsilon(1e-12));
  CHECK(haversine_m({-43.5103, 172.6318}, {-43.5321, 172.6362}) ==
        doctest::Approx(2449.8729534719071811).epsilon(1e-12));
  CHECK(haversine_m({12.5, -7.25}, {12.5, -7.25}) == 0.0);
}

TEST_CASE("initial bearing against high precision values") {
  CHECK(initial_bearing_deg({10, 10}, {11, 11}) == doctest::Approx(44.426216835009376416).epsilon(1e-12));
  CHECK(initial_bearing_deg({-43.5103, 172.6318}, {-43.5321, 172.6362}) ==
        doctest::Approx(171.6751378283140057).epsilon(1e-12));
  CHECK(initial_bearing_deg({0, 0}, {1, 0}) == doctest::Approx(0.0));
  CHECK(initial_bearing_deg({0, 0}, {0, 1}) == doctest::Approx(90.0));
  CHECK(initial_bearing_deg({0, 0}, {-1, 0}) == doctest::Approx(180.0));
  CHECK(initial_bearing_deg({0, 0}, {0, -1}) == doctest::Approx(270.0));
}

TEST_CASE("equal points have no bearing") {
  try {
    initial_bearing_deg({1, 2}, {1, 2});
    FAIL("expected DegeneratePair");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegeneratePair);
  }
}

TEST_CASE("compass sectors") {
  CHECK(compass_of(0.0) == CompassDirection::N);
  CHECK(compass_of(22.4999) == CompassDirection::N);
  CHECK(compass_of(22.5) == CompassDirection::NE);
  CHECK(compass_of(67.5) == CompassDirection::E);
  CHECK(compass_of(112.5) == CompassDirection::SE);
  CHECK(compass_of(157.5) == CompassDirection::S);
  CHECK(compass_of(202.5) == CompassDirection::SW);
  CHECK(compass_of(247.5) == CompassDirection::W);
  CHECK(compass_of(292.5) == CompassDirection::NW);
  CHECK(compass_of(337.4999) == CompassDirection::NW);
  CHECK(compass_of(337.5) == CompassDirection::N);
  CHECK(compass_of(359.9999) == CompassDirection::N);
  for (auto d : kAllDirections) {
    CHECK(parse_direction(to_string(d)) == d);
    CHECK(opposite(opposite(d)) == d);
  }
  CHECK(opposite(CompassDirection::NE) == CompassDirection::SW);
  CHECK(parse_direction("nw") == CompassDirection::NW);
  CHECK_FALSE(parse_direction("NNE").has_value());
}

TEST_CASE("random pairs agree with the vector oracle") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lat(-89.0, 89.0), lon(-180.0, 180.0);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    CHECK(haversine_m(a, b) == doctest::Approx(oracle::distance_m(a, b)).epsilon(1e-9));
    double diff = std::abs(initial_bearing_deg(a, b) - oracle::bearing_deg(a, b));
    diff = std::min(diff, 360.0 - diff);
    CHECK(diff < 1e-6);
  }
}

TEST_CASE("haversine symmetry and triangle inequality") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lat(-60.0, 60.0), lon(-170.0, 170.0);
  for (int i = 0; i < 2000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)}, c{lat(rng), lon(rng)};
    const double ab = haversine_m(a, b);
    CHECK(std::abs(ab - haversine_m(b, a)) <= 1e-9 * ab);
    CHECK(haversine_m(a, c) <= (ab + haversine_m(b, c)) * (1 + 1e-9));
  }
}

TEST_CASE("reverse bearings point in opposite sectors") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lat(-43.6, -43.4), lon(172.5, 172.8);
  auto near_boundary = [](double b) {
    const double off = std::fmod(b - 22.5 + 720.0, 45.0);
    return off < 1.0 || off > 44.0;
  };
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a{lat(rng), lon(rng)}, b{lat(rng), lon(rng)};
    if (haversine_m(a, b) <= 1000.0) continue;
    const double fwd = initial_bearing_deg(a, b), back = initial_bearing_deg(b, a);
    if (near_boundary(fwd) || near_boundary(back)) continue;
    CHECK(compass_of(back) == opposite(compass_of(fwd)));
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("snapping and formatting") {
  CHECK(format_coord(-43.5103, 5) == "-43.51030");
  CHECK(format_coord(-0.000001, 5) == "0.00000");
  CHECK(format_point({-43.5103, 172.6318}, 5) == "(-43.51030, 172.63180)");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(-180.0, 180.0);
  for (int i = 0; i < 1000; ++i) {
    const double s = snap_coord(v(rng), 5);
    CHECK(std::stod(format_coord(s, 5)) == s);
    CHECK(snap_coord(s, 5) == s);
  }
}

TEST_CASE("bbox") {
  BBox b;
  CHECK(b.empty());
  b.extend({1, 2});
  b.extend({3, 5});
  CHECK(b.contains({2, 3}));
  CHECK_FALSE(b.contains({4, 3}));
  CHECK(b.center() == GeoPoint{2, 3.5});
}

TEST_CASE("name normalization") {
  CHECK(text::normalize_name("  Springfield \t Road ") == "Springfield Road");
  CHECK(text::match_key("SPRINGFIELD  road") == "springfield road");
  // Composed and decomposed forms share one key.
  CHECK(text::match_key("Mane\xCC\x84") == text::match_key("Man\xC4\x93"));
}

}
