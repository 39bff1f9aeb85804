#include "roadmind/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "roadmind/error.hpp"

namespace roadmind {
namespace {

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double t) {
  if (t <= 0.0) return a;
  if (t >= 1.0) return b;
  return {a.lat + t * (b.lat - a.lat), a.lon + t * (b.lon - a.lon)};
}

bool rank_less(const std::pair<double, const std::string*>& a,
               const std::pair<double, const std::string*>& b) {
  if (a.first != b.first) return a.first < b.first;
  return *a.second < *b.second;
}

std::vector<RankedRoad> rank_roads(const RoadNetwork& net,
                                   std::vector<std::pair<RoadId, double>> best,
                                   std::size_t k) {
  std::vector<std::pair<double, const std::string*>> keyed;
  keyed.reserve(best.size());
  for (const auto& [road, d] : best) keyed.emplace_back(d, &net.roads[static_cast<std::size_t>(road)].name);
  const std::size_t n = std::min(k, keyed.size());
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(n), keyed.end(), rank_less);
  std::vector<RankedRoad> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back({*keyed[i].second, keyed[i].first});
  return out;
}

}  // namespace

ProjectionResult project_to_segment(const GeoPoint& p, const RoadSegment& seg) {
  const auto& g = seg.geometry;
  const double cos_lat = std::cos(p.lat * kDegToRad);
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_edge = 0;
  double best_t = 0.0;

  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    // Plane coordinates in degrees-of-latitude units; the common scale
    // factor does not change the argmin.
    const double ax = (g[i].lon - p.lon) * cos_lat;
    const double ay = g[i].lat - p.lat;
    const double dx = (g[i + 1].lon - g[i].lon) * cos_lat;
    const double dy = g[i + 1].lat - g[i].lat;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? -(ax * dx + ay * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double cx = ax + t * dx;
    const double cy = ay + t * dy;
    const double d2 = cx * cx + cy * cy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best_edge = i;
      best_t = t;
    }
  }
  if (g.size() == 1) return {g[0], haversine_m(p, g[0]), seg.seg_id, 0.0};

  ProjectionResult out;
  out.seg_id = seg.seg_id;
  out.point = lerp(g[best_edge], g[best_edge + 1], best_t);
  out.distance_m = haversine_m(p, out.point);
  double along = 0.0;
  for (std::size_t i = 0; i < best_edge; ++i) along += haversine_m(g[i], g[i + 1]);
  along += haversine_m(g[best_edge], out.point);
  out.param = seg.meta.length_m > 0.0 ? std::clamp(along / seg.meta.length_m, 0.0, 1.0) : 0.0;
  return out;
}

void QueryScratch::prepare(const RoadNetwork& net) {
  if (seg_stamp_.size() != net.segments.size()) seg_stamp_.assign(net.segments.size(), 0);
  if (road_stamp_.size() != net.roads.size()) {
    road_stamp_.assign(net.roads.size(), 0);
    road_best_.assign(net.roads.size(), 0.0);
  }
  if (++stamp_ == 0) {  // wrapped: reset
    std::fill(seg_stamp_.begin(), seg_stamp_.end(), 0);
    std::fill(road_stamp_.begin(), road_stamp_.end(), 0);
    stamp_ = 1;
  }
  found_.clear();
}

std::vector<RankedRoad> nearest_roads(const GeoPoint& p, const RoadNetwork& net, std::size_t k) {
  QueryScratch scratch;
  return nearest_roads(p, net, k, scratch);
}

std::vector<RankedRoad> nearest_roads(const GeoPoint& p, const RoadNetwork& net, std::size_t k,
                                      QueryScratch& s) {
  if (net.roads.empty() || net.index.empty()) {
    throw Error(ErrorKind::EmptyNetwork, "network has no named roads");
  }
  if (k == 0) return {};
  s.prepare(net);
  const SegmentGrid& grid = net.index;
  const auto home = grid.cell_of(p);

  auto visit_cell = [&](std::int64_t row, std::int64_t col) {
    for (std::uint32_t sid : grid.ids_in(row, col)) {
      if (s.seg_stamp_[sid] == s.stamp_) continue;
      s.seg_stamp_[sid] = s.stamp_;
      const RoadSegment& seg = net.segments[sid];
      if (seg.road == kNoRoad) continue;
      const double d = project_to_segment(p, seg).distance_m;
      const auto r = static_cast<std::size_t>(seg.road);
      if (s.road_stamp_[r] != s.stamp_) {
        s.road_stamp_[r] = s.stamp_;
        s.road_best_[r] = d;
        s.found_.push_back(seg.road);
      } else if (d < s.road_best_[r]) {
        s.road_best_[r] = d;
      }
    }
  };

  // Chebyshev distance from the home cell to the nearest grid cell.
  auto outside = [](std::int64_t v, std::int64_t n) {
    return v < 0 ? -v : (v >= n ? v - n + 1 : 0);
  };
  std::int64_t ring = std::max(outside(home.row, grid.rows()), outside(home.col, grid.cols()));
  std::vector<double> kth;
  for (;; ++ring) {
    const std::int64_t r0 = home.row - ring, r1 = home.row + ring;
    const std::int64_t c0 = home.col - ring, c1 = home.col + ring;
    for (std::int64_t r = std::max<std::int64_t>(r0, 0); r <= std::min(r1, grid.rows() - 1); ++r) {
      if (r == r0 || r == r1) {
        for (std::int64_t c = std::max<std::int64_t>(c0, 0); c <= std::min(c1, grid.cols() - 1); ++c) {
          visit_cell(r, c);
        }
      } else {
        if (c0 >= 0 && c0 < grid.cols()) visit_cell(r, c0);
        if (c1 != c0 && c1 >= 0 && c1 < grid.cols()) visit_cell(r, c1);
      }
    }
    if (grid.block_covers_grid(r0, r1, c0, c1)) break;
    if (s.found_.size() >= k) {
      kth.clear();
      for (RoadId r : s.found_) kth.push_back(s.road_best_[static_cast<std::size_t>(r)]);
      std::nth_element(kth.begin(), kth.begin() + static_cast<std::ptrdiff_t>(k - 1), kth.end());
      // Strict: an unseen road at exactly the bound could still win a name tie.
      if (kth[k - 1] < grid.distance_outside_block(p, r0, r1, c0, c1)) break;
    }
  }

  std::vector<std::pair<RoadId, double>> best;
  best.reserve(s.found_.size());
  for (RoadId r : s.found_) best.emplace_back(r, s.road_best_[static_cast<std::size_t>(r)]);
  return rank_roads(net, std::move(best), k);
}

std::size_t DirectionalResult::size() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return e.has_value(); }));
}

DirectionalResult DirectionalRanking::nearest() const {
  DirectionalResult out;
  for (std::size_t d = 0; d < 8; ++d) {
    if (!ranked[d].empty()) out.entries[d] = ranked[d].front();
  }
  return out;
}

DirectionalRanking directional_ranked(const GeoPoint& p, const RoadNetwork& net, double radius_m,
                                      std::size_t k) {
  if (!(radius_m > 0.0)) throw Error(ErrorKind::InvalidArgument, "sector radius must be positive");
  std::array<std::vector<std::pair<RoadId, double>>, 8> best;

  for (std::uint32_t sid : net.index.ids_overlapping(radius_bbox(p, radius_m))) {
    const RoadSegment& seg = net.segments[sid];
    if (seg.road == kNoRoad) continue;

    unsigned mask = 0;
    for (const GeoPoint& v : seg.geometry) {
      if (haversine_m(p, v) > radius_m) continue;
      mask |= v == p ? 0xFFu : 1u << index_of(compass_of(initial_bearing_deg(p, v)));
    }
    if (mask == 0) continue;

    const ProjectionResult proj = project_to_segment(p, seg);
    if (proj.distance_m > radius_m) continue;
    const unsigned dirs =
        proj.point == p ? mask : mask & (1u << index_of(compass_of(initial_bearing_deg(p, proj.point))));
    for (std::size_t d = 0; d < 8; ++d) {
      if ((dirs & (1u << d)) == 0) continue;
      auto& list = best[d];
      auto it = std::find_if(list.begin(), list.end(), [&](const auto& e) { return e.first == seg.road; });
      if (it == list.end()) {
        list.emplace_back(seg.road, proj.distance_m);
      } else if (proj.distance_m < it->second) {
        it->second = proj.distance_m;
      }
    }
  }

  DirectionalRanking out;
  for (std::size_t d = 0; d < 8; ++d) out.ranked[d] = rank_roads(net, std::move(best[d]), k);
  return out;
}

DirectionalResult directional_nearest(const GeoPoint& p, const RoadNetwork& net, double radius_m) {
  return directional_ranked(p, net, radius_m, 1).nearest();
}

double road_distance(const GeoPoint& p, const RoadNetwork& net, RoadId road) {
  double best = std::numeric_limits<double>::infinity();
  for (SegmentId sid : net.roads.at(static_cast<std::size_t>(road)).segment_ids) {
    best = std::min(best, project_to_segment(p, net.segments[sid]).distance_m);
  }
  return best;
}

std::vector<std::string> roads_within(const GeoPoint& p, const RoadNetwork& net, double radius_m) {
  std::vector<RoadId> hits;
  for (std::uint32_t sid : net.index.ids_overlapping(radius_bbox(p, radius_m))) {
    const RoadSegment& seg = net.segments[sid];
    if (seg.road == kNoRoad) continue;
    if (project_to_segment(p, seg).distance_m <= radius_m) hits.push_back(seg.road);
  }
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  std::vector<std::string> names;
  names.reserve(hits.size());
  for (RoadId r : hits) names.push_back(net.roads[static_cast<std::size_t>(r)].name);
  return names;  // roads are stored name-sorted, so ids ascend with names
}

}  // namespace roadmind
