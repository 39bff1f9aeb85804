#include "roadmind/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <unordered_set>

#include "roadmind/corpus.hpp"
#include "roadmind/error.hpp"
#include "roadmind/kernels.hpp"
#include "roadmind/sampling.hpp"
#include "roadmind/snapshot.hpp"
#include "roadmind/text.hpp"

namespace roadmind {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(TaskKind k) {
  switch (k) {
    case TaskKind::META_SPEED: return "META_SPEED";
    case TaskKind::META_LANES: return "META_LANES";
    case TaskKind::META_LENGTH: return "META_LENGTH";
    case TaskKind::META_NAME: return "META_NAME";
    case TaskKind::DIST: return "DIST";
    case TaskKind::DIR: return "DIR";
    case TaskKind::RETRIEVAL: return "RETRIEVAL";
    case TaskKind::DIR_RETRIEVAL: return "DIR_RETRIEVAL";
  }
  return "?";
}

std::optional<TaskKind> parse_task_kind(std::string_view s) {
  for (auto k : kAllTaskKinds) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

bool is_meta(TaskKind k) {
  return k == TaskKind::META_SPEED || k == TaskKind::META_LANES || k == TaskKind::META_LENGTH ||
         k == TaskKind::META_NAME;
}

// ---------------------------------------------------------------------------
// Task (de)serialization

namespace {

ordered_json ranked_json(const std::vector<RankedRoad>& ranked) {
  ordered_json out = ordered_json::array();
  for (const auto& r : ranked) out.push_back({{"name", r.name}, {"distance_m", r.distance_m}});
  return out;
}

std::vector<RankedRoad> ranked_from(const json& j) {
  std::vector<RankedRoad> out;
  for (const auto& e : j) out.push_back({e.at("name").get<std::string>(), e.at("distance_m").get<double>()});
  return out;
}

std::string task_id(TaskKind kind, std::uint64_t i) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s-%06llu", std::string(to_string(kind)).c_str(),
                static_cast<unsigned long long>(i));
  return buf;
}

}  // namespace

ordered_json EvalTask::to_json() const {
  ordered_json j;
  j["version"] = kTaskSchemaVersion;
  j["task_id"] = task_id;
  j["kind"] = roadmind::to_string(kind);
  ordered_json q = ordered_json::array();
  for (const auto& p : query) q.push_back({p.lat, p.lon});
  j["query"] = std::move(q);
  switch (kind) {
    case TaskKind::META_SPEED:
    case TaskKind::META_LANES:
      j["ground_truth"] = *label_int;
      break;
    case TaskKind::META_LENGTH:
    case TaskKind::DIST:
      j["ground_truth"] = *value;
      break;
    case TaskKind::META_NAME:
    case TaskKind::DIR:
      j["ground_truth"] = *label;
      break;
    case TaskKind::RETRIEVAL:
      j["ground_truth"] = {{"ranked", ranked_json(ranked)}, {"within_1km", within_1km}};
      break;
    case TaskKind::DIR_RETRIEVAL: {
      ordered_json dirs = ordered_json::object();
      for (auto d : kAllDirections) {
        if (!directional[index_of(d)].empty()) dirs[std::string(roadmind::to_string(d))] = ranked_json(directional[index_of(d)]);
      }
      j["ground_truth"] = {{"ranked", std::move(dirs)}, {"within_1km", within_1km}};
      break;
    }
  }
  if (segment) j["segment_id"] = *segment;
  return j;
}

EvalTask EvalTask::from_json(const json& j) {
  try {
    if (j.at("version").get<int>() != kTaskSchemaVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported task version " + j.at("version").dump());
    }
    EvalTask t;
    t.task_id = j.at("task_id").get<std::string>();
    const auto kind = parse_task_kind(j.at("kind").get<std::string>());
    if (!kind) throw Error(ErrorKind::SchemaError, "unknown task kind " + j.at("kind").dump());
    t.kind = *kind;
    for (const auto& p : j.at("query")) t.query.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    const json& gt = j.at("ground_truth");
    switch (t.kind) {
      case TaskKind::META_SPEED:
      case TaskKind::META_LANES: t.label_int = gt.get<int>(); break;
      case TaskKind::META_LENGTH:
      case TaskKind::DIST: t.value = gt.get<double>(); break;
      case TaskKind::META_NAME:
      case TaskKind::DIR: t.label = gt.get<std::string>(); break;
      case TaskKind::RETRIEVAL:
        t.ranked = ranked_from(gt.at("ranked"));
        t.within_1km = gt.at("within_1km").get<std::vector<std::string>>();
        break;
      case TaskKind::DIR_RETRIEVAL:
        for (const auto& [name, list] : gt.at("ranked").items()) {
          auto d = parse_direction(name);
          if (!d) throw Error(ErrorKind::SchemaError, "bad direction key '" + name + "'");
          t.directional[index_of(*d)] = ranked_from(list);
        }
        t.within_1km = gt.at("within_1km").get<std::vector<std::string>>();
        break;
    }
    if (j.contains("segment_id")) t.segment = j.at("segment_id").get<SegmentId>();
    const std::size_t want = (t.kind == TaskKind::DIST || t.kind == TaskKind::DIR) ? 2 : 1;
    if (t.query.size() != want) throw Error(ErrorKind::SchemaError, t.task_id + ": wrong number of query points");
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("task: ") + e.what());
  }
}

namespace {

template <typename F>
void for_each_jsonl(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string line = text::trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    f(j, line_no);
  }
}

}  // namespace

void write_tasks(const std::vector<EvalTask>& tasks, const std::filesystem::path& path) {
  std::string out;
  for (const auto& t : tasks) {
    out += t.to_json().dump(-1, ' ', false, json::error_handler_t::replace);
    out += '\n';
  }
  write_file(path, out);
}

std::vector<EvalTask> parse_tasks(std::string_view jsonl) {
  std::vector<EvalTask> tasks;
  for_each_jsonl(jsonl, [&](const json& j, std::size_t) { tasks.push_back(EvalTask::from_json(j)); });
  return tasks;
}

std::vector<EvalTask> read_tasks(const std::filesystem::path& path) { return parse_tasks(read_file(path)); }

std::vector<Prediction> parse_predictions(std::string_view jsonl) {
  std::vector<Prediction> out;
  for_each_jsonl(jsonl, [&](const json& j, std::size_t line_no) {
    if (!j.is_object() || !j.contains("task_id") || !j.contains("raw_text") || !j["task_id"].is_string() ||
        !j["raw_text"].is_string()) {
      throw Error(ErrorKind::SchemaError,
                  "line " + std::to_string(line_no) + ": prediction needs string task_id and raw_text");
    }
    out.push_back({j["task_id"].get<std::string>(), j["raw_text"].get<std::string>()});
  });
  return out;
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  return parse_predictions(read_file(path));
}

// ---------------------------------------------------------------------------
// Suite generation

EvalTask recompute_ground_truth(const EvalTask& task, const RoadNetwork& net, const EvalParams& params) {
  EvalTask t;
  t.task_id = task.task_id;
  t.kind = task.kind;
  t.query = task.query;
  t.segment = task.segment;
  if (is_meta(task.kind)) {
    if (!task.segment || *task.segment >= net.segments.size()) {
      throw Error(ErrorKind::SchemaError, task.task_id + ": metadata task without a valid segment id");
    }
    const SegmentMeta& m = net.segments[*task.segment].meta;
    switch (task.kind) {
      case TaskKind::META_SPEED: t.label_int = m.maxspeed_kmh; break;
      case TaskKind::META_LANES: t.label_int = m.lanes; break;
      case TaskKind::META_LENGTH: t.value = m.length_m; break;
      default: t.label = m.name; break;
    }
    return t;
  }
  switch (task.kind) {
    case TaskKind::DIST: t.value = haversine_m(task.query.at(0), task.query.at(1)); break;
    case TaskKind::DIR:
      t.label = std::string(to_string(compass_of(initial_bearing_deg(task.query.at(0), task.query.at(1)))));
      break;
    case TaskKind::RETRIEVAL:
      t.ranked = nearest_roads(task.query.at(0), net, params.K);
      t.within_1km = roads_within(task.query.at(0), net, kAccuracyRadiusM);
      break;
    case TaskKind::DIR_RETRIEVAL:
      t.directional = directional_ranked(task.query.at(0), net, params.radius_m, params.K).ranked;
      t.within_1km = roads_within(task.query.at(0), net, kAccuracyRadiusM);
      break;
    default: break;
  }
  return t;
}

namespace {

std::pair<std::int64_t, std::int64_t> grid_key(const GeoPoint& p, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return {std::llround(p.lat * scale), std::llround(p.lon * scale)};
}

struct PairHash {
  std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
    return std::hash<std::int64_t>()(k.first) * 1000003u ^ std::hash<std::int64_t>()(k.second);
  }
};

std::vector<EvalTask> gen_meta(const RoadNetwork& net, TaskKind kind, std::uint64_t n, std::uint64_t seed,
                               const EvalParams& params,
                               const std::unordered_set<std::pair<std::int64_t, std::int64_t>, PairHash>& vertices) {
  std::vector<SegmentId> eligible;
  for (const auto& s : net.segments) {
    if (!s.meta.name) continue;
    if (kind == TaskKind::META_SPEED && !s.meta.maxspeed_kmh) continue;
    if (kind == TaskKind::META_LANES && !s.meta.lanes) continue;
    eligible.push_back(s.seg_id);
  }
  std::vector<EvalTask> tasks;
  if (eligible.empty()) return tasks;

  Rng rng(derive_seed(seed, "eval/" + std::string(to_string(kind))));
  std::uint64_t budget = 1000 * n + 1000;
  while (tasks.size() < n) {
    const RoadSegment& seg = net.segments[eligible[rng.below(eligible.size())]];
    // A few interior draws per segment; very short segments may have no
    // point farther than 1 m from every vertex.
    for (int attempt = 0; attempt < 8; ++attempt) {
      if (budget-- == 0) throw Error(ErrorKind::InvalidArgument, "could not place metadata task points");
      const double u = rng.uniform(0.1, 0.9);
      const GeoPoint p = snap(interpolate_along(seg.geometry, u).point, params.coord_decimals);
      if (vertices.contains(grid_key(p, params.coord_decimals))) continue;
      const bool near_vertex = std::any_of(seg.geometry.begin(), seg.geometry.end(),
                                           [&](const GeoPoint& v) { return haversine_m(p, v) < 1.0; });
      if (near_vertex) continue;
      if (project_to_segment(p, seg).distance_m >= 0.5) continue;
      EvalTask t;
      t.task_id = task_id(kind, tasks.size());
      t.kind = kind;
      t.query = {p};
      t.segment = seg.seg_id;
      tasks.push_back(recompute_ground_truth(t, net, params));
      break;
    }
  }
  return tasks;
}

bool strictly_ascending(const std::vector<RankedRoad>& r) {
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i - 1].distance_m < r[i].distance_m)) return false;
  }
  return true;
}

// Draws density-sampled query points, redrawing the slots whose answers
// `accept` rejects from fresh attempt streams.
template <typename Compute, typename Accept>
std::vector<GeoPoint> sample_queries(const RoadNetwork& net, std::uint64_t n, std::uint64_t seed,
                                     const std::string& stream, const EvalParams& params, Compute compute,
                                     Accept accept) {
  std::vector<GeoPoint> chosen(n);
  std::vector<std::size_t> pending(n);
  std::iota(pending.begin(), pending.end(), 0);
  for (std::uint64_t attempt = 0; !pending.empty(); ++attempt) {
    if (attempt > 64) throw Error(ErrorKind::InvalidArgument, "could not draw valid query points for " + stream);
    auto draw = density_sample(net, n, params.cell_km, derive_seed(seed, stream, attempt));
    std::vector<GeoPoint> candidates;
    for (std::size_t i : pending) candidates.push_back(snap(draw[i], params.coord_decimals));
    const auto results = compute(candidates);
    std::vector<std::size_t> still;
    for (std::size_t j = 0; j < pending.size(); ++j) {
      if (accept(results[j])) {
        chosen[pending[j]] = candidates[j];
      } else {
        still.push_back(pending[j]);
      }
    }
    pending = std::move(still);
  }
  return chosen;
}

}  // namespace

std::vector<EvalTask> gen_eval_suite(const RoadNetwork& net, std::uint64_t n_per_kind, std::uint64_t seed,
                                     const EvalParams& params) {
  if (net.segments.empty() || net.roads.empty()) throw Error(ErrorKind::EmptyNetwork, "network has no named roads");
  if (n_per_kind == 0) throw Error(ErrorKind::InvalidArgument, "n_per_kind must be >= 1");

  std::unordered_set<std::pair<std::int64_t, std::int64_t>, PairHash> vertices;
  for (const auto& s : net.segments) {
    for (const auto& v : s.geometry) vertices.insert(grid_key(v, params.coord_decimals));
  }

  std::vector<EvalTask> tasks;
  for (auto kind : {TaskKind::META_SPEED, TaskKind::META_LANES, TaskKind::META_LENGTH, TaskKind::META_NAME}) {
    auto part = gen_meta(net, kind, n_per_kind, seed, params, vertices);
    std::move(part.begin(), part.end(), std::back_inserter(tasks));
  }

  for (auto kind : {TaskKind::DIST, TaskKind::DIR}) {
    const auto pairs = sample_point_pairs(net, n_per_kind, seed, "eval/" + std::string(to_string(kind)),
                                          params.cell_km, params.coord_decimals);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      EvalTask t;
      t.task_id = task_id(kind, i);
      t.kind = kind;
      t.query = {pairs[i].a, pairs[i].b};
      tasks.push_back(recompute_ground_truth(t, net, params));
    }
  }

  {
    const auto points = sample_queries(
        net, n_per_kind, seed, "eval/RETRIEVAL", params,
        [&](const std::vector<GeoPoint>& q) { return kernels::omp::nearest_roads_batch(net, q, params.K); },
        [](const std::vector<RankedRoad>& r) { return !r.empty() && strictly_ascending(r); });
    const auto ranked = kernels::omp::nearest_roads_batch(net, points, params.K);
    for (std::size_t i = 0; i < points.size(); ++i) {
      EvalTask t;
      t.task_id = task_id(TaskKind::RETRIEVAL, i);
      t.kind = TaskKind::RETRIEVAL;
      t.query = {points[i]};
      t.ranked = ranked[i];
      t.within_1km = roads_within(points[i], net, kAccuracyRadiusM);
      tasks.push_back(std::move(t));
    }
  }

  {
    const auto points = sample_queries(
        net, n_per_kind, seed, "eval/DIR_RETRIEVAL", params,
        [&](const std::vector<GeoPoint>& q) {
          return kernels::omp::directional_batch(net, q, params.radius_m, params.K);
        },
        [](const DirectionalRanking& r) {
          return std::any_of(r.ranked.begin(), r.ranked.end(), [](const auto& l) { return !l.empty(); });
        });
    const auto ranked = kernels::omp::directional_batch(net, points, params.radius_m, params.K);
    for (std::size_t i = 0; i < points.size(); ++i) {
      EvalTask t;
      t.task_id = task_id(TaskKind::DIR_RETRIEVAL, i);
      t.kind = TaskKind::DIR_RETRIEVAL;
      t.query = {points[i]};
      t.directional = ranked[i].ranked;
      t.within_1km = roads_within(points[i], net, kAccuracyRadiusM);
      tasks.push_back(std::move(t));
    }
  }
  return tasks;
}

// ---------------------------------------------------------------------------
// Prediction parsing

namespace {

bool word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '\''; }

std::string first_word(std::string_view key) {
  std::size_t i = 0;
  while (i < key.size() && word_char(static_cast<unsigned char>(key[i]))) ++i;
  return std::string(key.substr(0, i));
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::optional<double> first_number(std::string_view text, bool with_unit) {
  static const std::regex kNumber(R"((\d{1,3}(?:,\d{3})+|\d+)(?:\.\d+)?|\.\d+)");
  const std::string s(text);
  std::smatch m;
  if (!std::regex_search(s, m, kNumber)) return std::nullopt;
  std::string digits = m.str(0);
  std::erase(digits, ',');
  double value = std::strtod(digits.c_str(), nullptr);
  const auto pos = static_cast<std::size_t>(m.position(0));
  if (pos > 0 && s[pos - 1] == '-') value = -value;
  if (!with_unit) return value;

  std::size_t i = pos + static_cast<std::size_t>(m.length(0));
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  const std::string rest = lower_ascii(std::string_view(s).substr(i, 12));
  auto unit_is = [&](std::string_view u) {
    return rest.starts_with(u) && (rest.size() == u.size() || !std::isalpha(static_cast<unsigned char>(rest[u.size()])));
  };
  if (unit_is("km") || rest.starts_with("kilomet")) value *= 1000.0;
  return value;
}

// Earliest whole-word token; longer tokens win at the same position.
std::optional<CompassDirection> first_direction(std::string_view text) {
  static const std::vector<std::pair<std::string, CompassDirection>> kTokens = {
      {"nw", CompassDirection::NW}, {"ne", CompassDirection::NE}, {"sw", CompassDirection::SW},
      {"se", CompassDirection::SE}, {"n", CompassDirection::N},   {"e", CompassDirection::E},
      {"s", CompassDirection::S},   {"w", CompassDirection::W}};
  static const std::vector<std::pair<std::string, CompassDirection>> kWords = {
      {"north-east", CompassDirection::NE}, {"northeast", CompassDirection::NE},
      {"north-west", CompassDirection::NW}, {"northwest", CompassDirection::NW},
      {"south-east", CompassDirection::SE}, {"southeast", CompassDirection::SE},
      {"south-west", CompassDirection::SW}, {"southwest", CompassDirection::SW},
      {"north", CompassDirection::N},       {"east", CompassDirection::E},
      {"south", CompassDirection::S},       {"west", CompassDirection::W}};
  const std::string s = lower_ascii(text);
  auto scan = [&](const auto& tokens) -> std::optional<CompassDirection> {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i > 0 && word_char(static_cast<unsigned char>(s[i - 1]))) continue;
      for (const auto& [tok, dir] : tokens) {
        if (s.compare(i, tok.size(), tok) != 0) continue;
        const std::size_t end = i + tok.size();
        if (end < s.size() && (word_char(static_cast<unsigned char>(s[end])) || s[end] == '-')) continue;
        return dir;
      }
    }
    return std::nullopt;
  };
  if (auto d = scan(kTokens)) return d;
  return scan(kWords);
}

}  // namespace

NameMatcher::NameMatcher(const std::vector<std::string>& names) {
  for (const auto& name : names) {
    std::string key = text::match_key(name);
    if (key.empty()) continue;
    if (by_key_.emplace(key, name).second) by_first_word_[first_word(key)].push_back(key);
  }
}

bool NameMatcher::contains(std::string_view name) const { return by_key_.contains(text::match_key(name)); }

std::optional<std::string> NameMatcher::match(std::string_view raw) const {
  std::string key = text::match_key(raw);
  while (!key.empty() && (key.back() == '.' || key.back() == '!' || key.back() == '"')) key.pop_back();
  if (auto it = by_key_.find(key); it != by_key_.end()) return it->second;

  const std::string* best = nullptr;
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i > 0 && word_char(static_cast<unsigned char>(key[i - 1]))) continue;
    for (const std::string& word : {first_word(std::string_view(key).substr(i)), std::string()}) {
      auto it = by_first_word_.find(word);
      if (it == by_first_word_.end()) continue;
      for (const std::string& cand : it->second) {
        if (key.compare(i, cand.size(), cand) != 0) continue;
        const std::size_t end = i + cand.size();
        if (end < key.size() && word_char(static_cast<unsigned char>(key[end])) &&
            word_char(static_cast<unsigned char>(cand.back()))) {
          continue;
        }
        if (best == nullptr || cand.size() > best->size()) best = &cand;
      }
      if (word.empty()) break;
    }
  }
  if (best == nullptr) return std::nullopt;
  return by_key_.at(*best);
}

bool ParsedPrediction::parsed() const {
  return number || direction || road ||
         std::any_of(per_direction.begin(), per_direction.end(), [](const auto& r) { return r.has_value(); });
}

ParsedPrediction parse_prediction(std::string_view raw_text, TaskKind kind, const NameMatcher& names) {
  ParsedPrediction out;
  switch (kind) {
    case TaskKind::META_SPEED:
    case TaskKind::META_LANES: out.number = first_number(raw_text, false); break;
    case TaskKind::META_LENGTH:
    case TaskKind::DIST: out.number = first_number(raw_text, true); break;
    case TaskKind::DIR: out.direction = first_direction(raw_text); break;
    case TaskKind::META_NAME:
    case TaskKind::RETRIEVAL: out.road = names.match(raw_text); break;
    case TaskKind::DIR_RETRIEVAL: {
      std::string clause;
      auto flush = [&] {
        const auto colon = clause.find(':');
        if (colon != std::string::npos) {
          if (auto d = first_direction(clause.substr(0, colon)); d && !out.per_direction[index_of(*d)]) {
            out.per_direction[index_of(*d)] = names.match(clause.substr(colon + 1));
          }
        }
        clause.clear();
      };
      for (char c : raw_text) {
        if (c == '\n' || c == ';') {
          flush();
        } else {
          clause.push_back(c);
        }
      }
      flush();
      break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Scoring

std::optional<double> KindMetrics::get(std::string_view name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

double MetricReport::metric(TaskKind kind, std::string_view name) const {
  auto it = kinds.find(kind);
  if (it == kinds.end()) throw Error(ErrorKind::InvalidArgument, "no tasks of kind " + std::string(to_string(kind)));
  auto v = it->second.get(name);
  if (!v) throw Error(ErrorKind::InvalidArgument, "no metric " + std::string(name));
  return *v;
}

namespace {

ordered_json metrics_json(const KindMetrics& m) {
  ordered_json j;
  j["n"] = m.n;
  j["missing"] = m.missing;
  j["unparsable"] = m.unparsable;
  for (const auto& [k, v] : m.metrics) j[k] = std::isnan(v) ? ordered_json(nullptr) : ordered_json(v);
  if (!m.per_direction.empty()) {
    ordered_json dirs = ordered_json::object();
    for (const auto& [d, dm] : m.per_direction) dirs[std::string(to_string(d))] = metrics_json(dm);
    j["per_direction"] = std::move(dirs);
  }
  return j;
}

struct Categorical {
  std::vector<std::pair<std::string, std::optional<std::string>>> rows;  // truth, prediction

  void add_metrics(KindMetrics& m) const {
    std::set<std::string> classes;
    std::uint64_t correct = 0;
    for (const auto& [truth, pred] : rows) {
      classes.insert(truth);
      if (pred && *pred == truth) ++correct;
    }
    double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
    for (const auto& c : classes) {
      std::uint64_t tp = 0, fp = 0, fn = 0;
      for (const auto& [truth, pred] : rows) {
        const bool predicted = pred && *pred == c;
        if (predicted && truth == c) ++tp;
        if (predicted && truth != c) ++fp;
        if (!predicted && truth == c) ++fn;
      }
      const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
      const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
      const double f1 = precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
      p_sum += precision;
      r_sum += recall;
      f_sum += f1;
    }
    const double k = classes.empty() ? 1.0 : static_cast<double>(classes.size());
    m.metrics.emplace_back("Accuracy", rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(rows.size()));
    m.metrics.emplace_back("Precision", p_sum / k);
    m.metrics.emplace_back("Recall", r_sum / k);
    m.metrics.emplace_back("F1", f_sum / k);
  }
};

struct RankingStats {
  std::uint64_t n = 0, hit1 = 0, hit5 = 0, near = 0;
  double rr = 0.0;

  void add(const std::vector<RankedRoad>& ranked, const std::vector<std::string>& within,
           const std::optional<std::string>& pred) {
    ++n;
    if (!pred) return;
    const std::string key = text::match_key(*pred);
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (text::match_key(ranked[i].name) != key) continue;
      if (i < 1) ++hit1;
      if (i < 5) ++hit5;
      rr += 1.0 / static_cast<double>(i + 1);
      break;
    }
    if (std::any_of(within.begin(), within.end(), [&](const std::string& w) { return text::match_key(w) == key; })) {
      ++near;
    }
  }

  void add_metrics(KindMetrics& m) const {
    const double d = n == 0 ? 1.0 : static_cast<double>(n);
    m.metrics.emplace_back("H@1", static_cast<double>(hit1) / d);
    m.metrics.emplace_back("H@5", static_cast<double>(hit5) / d);
    m.metrics.emplace_back("A@1km", static_cast<double>(near) / d);
    m.metrics.emplace_back("MRR", rr / d);
  }
};

}  // namespace

ordered_json MetricReport::to_json() const {
  ordered_json j;
  j["schema"] = "roadmind.report";
  j["version"] = 1;
  j["tasks"] = tasks;
  j["predictions"] = predictions;
  j["missing"] = missing;
  j["unparsable"] = unparsable;
  j["conventions"] = {
      {"hit_at_k", "predicted road within the top-k ground-truth roads"},
      {"mrr", "reciprocal rank in the ground-truth list, 0 beyond its length"},
      {"macro", "unweighted mean over classes present in ground truth"},
      {"mape", "mean over parsed predictions; A@30% counts unparsed as misses"},
      {"directional", "per-direction metrics averaged over directions present in ground truth"},
  };
  ordered_json k = ordered_json::object();
  for (const auto& [kind, m] : kinds) k[std::string(to_string(kind))] = metrics_json(m);
  j["metrics"] = std::move(k);
  return j;
}

std::vector<std::string> names_from_tasks(const std::vector<EvalTask>& tasks) {
  std::set<std::string> names;
  for (const auto& t : tasks) {
    if (t.kind == TaskKind::META_NAME && t.label) names.insert(*t.label);
    for (const auto& r : t.ranked) names.insert(r.name);
    for (const auto& list : t.directional) {
      for (const auto& r : list) names.insert(r.name);
    }
    names.insert(t.within_1km.begin(), t.within_1km.end());
  }
  return {names.begin(), names.end()};
}

MetricReport score(const std::vector<EvalTask>& tasks, const std::vector<Prediction>& predictions,
                   const NameMatcher& names) {
  std::unordered_map<std::string, const EvalTask*> by_id;
  for (const auto& t : tasks) {
    if (!by_id.emplace(t.task_id, &t).second) throw Error(ErrorKind::SchemaError, "duplicate task id " + t.task_id);
  }
  std::unordered_map<std::string, const Prediction*> pred_by_id;
  for (const auto& p : predictions) {
    if (!by_id.contains(p.task_id)) throw Error(ErrorKind::SchemaError, "prediction for unknown task " + p.task_id);
    if (!pred_by_id.emplace(p.task_id, &p).second) {
      throw Error(ErrorKind::SchemaError, "more than one prediction for task " + p.task_id);
    }
  }

  // Fixed processing order makes every sum independent of input order.
  std::vector<const EvalTask*> ordered;
  for (const auto& t : tasks) ordered.push_back(&t);
  std::sort(ordered.begin(), ordered.end(), [](const EvalTask* a, const EvalTask* b) { return a->task_id < b->task_id; });

  MetricReport report;
  report.tasks = tasks.size();
  report.predictions = predictions.size();

  std::map<TaskKind, Categorical> categorical;
  std::map<TaskKind, std::pair<double, std::uint64_t>> ape;  // sum, parsed count
  std::map<TaskKind, std::uint64_t> within30;
  std::map<TaskKind, std::uint64_t> name_correct;
  RankingStats retrieval;
  std::map<CompassDirection, RankingStats> directional;

  for (const EvalTask* t : ordered) {
    KindMetrics& km = report.kinds[t->kind];
    ++km.n;
    auto pit = pred_by_id.find(t->task_id);
    ParsedPrediction parsed;
    if (pit == pred_by_id.end()) {
      ++km.missing;
      ++report.missing;
    } else {
      parsed = parse_prediction(pit->second->raw_text, t->kind, names);
      if (!parsed.parsed()) {
        ++km.unparsable;
        ++report.unparsable;
      }
    }

    switch (t->kind) {
      case TaskKind::META_SPEED:
      case TaskKind::META_LANES: {
        std::optional<std::string> pred;
        if (parsed.number) pred = std::to_string(std::llround(*parsed.number));
        categorical[t->kind].rows.emplace_back(std::to_string(*t->label_int), pred);
        break;
      }
      case TaskKind::DIR: {
        std::optional<std::string> pred;
        if (parsed.direction) pred = std::string(to_string(*parsed.direction));
        categorical[t->kind].rows.emplace_back(*t->label, pred);
        break;
      }
      case TaskKind::META_LENGTH:
      case TaskKind::DIST: {
        auto& [sum, count] = ape[t->kind];
        if (parsed.number) {
          const double rel = std::abs(*parsed.number - *t->value) / std::abs(*t->value);
          sum += rel;
          ++count;
          if (rel <= 0.30) ++within30[t->kind];
        }
        break;
      }
      case TaskKind::META_NAME:
        if (parsed.road && text::match_key(*parsed.road) == text::match_key(*t->label)) ++name_correct[t->kind];
        break;
      case TaskKind::RETRIEVAL:
        retrieval.add(t->ranked, t->within_1km, parsed.road);
        break;
      case TaskKind::DIR_RETRIEVAL:
        for (auto d : kAllDirections) {
          const auto& truth = t->directional[index_of(d)];
          if (truth.empty()) continue;
          directional[d].add(truth, t->within_1km, parsed.per_direction[index_of(d)]);
        }
        break;
    }
  }

  for (auto& [kind, km] : report.kinds) {
    switch (kind) {
      case TaskKind::META_SPEED:
      case TaskKind::META_LANES:
      case TaskKind::DIR: categorical[kind].add_metrics(km); break;
      case TaskKind::META_LENGTH:
      case TaskKind::DIST: {
        const auto& [sum, count] = ape[kind];
        // Undefined with nothing parsed; serialized as null.
        km.metrics.emplace_back("MAPE", count == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                   : sum / static_cast<double>(count));
        km.metrics.emplace_back("A@30%", static_cast<double>(within30[kind]) / static_cast<double>(km.n));
        break;
      }
      case TaskKind::META_NAME:
        km.metrics.emplace_back("Accuracy", static_cast<double>(name_correct[kind]) / static_cast<double>(km.n));
        break;
      case TaskKind::RETRIEVAL: retrieval.add_metrics(km); break;
      case TaskKind::DIR_RETRIEVAL: {
        std::map<std::string, double> sums;
        std::vector<std::string> order;
        for (const auto& [d, stats] : directional) {
          KindMetrics dm;
          dm.n = stats.n;
          stats.add_metrics(dm);
          for (const auto& [name, v] : dm.metrics) {
            if (!sums.contains(name)) order.push_back(name);
            sums[name] += v;
          }
          km.per_direction.emplace(d, std::move(dm));
        }
        const double dirs = directional.empty() ? 1.0 : static_cast<double>(directional.size());
        for (const auto& name : order) km.metrics.emplace_back(name, sums[name] / dirs);
        if (order.empty()) {
          for (const char* name : {"H@1", "H@5", "A@1km", "MRR"}) km.metrics.emplace_back(name, 0.0);
        }
        break;
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Baseline aids

ordered_json attribute_distributions(const RoadNetwork& net) {
  std::map<int, std::uint64_t> speeds, lanes;
  std::vector<double> lengths;
  for (const auto& s : net.segments) {
    if (s.meta.maxspeed_kmh) ++speeds[*s.meta.maxspeed_kmh];
    if (s.meta.lanes) ++lanes[*s.meta.lanes];
    lengths.push_back(s.meta.length_m);
  }
  std::vector<std::pair<int, std::uint64_t>> speed_list(speeds.begin(), speeds.end());
  std::stable_sort(speed_list.begin(), speed_list.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  ordered_json speed_json = ordered_json::array();
  for (const auto& [v, c] : speed_list) speed_json.push_back({{"maxspeed_kmh", v}, {"segments", c}});
  ordered_json lane_json = ordered_json::array();
  for (const auto& [v, c] : lanes) lane_json.push_back({{"lanes", v}, {"segments", c}});

  std::sort(lengths.begin(), lengths.end());
  // Linear interpolation between order statistics.
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(lengths.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, lengths.size() - 1);
    return lengths[lo] + (pos - static_cast<double>(lo)) * (lengths[hi] - lengths[lo]);
  };
  return {{"maxspeed_values", speed_json},
          {"lane_histogram", lane_json},
          {"segment_length_quartiles_m", {{"q1", quantile(0.25)}, {"median", quantile(0.5)}, {"q3", quantile(0.75)}}},
          {"segments", net.segments.size()}};
}

std::vector<ordered_json> build_context_pack(const RoadNetwork& net, const std::vector<EvalTask>& tasks,
                                             double radius_m) {
  const ordered_json dist = attribute_distributions(net);
  std::vector<ordered_json> records(tasks.size());
  std::vector<bool> keep(tasks.size(), false);
  const auto n = static_cast<std::int64_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    const EvalTask& t = tasks[static_cast<std::size_t>(i)];
    if (t.kind == TaskKind::DIST || t.kind == TaskKind::DIR) continue;
    ordered_json r;
    r["task_id"] = t.task_id;
    r["kind"] = to_string(t.kind);
    r["radius_m"] = radius_m;
    r["nearby_roads"] = roads_within(t.query.at(0), net, radius_m);
    if (is_meta(t.kind)) r["distributions"] = dist;
    records[static_cast<std::size_t>(i)] = std::move(r);
    keep[static_cast<std::size_t>(i)] = true;
  }
  std::vector<ordered_json> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(std::move(records[i]));
  }
  return out;
}

QsfDatabase build_qsf_db(const RoadNetwork& net, std::uint64_t seed, std::uint64_t size, const EvalParams& params) {
  auto points = density_sample(net, size, params.cell_km, derive_seed(seed, "qsf"));
  for (auto& p : points) p = snap(p, params.coord_decimals);
  const auto nearest = kernels::omp::nearest_roads_batch(net, points, 1);
  const auto directional = kernels::omp::directional_batch(net, points, params.radius_m, 1);
  QsfDatabase db;
  db.entries.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    db.entries.push_back({points[i], nearest[i].at(0), directional[i].nearest()});
  }
  return db;
}

ordered_json QsfDatabase::to_json(int coord_decimals) const {
  ordered_json pts = ordered_json::array();
  for (const auto& e : entries) {
    ordered_json dirs = ordered_json::object();
    for (auto d : kAllDirections) {
      if (const auto& r = e.directional.at(d)) dirs[std::string(to_string(d))] = {{"name", r->name}, {"distance_m", r->distance_m}};
    }
    pts.push_back({{"point", {e.point.lat, e.point.lon}},
                   {"text", format_point(e.point, coord_decimals)},
                   {"nearest", {{"name", e.nearest.name}, {"distance_m", e.nearest.distance_m}}},
                   {"directional", std::move(dirs)}});
  }
  return {{"schema", "roadmind.qsf"}, {"version", 1}, {"size", entries.size()}, {"points", std::move(pts)}};
}

std::vector<QsfNeighbor> qsf_neighbors(const QsfDatabase& db, const GeoPoint& p, std::size_t m) {
  std::vector<QsfNeighbor> all(db.entries.size());
  for (std::size_t i = 0; i < db.entries.size(); ++i) all[i] = {i, haversine_m(p, db.entries[i].point)};
  const std::size_t take = std::min(m, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                    [](const QsfNeighbor& a, const QsfNeighbor& b) {
                      return a.distance_m != b.distance_m ? a.distance_m < b.distance_m : a.index < b.index;
                    });
  all.resize(take);
  return all;
}

}  // namespace roadmind
