#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "roadmind/geo.hpp"
#include "roadmind/road_graph.hpp"
#include "roadmind/spatial.hpp"

namespace roadmind {

enum class TaskKind : std::uint8_t {
  META_SPEED,
  META_LANES,
  META_LENGTH,
  META_NAME,
  DIST,
  DIR,
  RETRIEVAL,
  DIR_RETRIEVAL,
};

inline constexpr std::array<TaskKind, 8> kAllTaskKinds = {
    TaskKind::META_SPEED, TaskKind::META_LANES, TaskKind::META_LENGTH, TaskKind::META_NAME,
    TaskKind::DIST,       TaskKind::DIR,        TaskKind::RETRIEVAL,   TaskKind::DIR_RETRIEVAL};

std::string_view to_string(TaskKind k);
std::optional<TaskKind> parse_task_kind(std::string_view s);
bool is_meta(TaskKind k);

inline constexpr int kTaskSchemaVersion = 1;
inline constexpr double kAccuracyRadiusM = 1000.0;

/// One benchmark question with its ground truth. Which ground-truth fields
/// are populated depends on `kind`.
struct EvalTask {
  std::string task_id;
  TaskKind kind = TaskKind::DIST;
  std::vector<GeoPoint> query;  // one point, two for DIST/DIR

  std::optional<int> label_int;            // META_SPEED, META_LANES
  std::optional<double> value;             // META_LENGTH, DIST (meters)
  std::optional<std::string> label;        // META_NAME, DIR
  std::vector<RankedRoad> ranked;          // RETRIEVAL, length <= K
  std::array<std::vector<RankedRoad>, 8> directional;  // DIR_RETRIEVAL
  std::vector<std::string> within_1km;     // RETRIEVAL, DIR_RETRIEVAL
  std::optional<SegmentId> segment;        // META_*: source segment

  nlohmann::ordered_json to_json() const;
  static EvalTask from_json(const nlohmann::json& j);
};

struct EvalParams {
  std::uint32_t K = 10;
  double radius_m = 4000.0;
  double cell_km = 1.0;
  int coord_decimals = 5;
};

/// Builds n_per_kind tasks of every kind with disjoint RNG streams. META
/// speed/lane tasks draw only from segments carrying that attribute; a kind
/// with no eligible segment yields no tasks. Throws EmptyNetwork.
std::vector<EvalTask> gen_eval_suite(const RoadNetwork& net, std::uint64_t n_per_kind,
                                     std::uint64_t seed, const EvalParams& params = {});

/// Recomputes a task's ground truth from its query; used to check suites.
EvalTask recompute_ground_truth(const EvalTask& task, const RoadNetwork& net,
                                const EvalParams& params = {});

void write_tasks(const std::vector<EvalTask>& tasks, const std::filesystem::path& path);
/// Throws SchemaError on a malformed task file.
std::vector<EvalTask> read_tasks(const std::filesystem::path& path);
std::vector<EvalTask> parse_tasks(std::string_view jsonl);

struct Prediction {
  std::string task_id;
  std::string raw_text;
};

/// Throws SchemaError on a malformed prediction file.
std::vector<Prediction> parse_predictions(std::string_view jsonl);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

/// Maps free text to known road names: exact match of the normalized text,
/// otherwise the longest known name occurring with word boundaries.
class NameMatcher {
 public:
  explicit NameMatcher(const std::vector<std::string>& names);
  std::optional<std::string> match(std::string_view text) const;
  bool contains(std::string_view name) const;

 private:
  std::unordered_map<std::string, std::string> by_key_;  // match key -> name
  std::unordered_map<std::string, std::vector<std::string>> by_first_word_;  // keys
};

struct ParsedPrediction {
  std::optional<double> number;
  std::optional<CompassDirection> direction;
  std::optional<std::string> road;
  std::array<std::optional<std::string>, 8> per_direction;

  bool parsed() const;
};

/// Extraction rules: numeric kinds take the first number (distances accept
/// an m/km unit); DIR takes the first compass token as a whole word;
/// name kinds go through the matcher; DIR_RETRIEVAL reads "<dir>: <road>"
/// clauses separated by newlines or semicolons.
ParsedPrediction parse_prediction(std::string_view raw_text, TaskKind kind, const NameMatcher& names);

struct KindMetrics {
  std::uint64_t n = 0;
  std::uint64_t missing = 0;
  std::uint64_t unparsable = 0;
  std::vector<std::pair<std::string, double>> metrics;
  std::map<CompassDirection, KindMetrics> per_direction;

  std::optional<double> get(std::string_view name) const;
};

struct MetricReport {
  std::map<TaskKind, KindMetrics> kinds;
  std::uint64_t tasks = 0;
  std::uint64_t predictions = 0;
  std::uint64_t missing = 0;
  std::uint64_t unparsable = 0;

  double metric(TaskKind kind, std::string_view name) const;
  nlohmann::ordered_json to_json() const;
};

/// Scores predictions against tasks. Missing predictions count as wrong.
/// Throws SchemaError for predictions naming unknown or repeated task ids.
MetricReport score(const std::vector<EvalTask>& tasks, const std::vector<Prediction>& predictions,
                   const NameMatcher& names);

/// Known road names for parsing when no network is at hand: every name in
/// the tasks' ground truth.
std::vector<std::string> names_from_tasks(const std::vector<EvalTask>& tasks);

/// Grounding records keyed by task id: nearby road names for retrieval and
/// metadata tasks, plus AOI-level attribute distributions for metadata
/// tasks. Distance/direction tasks get no record.
std::vector<nlohmann::ordered_json> build_context_pack(const RoadNetwork& net,
                                                       const std::vector<EvalTask>& tasks,
                                                       double radius_m = 4000.0);
nlohmann::ordered_json attribute_distributions(const RoadNetwork& net);

struct QsfEntry {
  GeoPoint point;
  RankedRoad nearest;
  DirectionalResult directional;
};

struct QsfDatabase {
  std::vector<QsfEntry> entries;

  nlohmann::ordered_json to_json(int coord_decimals) const;
};

inline constexpr std::uint64_t kQsfDatabaseSize = 1000;
inline constexpr std::size_t kQsfNeighbors = 10;

QsfDatabase build_qsf_db(const RoadNetwork& net, std::uint64_t seed, std::uint64_t size = kQsfDatabaseSize,
                         const EvalParams& params = {});

struct QsfNeighbor {
  std::size_t index = 0;
  double distance_m = 0.0;
};

/// The m database points nearest to `p` by haversine, ascending, ties by
/// index. Returns every point when m exceeds the database size.
std::vector<QsfNeighbor> qsf_neighbors(const QsfDatabase& db, const GeoPoint& p,
                                       std::size_t m = kQsfNeighbors);

}  // namespace roadmind
