#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "roadmind/road_graph.hpp"

namespace roadmind {

enum class CorpusFormat : std::uint8_t { R2I, P2S, S2I, R2C, PP_DIST, PP_DIR, P2DR };

inline constexpr std::array<CorpusFormat, 7> kAllFormats = {
    CorpusFormat::R2I, CorpusFormat::P2S, CorpusFormat::S2I, CorpusFormat::R2C,
    CorpusFormat::PP_DIST, CorpusFormat::PP_DIR, CorpusFormat::P2DR};

std::string_view to_string(CorpusFormat f);
std::optional<CorpusFormat> parse_format(std::string_view s);

struct FormatTemplates {
  std::string title;
  std::string body;
  std::string answer;
  std::vector<std::string> prompts;
};

/// Versioned prompt/answer wording. The default set is compiled in from
/// resources/templates.json.
struct TemplateSet {
  std::string version;
  std::map<CorpusFormat, FormatTemplates> formats;

  static const TemplateSet& builtin();
  static TemplateSet from_json(const nlohmann::json& doc);
  const FormatTemplates& at(CorpusFormat f) const;
};

/// Replaces every {key} in `tmpl`; unknown keys throw InvalidArgument.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& fields);

struct SupervisionItem {
  CorpusFormat format = CorpusFormat::R2I;
  std::string source_key;  // unique within a format; sorts deterministically
  std::string city;
  std::string pretrain_doc;  // title line, blank line, body
  std::vector<std::pair<std::string, std::string>> instruction_pairs;  // one per template
  nlohmann::ordered_json source_ids;
};

struct CorpusParams {
  std::string city = "unknown";
  std::uint64_t seed = 42;
  int coord_decimals = 5;
  double radius_m = 4000.0;
  double cell_km = 1.0;
  std::uint32_t p2s_per_segment = 2;
};

/// Points closer than this are resampled: their direction is ill-conditioned.
inline constexpr double kMinPairSeparationM = 10.0;

std::vector<SupervisionItem> gen_r2i(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates = TemplateSet::builtin());
std::vector<SupervisionItem> gen_p2s(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates = TemplateSet::builtin());
std::vector<SupervisionItem> gen_s2i(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates = TemplateSet::builtin());
std::vector<SupervisionItem> gen_r2c(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates = TemplateSet::builtin());

enum class PairKind { Distance, Direction };

struct PointPair {
  GeoPoint a;
  GeoPoint b;
};

/// Density-sampled pairs (two independent streams), snapped to the
/// rendering precision, with pairs under kMinPairSeparationM resampled.
std::vector<PointPair> sample_point_pairs(const RoadNetwork& net, std::uint64_t n,
                                          std::uint64_t seed, std::string_view stream,
                                          double cell_km, int coord_decimals);

std::vector<SupervisionItem> gen_point_pairs(const RoadNetwork& net, std::uint64_t n,
                                             PairKind kind, const CorpusParams& params,
                                             const TemplateSet& templates = TemplateSet::builtin());
std::vector<SupervisionItem> gen_p2dr(const RoadNetwork& net, std::uint64_t n,
                                      const CorpusParams& params,
                                      const TemplateSet& templates = TemplateSet::builtin());

// Shared renderings, also used when checking emitted corpora.
std::string render_speed(const std::optional<int>& kmh);
std::string render_lanes(const std::optional<int>& lanes);
std::string render_geometry(std::span<const GeoPoint> geometry, int decimals);
std::string render_meters(double meters);

enum class Flavor { Pretrain, Instruct };
std::string_view to_string(Flavor f);

struct CorpusManifest {
  std::string city;
  std::uint64_t seed = 0;
  Flavor flavor = Flavor::Pretrain;
  std::map<CorpusFormat, std::uint64_t> counts;
  std::uint64_t line_count = 0;
  std::string engine_version;
  std::string template_version;
  std::string extract_checksum;
  nlohmann::ordered_json params;

  nlohmann::ordered_json to_json() const;
};

struct EmitOptions {
  std::string city;
  std::uint64_t seed = 42;
  std::string extract_checksum;
  std::string template_version;
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

/// Sorts items by (format, source key), assigns instruct templates by
/// position within each format, shuffles with the seed and writes JSONL to
/// `path` plus `<path>.manifest.json`. Throws IoFailure.
CorpusManifest render_and_emit(std::vector<SupervisionItem> items, Flavor flavor,
                               const std::filesystem::path& path, const EmitOptions& options);

/// The JSONL text render_and_emit would write, without touching disk.
std::string render_corpus(std::vector<SupervisionItem> items, Flavor flavor,
                          const EmitOptions& options, CorpusManifest* manifest = nullptr);

}  // namespace roadmind
