#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "roadmind/geo.hpp"

namespace roadmind {

using OsmId = std::uint64_t;
using TagMap = std::map<std::string, std::string>;

struct OsmNode {
  OsmId id = 0;
  double lat = 0.0;
  double lon = 0.0;

  GeoPoint point() const { return {lat, lon}; }
};

struct OsmWay {
  OsmId id = 0;
  std::vector<OsmId> node_refs;
  TagMap tags;
};

enum class HighwayKind : std::uint8_t {
  Motorway,
  Trunk,
  Primary,
  Secondary,
  Tertiary,
  Residential,
  Service,
  Unclassified,
  LivingStreet,
  Other,
};

/// Road class from the `highway` tag; `raw` keeps the original value for
/// classes outside the known set.
struct HighwayClass {
  HighwayKind kind = HighwayKind::Other;
  std::string raw;

  static HighwayClass from_tag(std::string_view value);
  std::string name() const;
  // Position in the motorway -> service ordering, lower is a higher class.
  int rank() const { return static_cast<int>(kind); }

  friend bool operator==(const HighwayClass& a, const HighwayClass& b) {
    return a.kind == b.kind && (a.kind != HighwayKind::Other || a.raw == b.raw);
  }
  friend auto operator<=>(const HighwayClass& a, const HighwayClass& b) {
    if (auto c = a.rank() <=> b.rank(); c != 0) return c;
    return a.kind == HighwayKind::Other ? a.raw <=> b.raw
                                        : std::strong_ordering::equal;
  }
};

struct NormalizedTags {
  std::optional<std::string> name;
  HighwayClass highway_class;
  std::optional<int> maxspeed_kmh;
  std::optional<int> lanes;

  friend bool operator==(const NormalizedTags&, const NormalizedTags&) = default;
};

/// Total: anything unparseable comes back absent.
NormalizedTags normalize_tags(const TagMap& tags);

/// Renders normalized tags back to raw OSM form; normalize_tags of the
/// result reproduces the input.
TagMap render_tags(const NormalizedTags& tags);

std::optional<int> parse_maxspeed_kmh(std::string_view value);
std::optional<int> parse_lanes(std::string_view value);

struct IngestOptions {
  /// Keep footway/path/cycleway/steps/pedestrian/corridor/bridleway ways.
  bool include_non_motorized = false;
};

struct IngestStats {
  std::uint64_t nodes_seen = 0;
  std::uint64_t ways_seen = 0;
  std::uint64_t road_ways = 0;      // kept highway ways
  std::uint64_t excluded_ways = 0;  // highway ways filtered by class
  std::uint64_t dropped_ways = 0;   // dangling refs or fewer than 2 nodes
  std::uint64_t dangling_refs = 0;
  std::uint64_t duplicate_nodes = 0;
  std::uint64_t nodes_kept = 0;
  std::string checksum;  // sha256 of the source bytes
};

struct ParsedExtract {
  std::vector<OsmNode> nodes;  // sorted by id
  std::vector<OsmWay> ways;    // document order
  IngestStats stats;
  std::optional<BBox> declared_bounds;  // the <bounds> element, if any
};

/// A re-openable byte stream: parsing reads the source twice so memory
/// stays proportional to the road content, not the file size.
class ExtractSource {
 public:
  static ExtractSource file(std::filesystem::path path);
  static ExtractSource memory(std::string xml);

  std::string describe() const;

 private:
  friend ParsedExtract parse_extract(const ExtractSource&, const IngestOptions&);
  std::optional<std::filesystem::path> path_;
  std::string buffer_;
};

/// Streams an OSM 0.6 XML document and returns the road ways plus the nodes
/// they reference. Throws MalformedXml (with line/column) or EmptyExtract.
ParsedExtract parse_extract(const ExtractSource& source,
                            const IngestOptions& options = {});

}  // namespace roadmind
