#include "roadmind/osm_ingest.hpp"

#include <expat.h>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "roadmind/error.hpp"
#include "roadmind/text.hpp"

namespace roadmind {
namespace {

const std::set<std::string, std::less<>> kNonMotorized = {
    "footway", "path", "cycleway", "steps", "pedestrian", "corridor", "bridleway"};

// Lifecycle and feature values that never describe a usable road.
const std::set<std::string, std::less<>> kNotARoad = {
    "proposed", "construction", "abandoned", "disused", "razed", "planned",
    "platform", "raceway", "bus_stop", "elevator", "escalator", "no"};

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Leading number of `s` (after whitespace) and the unparsed rest.
std::optional<std::pair<double, std::string_view>> leading_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr == s.data()) return std::nullopt;
  return std::make_pair(value, s.substr(static_cast<std::size_t>(ptr - s.data())));
}

}  // namespace

HighwayClass HighwayClass::from_tag(std::string_view value) {
  std::string v = text::trim(value);
  if (v.ends_with("_link")) v.resize(v.size() - 5);
  static const std::pair<std::string_view, HighwayKind> kKnown[] = {
      {"motorway", HighwayKind::Motorway},
      {"trunk", HighwayKind::Trunk},
      {"primary", HighwayKind::Primary},
      {"secondary", HighwayKind::Secondary},
      {"tertiary", HighwayKind::Tertiary},
      {"residential", HighwayKind::Residential},
      {"service", HighwayKind::Service},
      {"unclassified", HighwayKind::Unclassified},
      {"living_street", HighwayKind::LivingStreet},
  };
  for (const auto& [name, kind] : kKnown) {
    if (v == name) return {kind, std::string(name)};
  }
  return {HighwayKind::Other, std::string(text::trim(value))};
}

std::string HighwayClass::name() const { return raw; }

std::optional<int> parse_maxspeed_kmh(std::string_view value) {
  const std::string v = lower_ascii(text::trim(value));
  auto parsed = leading_number(v);
  if (!parsed) return std::nullopt;
  auto [number, rest_view] = *parsed;
  const std::string rest = text::trim(rest_view);
  double kmh = 0.0;
  if (rest.empty() || rest == "km/h" || rest == "kmh" || rest == "kph") {
    kmh = number;
  } else if (rest == "mph") {
    kmh = number * 1.609344;
  } else {
    return std::nullopt;
  }
  const long rounded = std::lround(kmh);
  if (!std::isfinite(kmh) || rounded <= 0) return std::nullopt;
  return static_cast<int>(rounded);
}

std::optional<int> parse_lanes(std::string_view value) {
  std::string_view rest = value;
  while (true) {
    const auto cut = rest.find(';');
    const std::string part = text::trim(rest.substr(0, cut));
    int lanes = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), lanes);
    if (ec == std::errc() && ptr == part.data() + part.size() && lanes >= 1) {
      return lanes;
    }
    if (cut == std::string_view::npos) return std::nullopt;
    rest.remove_prefix(cut + 1);
  }
}

NormalizedTags normalize_tags(const TagMap& tags) {
  NormalizedTags out;
  if (auto it = tags.find("name"); it != tags.end()) {
    std::string name = text::normalize_name(it->second);
    if (!name.empty()) out.name = std::move(name);
  }
  if (auto it = tags.find("highway"); it != tags.end()) {
    out.highway_class = HighwayClass::from_tag(it->second);
  }
  if (auto it = tags.find("maxspeed"); it != tags.end()) {
    out.maxspeed_kmh = parse_maxspeed_kmh(it->second);
  }
  if (auto it = tags.find("lanes"); it != tags.end()) {
    out.lanes = parse_lanes(it->second);
  }
  return out;
}

TagMap render_tags(const NormalizedTags& tags) {
  TagMap out;
  if (tags.name) out["name"] = *tags.name;
  out["highway"] = tags.highway_class.name();
  if (tags.maxspeed_kmh) out["maxspeed"] = std::to_string(*tags.maxspeed_kmh);
  if (tags.lanes) out["lanes"] = std::to_string(*tags.lanes);
  return out;
}

ExtractSource ExtractSource::file(std::filesystem::path path) {
  ExtractSource s;
  s.path_ = std::move(path);
  return s;
}

ExtractSource ExtractSource::memory(std::string xml) {
  ExtractSource s;
  s.buffer_ = std::move(xml);
  return s;
}

std::string ExtractSource::describe() const {
  return path_ ? path_->string() : std::string("<memory>");
}

namespace {

struct XmlParserDeleter {
  void operator()(XML_Parser p) const { XML_ParserFree(p); }
};
using XmlParserPtr = std::unique_ptr<std::remove_pointer_t<XML_Parser>, XmlParserDeleter>;

struct EvpDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

const char* attr(const XML_Char** atts, const char* key) {
  for (int i = 0; atts[i] != nullptr; i += 2) {
    if (std::strcmp(atts[i], key) == 0) return atts[i + 1];
  }
  return nullptr;
}

// Shared callback state for both passes. Errors raised inside expat
// callbacks are stashed and rethrown after XML_StopParser.
struct ParseState {
  XML_Parser parser = nullptr;
  std::string source_name;
  std::optional<Error> error;

  [[noreturn]] void fail(const std::string& msg) {
    throw Error(ErrorKind::MalformedXml,
                source_name + ":" + std::to_string(XML_GetCurrentLineNumber(parser)) +
                    ":" + std::to_string(XML_GetCurrentColumnNumber(parser)) + ": " + msg);
  }

  OsmId parse_id(const char* value, const char* what) {
    if (value == nullptr) fail(std::string("missing ") + what);
    OsmId id = 0;
    const auto len = std::strlen(value);
    auto [ptr, ec] = std::from_chars(value, value + len, id);
    if (ec != std::errc() || ptr != value + len) fail(std::string("bad ") + what + " '" + value + "'");
    return id;
  }

  double parse_degrees(const char* value, const char* what) {
    if (value == nullptr) fail(std::string("missing ") + what);
    double v = 0.0;
    const auto len = std::strlen(value);
    auto [ptr, ec] = std::from_chars(value, value + len, v);
    if (ec != std::errc() || ptr != value + len) fail(std::string("bad ") + what + " '" + value + "'");
    return v;
  }
};

// Pass 1: keep highway ways, remember declared bounds, hash the bytes.
struct WayPass : ParseState {
  const IngestOptions* options = nullptr;
  ParsedExtract* out = nullptr;
  bool in_way = false;
  OsmWay current;

  void start(const char* name, const XML_Char** atts) {
    if (std::strcmp(name, "way") == 0) {
      in_way = true;
      current = OsmWay{};
      current.id = parse_id(attr(atts, "id"), "way id");
      ++out->stats.ways_seen;
    } else if (in_way && std::strcmp(name, "nd") == 0) {
      current.node_refs.push_back(parse_id(attr(atts, "ref"), "nd ref"));
    } else if (in_way && std::strcmp(name, "tag") == 0) {
      const char* k = attr(atts, "k");
      const char* v = attr(atts, "v");
      if (k == nullptr || v == nullptr) fail("tag without k/v");
      current.tags.emplace(k, v);
    } else if (std::strcmp(name, "bounds") == 0) {
      BBox b;
      b.min_lat = parse_degrees(attr(atts, "minlat"), "minlat");
      b.max_lat = parse_degrees(attr(atts, "maxlat"), "maxlat");
      b.min_lon = parse_degrees(attr(atts, "minlon"), "minlon");
      b.max_lon = parse_degrees(attr(atts, "maxlon"), "maxlon");
      out->declared_bounds = b;
    }
  }

  void end(const char* name) {
    if (!in_way || std::strcmp(name, "way") != 0) return;
    in_way = false;
    auto hw = current.tags.find("highway");
    if (hw == current.tags.end()) return;
    const std::string value = text::trim(hw->second);
    if (kNotARoad.contains(value) ||
        (!options->include_non_motorized && kNonMotorized.contains(value))) {
      ++out->stats.excluded_ways;
      return;
    }
    out->ways.push_back(std::move(current));
  }
};

// Pass 2: collect the nodes referenced by kept ways.
struct NodePass : ParseState {
  const std::vector<OsmId>* needed = nullptr;
  ParsedExtract* out = nullptr;
  std::vector<bool> found;

  void start(const char* name, const XML_Char** atts) {
    if (std::strcmp(name, "node") != 0) return;
    ++out->stats.nodes_seen;
    const OsmId id = parse_id(attr(atts, "id"), "node id");
    auto it = std::lower_bound(needed->begin(), needed->end(), id);
    if (it == needed->end() || *it != id) return;
    const auto slot = static_cast<std::size_t>(it - needed->begin());
    if (found[slot]) {
      ++out->stats.duplicate_nodes;
      return;
    }
    OsmNode node{id, parse_degrees(attr(atts, "lat"), "lat"),
                 parse_degrees(attr(atts, "lon"), "lon")};
    if (!is_valid(node.point())) fail("node " + std::to_string(id) + " out of WGS84 range");
    found[slot] = true;
    out->nodes.push_back(node);
  }

  void end(const char*) {}
};

template <typename Pass>
void run_pass(const ExtractSource& source, const std::optional<std::filesystem::path>& path,
              const std::string& buffer, Pass& pass, EVP_MD_CTX* digest) {
  XmlParserPtr parser(XML_ParserCreate(nullptr));
  if (!parser) throw Error(ErrorKind::IoFailure, "cannot allocate XML parser");
  pass.parser = parser.get();
  pass.source_name = source.describe();
  XML_SetUserData(parser.get(), &pass);
  XML_SetElementHandler(
      parser.get(),
      [](void* ud, const XML_Char* name, const XML_Char** atts) {
        auto* p = static_cast<Pass*>(ud);
        if (p->error) return;
        try {
          p->start(name, atts);
        } catch (const Error& e) {
          p->error = e;
          XML_StopParser(p->parser, XML_FALSE);
        }
      },
      [](void* ud, const XML_Char* name) {
        auto* p = static_cast<Pass*>(ud);
        if (p->error) return;
        try {
          p->end(name);
        } catch (const Error& e) {
          p->error = e;
          XML_StopParser(p->parser, XML_FALSE);
        }
      });

  auto feed = [&](const char* data, std::size_t len, bool last) {
    if (digest != nullptr && len > 0) EVP_DigestUpdate(digest, data, len);
    if (XML_Parse(parser.get(), data, static_cast<int>(len), last ? XML_TRUE : XML_FALSE) ==
        XML_STATUS_ERROR) {
      if (pass.error) throw *pass.error;
      pass.fail(XML_ErrorString(XML_GetErrorCode(parser.get())));
    }
  };

  if (path) {
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path->string());
    std::vector<char> chunk(1 << 20);
    while (in) {
      in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
      const auto got = static_cast<std::size_t>(in.gcount());
      feed(chunk.data(), got, !in);
    }
    if (in.bad()) throw Error(ErrorKind::IoFailure, "read error on " + path->string());
  } else {
    constexpr std::size_t kChunk = 1 << 20;
    std::size_t offset = 0;
    do {
      const std::size_t len = std::min(kChunk, buffer.size() - offset);
      feed(buffer.data() + offset, len, offset + len == buffer.size());
      offset += len;
    } while (offset < buffer.size());
  }
  if (pass.error) throw *pass.error;
}

std::string hex(const unsigned char* data, unsigned len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0xF]);
  }
  return out;
}

}  // namespace

ParsedExtract parse_extract(const ExtractSource& source, const IngestOptions& options) {
  ParsedExtract out;

  std::unique_ptr<EVP_MD_CTX, EvpDeleter> digest(EVP_MD_CTX_new());
  EVP_DigestInit_ex(digest.get(), EVP_sha256(), nullptr);

  WayPass ways;
  ways.options = &options;
  ways.out = &out;
  run_pass(source, source.path_, source.buffer_, ways, digest.get());

  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned md_len = 0;
  EVP_DigestFinal_ex(digest.get(), md, &md_len);
  out.stats.checksum = hex(md, md_len);

  if (out.ways.empty()) {
    throw Error(ErrorKind::EmptyExtract, source.describe() + ": no highway ways");
  }

  std::vector<OsmId> needed;
  for (const auto& w : out.ways) needed.insert(needed.end(), w.node_refs.begin(), w.node_refs.end());
  std::sort(needed.begin(), needed.end());
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  NodePass nodes;
  nodes.needed = &needed;
  nodes.out = &out;
  nodes.found.assign(needed.size(), false);
  run_pass(source, source.path_, source.buffer_, nodes, nullptr);

  std::sort(out.nodes.begin(), out.nodes.end(),
            [](const OsmNode& a, const OsmNode& b) { return a.id < b.id; });
  auto has_node = [&](OsmId id) {
    return std::binary_search(out.nodes.begin(), out.nodes.end(), OsmNode{id, 0, 0},
                              [](const OsmNode& a, const OsmNode& b) { return a.id < b.id; });
  };

  std::vector<OsmWay> kept;
  kept.reserve(out.ways.size());
  for (auto& w : out.ways) {
    const auto missing = static_cast<std::uint64_t>(
        std::count_if(w.node_refs.begin(), w.node_refs.end(), [&](OsmId id) { return !has_node(id); }));
    if (missing > 0 || w.node_refs.size() < 2) {
      out.stats.dangling_refs += missing;
      ++out.stats.dropped_ways;
      continue;
    }
    kept.push_back(std::move(w));
  }
  out.ways = std::move(kept);
  if (out.ways.empty()) {
    throw Error(ErrorKind::EmptyExtract, source.describe() + ": no usable highway ways");
  }

  // Closure: drop nodes only referenced by dropped ways.
  std::vector<OsmId> referenced;
  for (const auto& w : out.ways) referenced.insert(referenced.end(), w.node_refs.begin(), w.node_refs.end());
  std::sort(referenced.begin(), referenced.end());
  referenced.erase(std::unique(referenced.begin(), referenced.end()), referenced.end());
  std::erase_if(out.nodes, [&](const OsmNode& n) {
    return !std::binary_search(referenced.begin(), referenced.end(), n.id);
  });

  out.stats.road_ways = out.ways.size();
  out.stats.nodes_kept = out.nodes.size();
  return out;
}

}  // namespace roadmind
