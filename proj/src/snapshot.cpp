#include "roadmind/snapshot.hpp"

#include <openssl/evp.h>

#include <fstream>
#include <sstream>

#include "roadmind/error.hpp"

namespace roadmind {

using nlohmann::ordered_json;

namespace {

ordered_json optional_int(const std::optional<int>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::optional<int> read_optional_int(const ordered_json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<int>();
}

}  // namespace

ordered_json snapshot_to_json(const Snapshot& snapshot) {
  const RoadNetwork& net = snapshot.network;
  ordered_json doc;
  doc["schema"] = "roadmind.network";
  doc["version"] = kSnapshotVersion;
  doc["city"] = snapshot.city;
  doc["source_checksum"] = net.source_checksum;
  doc["config"] = snapshot.config;
  doc["ingest_stats"] = snapshot.ingest_stats;
  doc["aoi"] = {{"min_lat", net.aoi_bbox.min_lat},
                {"max_lat", net.aoi_bbox.max_lat},
                {"min_lon", net.aoi_bbox.min_lon},
                {"max_lon", net.aoi_bbox.max_lon}};
  ordered_json segs = ordered_json::array();
  for (const auto& s : net.segments) {
    ordered_json geom = ordered_json::array();
    for (const auto& p : s.geometry) geom.push_back({p.lat, p.lon});
    segs.push_back({{"id", s.seg_id},
                    {"way", s.source_way},
                    {"position", s.source_position},
                    {"nodes", {s.endpoint_node_ids.first, s.endpoint_node_ids.second}},
                    {"name", s.meta.name ? ordered_json(*s.meta.name) : ordered_json(nullptr)},
                    {"highway", s.meta.road_type.name()},
                    {"maxspeed_kmh", optional_int(s.meta.maxspeed_kmh)},
                    {"lanes", optional_int(s.meta.lanes)},
                    {"length_m", s.meta.length_m},
                    {"geometry", std::move(geom)}});
  }
  doc["segments"] = std::move(segs);
  return doc;
}

Snapshot snapshot_from_json(const ordered_json& doc, double index_cell_m) {
  try {
    if (doc.at("schema") != "roadmind.network") throw Error(ErrorKind::SchemaError, "not a network snapshot");
    if (doc.at("version").get<int>() != kSnapshotVersion) {
      throw Error(ErrorKind::SchemaError, "unsupported snapshot version " + doc.at("version").dump());
    }
    Snapshot out;
    out.city = doc.at("city").get<std::string>();
    out.config = doc.value("config", ordered_json::object());
    out.ingest_stats = doc.value("ingest_stats", ordered_json::object());
    RoadNetwork& net = out.network;
    net.source_checksum = doc.at("source_checksum").get<std::string>();
    const auto& aoi = doc.at("aoi");
    net.aoi_bbox = {aoi.at("min_lat").get<double>(), aoi.at("max_lat").get<double>(),
                    aoi.at("min_lon").get<double>(), aoi.at("max_lon").get<double>()};

    std::map<std::string, std::vector<SegmentId>> by_name;
    for (const auto& js : doc.at("segments")) {
      RoadSegment s;
      s.seg_id = js.at("id").get<SegmentId>();
      if (s.seg_id != net.segments.size()) throw Error(ErrorKind::SchemaError, "segment ids must be dense and ordered");
      s.source_way = js.at("way").get<OsmId>();
      s.source_position = js.at("position").get<std::uint32_t>();
      s.endpoint_node_ids = {js.at("nodes").at(0).get<OsmId>(), js.at("nodes").at(1).get<OsmId>()};
      if (!js.at("name").is_null()) s.meta.name = js.at("name").get<std::string>();
      s.meta.road_type = HighwayClass::from_tag(js.at("highway").get<std::string>());
      s.meta.maxspeed_kmh = read_optional_int(js.at("maxspeed_kmh"));
      s.meta.lanes = read_optional_int(js.at("lanes"));
      s.meta.length_m = js.at("length_m").get<double>();
      for (const auto& p : js.at("geometry")) s.geometry.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      if (s.geometry.size() < 2) throw Error(ErrorKind::SchemaError, "segment with fewer than 2 points");
      if (s.meta.name) by_name[*s.meta.name].push_back(s.seg_id);
      net.node_adjacency[s.endpoint_node_ids.first].push_back(s.seg_id);
      if (s.endpoint_node_ids.second != s.endpoint_node_ids.first) {
        net.node_adjacency[s.endpoint_node_ids.second].push_back(s.seg_id);
      }
      net.segments.push_back(std::move(s));
    }
    if (net.segments.empty()) throw Error(ErrorKind::EmptyNetwork, "snapshot has no segments");
    for (auto& [name, ids] : by_name) {
      NamedRoad road{name, std::move(ids), {}};
      road.meta = aggregate_road_meta(road, net.segments);
      for (SegmentId id : road.segment_ids) net.segments[id].road = static_cast<RoadId>(net.roads.size());
      net.roads.push_back(std::move(road));
    }
    net.rebuild_index(index_cell_m);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("snapshot: ") + e.what());
  }
}

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path) {
  write_file(path, snapshot_to_json(snapshot).dump() + "\n");
}

Snapshot load_snapshot(const std::filesystem::path& path, double index_cell_m) {
  const std::string text = read_file(path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, path.string() + ": " + e.what());
  }
  return snapshot_from_json(doc, index_cell_m);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(digits[md[i] >> 4]);
    out.push_back(digits[md[i] & 0xF]);
  }
  return out;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace roadmind
