#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "roadmind/road_graph.hpp"

namespace roadmind {

inline constexpr int kSnapshotVersion = 1;

/// A built network plus the provenance it was built with.
struct Snapshot {
  RoadNetwork network;
  std::string city;
  nlohmann::ordered_json config;  // resolved RunConfig at ingest time
  nlohmann::ordered_json ingest_stats;
};

/// Deterministic JSON document; roads and the spatial index are rebuilt on
/// load rather than stored.
nlohmann::ordered_json snapshot_to_json(const Snapshot& snapshot);
Snapshot snapshot_from_json(const nlohmann::ordered_json& doc, double index_cell_m);

void save_snapshot(const Snapshot& snapshot, const std::filesystem::path& path);
/// Throws IoFailure when unreadable, SchemaError on a bad document.
Snapshot load_snapshot(const std::filesystem::path& path, double index_cell_m = 500.0);

std::string sha256_hex(std::string_view bytes);
std::string file_sha256(const std::filesystem::path& path);

/// Writes `contents` to `path`, throwing IoFailure on any error.
void write_file(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace roadmind
