#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace roadmind {

inline constexpr const char* kEngineVersion = "roadmind-engine/1.0.0";

/// Resolved run configuration; serialized into every manifest and report.
struct RunConfig {
  std::string extract_path;
  std::string snapshot_path;
  std::string city = "unknown";
  std::uint64_t seed = 42;
  double r_m = 4000.0;           // directional retrieval radius
  double cell_km = 1.0;          // density sampling cell
  double index_cell_m = 500.0;   // spatial index cell
  std::uint32_t K = 10;          // ground-truth list length
  int coord_decimals = 5;
  bool include_non_motorized = false;

  // Corpus sizes.
  std::uint32_t p2s_per_segment = 2;
  std::uint64_t pp_dist_n = 10000;
  std::uint64_t pp_dir_n = 10000;
  std::uint64_t p2dr_n = 5000;

  // Evaluation.
  std::uint64_t n_per_kind = 500;
  double context_radius_m = 4000.0;
  std::uint64_t qsf_size = 1000;
  std::uint32_t qsf_m = 10;

  nlohmann::ordered_json to_json() const;
};

}  // namespace roadmind
