#include "roadmind/config.hpp"

namespace roadmind {

nlohmann::ordered_json RunConfig::to_json() const {
  return {{"extract_path", extract_path},
          {"snapshot_path", snapshot_path},
          {"city", city},
          {"seed", seed},
          {"r_m", r_m},
          {"cell_km", cell_km},
          {"index_cell_m", index_cell_m},
          {"K", K},
          {"coord_decimals", coord_decimals},
          {"include_non_motorized", include_non_motorized},
          {"p2s_per_segment", p2s_per_segment},
          {"pp_dist_n", pp_dist_n},
          {"pp_dir_n", pp_dir_n},
          {"p2dr_n", p2dr_n},
          {"n_per_kind", n_per_kind},
          {"context_radius_m", context_radius_m},
          {"qsf_size", qsf_size},
          {"qsf_m", qsf_m},
          {"engine_version", kEngineVersion}};
}

}  // namespace roadmind
