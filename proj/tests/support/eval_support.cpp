#include "eval_support.hpp"

#include <cstdio>

namespace roadmind::testing {

std::string perfect_answer(const EvalTask& t) {
  char buf[64];
  switch (t.kind) {
    case TaskKind::META_SPEED: return std::to_string(*t.label_int) + " km/h";
    case TaskKind::META_LANES: return std::to_string(*t.label_int) + " lanes";
    case TaskKind::META_LENGTH:
    case TaskKind::DIST:
      std::snprintf(buf, sizeof buf, "%.17g m", *t.value);
      return buf;
    case TaskKind::META_NAME:
    case TaskKind::DIR: return *t.label;
    case TaskKind::RETRIEVAL: return t.ranked.front().name;
    case TaskKind::DIR_RETRIEVAL: {
      std::string out;
      for (auto d : kAllDirections) {
        const auto& list = t.directional[index_of(d)];
        if (list.empty()) continue;
        out += std::string(to_string(d)) + ": " + list.front().name + "\n";
      }
      return out;
    }
  }
  return {};
}

std::vector<Prediction> perfect_predictions(const std::vector<EvalTask>& tasks) {
  std::vector<Prediction> out;
  for (const auto& t : tasks) out.push_back({t.task_id, perfect_answer(t)});
  return out;
}

}  // namespace roadmind::testing
