#include "corpus_verify.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "roadmind/spatial.hpp"

namespace roadmind::testing {

namespace {

struct Part {
  bool placeholder;
  std::string text;
};

std::vector<Part> split(const std::string& tmpl) {
  std::vector<Part> parts;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string::npos) {
      parts.push_back({false, tmpl.substr(i)});
      break;
    }
    if (open > i) parts.push_back({false, tmpl.substr(i, open - i)});
    const auto close = tmpl.find('}', open);
    parts.push_back({true, tmpl.substr(open + 1, close - open - 1)});
    i = close + 1;
  }
  return parts;
}

bool match_from(const std::vector<Part>& parts, std::size_t k, const std::string& text, std::size_t pos, Fields& out) {
  if (k == parts.size()) return pos == text.size();
  const Part& part = parts[k];
  if (!part.placeholder) {
    if (text.compare(pos, part.text.size(), part.text) != 0) return false;
    return match_from(parts, k + 1, text, pos + part.text.size(), out);
  }
  // The placeholder ends where the next literal (or the text) does.
  std::vector<std::size_t> ends;
  if (k + 1 == parts.size()) {
    ends.push_back(text.size());
  } else {
    const std::string& lit = parts[k + 1].text;
    for (auto at = text.find(lit, pos); at != std::string::npos; at = text.find(lit, at + 1)) ends.push_back(at);
  }
  for (std::size_t end : ends) {
    const std::string value = text.substr(pos, end - pos);
    auto it = out.find(part.text);
    if (it != out.end()) {
      if (it->second != value) continue;
      if (match_from(parts, k + 1, text, end, out)) return true;
      continue;
    }
    out[part.text] = value;
    if (match_from(parts, k + 1, text, end, out)) return true;
    out.erase(part.text);
  }
  return false;
}

std::optional<GeoPoint> parse_point(const std::string& s) {
  GeoPoint p;
  char tail = 0;
  if (std::sscanf(s.c_str(), "(%lf, %lf%c", &p.lat, &p.lon, &tail) != 3 || tail != ')') return std::nullopt;
  return p;
}

// Rendered integers must sit within half a unit of the engine's value.
bool near_int(const std::string& rendered, double truth) {
  char* end = nullptr;
  const double v = std::strtod(rendered.c_str(), &end);
  return end != rendered.c_str() && *end == '\0' && std::abs(v - truth) <= 0.5 + 1e-9;
}

std::string check_meta(const Fields& f, const SegmentMeta& m) {
  if (f.at("road_type") != m.road_type.name()) return "road_type " + f.at("road_type");
  if (f.at("speed") != render_speed(m.maxspeed_kmh)) return "speed " + f.at("speed");
  if (f.at("lanes") != render_lanes(m.lanes)) return "lanes " + f.at("lanes");
  if (!near_int(f.at("length_m"), m.length_m)) return "length " + f.at("length_m");
  return {};
}

std::string check(CorpusFormat format, const Fields& f, const RoadNetwork& net, const CorpusParams& params) {
  const int dec = params.coord_decimals;
  switch (format) {
    case CorpusFormat::R2I: {
      const NamedRoad* road = net.find_road(f.at("road"));
      if (road == nullptr) return "unknown road " + f.at("road");
      if (f.at("road_type") != road->meta.road_type.name()) return "road_type";
      if (f.at("speed") != render_speed(road->meta.maxspeed_kmh)) return "speed";
      if (f.at("lanes") != render_lanes(road->meta.lanes)) return "lanes";
      if (!near_int(f.at("length_m"), road->meta.total_length_m)) return "length";
      if (f.at("segments") != std::to_string(road->segment_ids.size())) return "segments";
      return {};
    }
    case CorpusFormat::P2S: {
      const auto p = parse_point(f.at("point"));
      if (!p) return "bad point " + f.at("point");
      // Snapping to `dec` decimals moves a point by at most half a unit per axis.
      const double slack = 0.5 * std::pow(10.0, -dec) * kEarthRadiusM * kDegToRad * std::sqrt(2.0) + 1e-6;
      std::string last = "no segment under point";
      for (const auto& seg : net.segments) {
        if (render_geometry(seg.geometry, dec) != f.at("geometry")) continue;
        if (project_to_segment(*p, seg).distance_m > slack) {
          last = "point off segment";
          continue;
        }
        if (f.at("road") != seg.meta.name.value_or("an unnamed road")) return "road " + f.at("road");
        return check_meta(f, seg.meta);
      }
      return last;
    }
    case CorpusFormat::S2I: {
      for (const auto& seg : net.segments) {
        if (render_geometry(seg.geometry, dec) != f.at("geometry")) continue;
        if (!seg.meta.name || f.at("road") != *seg.meta.name) continue;
        return check_meta(f, seg.meta);
      }
      return "no segment with that geometry and name";
    }
    case CorpusFormat::R2C: {
      std::string rendered;
      std::set<std::string> distinct;
      for (const auto& c : connected_roads(f.at("road"), net)) {
        if (!rendered.empty()) rendered += "; ";
        rendered += c.road + " at " + format_point(c.at, dec);
        distinct.insert(c.road);
      }
      if (rendered != f.at("connections")) return "connections";
      if (f.contains("count") && f.at("count") != std::to_string(distinct.size())) return "count";
      return {};
    }
    case CorpusFormat::PP_DIST:
    case CorpusFormat::PP_DIR: {
      const auto a = parse_point(f.at("p1"));
      const auto b = parse_point(f.at("p2"));
      if (!a || !b) return "bad points";
      if (format == CorpusFormat::PP_DIST) return near_int(f.at("distance_m"), haversine_m(*a, *b)) ? "" : "distance";
      return f.at("direction") == to_string(compass_of(initial_bearing_deg(*a, *b))) ? "" : "direction";
    }
    case CorpusFormat::P2DR: {
      const auto p = parse_point(f.at("point"));
      if (!p) return "bad point";
      const auto result = directional_nearest(*p, net, params.radius_m);
      std::string rendered;
      for (auto d : kAllDirections) {
        const auto& e = result.at(d);
        if (!e) continue;
        if (!rendered.empty()) rendered += "; ";
        rendered += std::string(to_string(d)) + ": " + e->name + " (" + render_meters(e->distance_m) + " m)";
      }
      if (rendered.empty()) rendered = "none";
      return rendered == f.at("directions") ? "" : "directions: " + f.at("directions") + " vs " + rendered;
    }
  }
  return "unknown format";
}

}  // namespace

std::optional<Fields> match_template(const std::string& tmpl, const std::string& text) {
  Fields out;
  if (!match_from(split(tmpl), 0, text, 0, out)) return std::nullopt;
  return out;
}

std::string verify_line(const nlohmann::json& line, const RoadNetwork& net, const CorpusParams& params,
                        const TemplateSet& templates) {
  const auto format = parse_format(line.at("format").get<std::string>());
  if (!format) return "unknown format";
  if (line.at("city").get<std::string>() != params.city) return "city";
  const FormatTemplates& t = templates.at(*format);
  Fields fields;
  if (line.contains("text")) {
    auto m = match_template(t.title + "\n\n" + t.body, line.at("text").get<std::string>());
    if (!m) return "text does not fit its template";
    fields = std::move(*m);
  } else {
    auto answer = match_template(t.answer, line.at("answer").get<std::string>());
    if (!answer) return "answer does not fit its template";
    std::optional<Fields> prompt;
    for (const auto& p : t.prompts) {
      if ((prompt = match_template(p, line.at("prompt").get<std::string>()))) break;
    }
    if (!prompt) return "prompt fits no template";
    fields = std::move(*answer);
    for (auto& [k, v] : *prompt) {
      auto [it, fresh] = fields.emplace(k, v);
      if (!fresh && it->second != v) return "prompt and answer disagree on " + k;
    }
  }
  if (fields.contains("city") && fields.at("city") != params.city) return "city field";
  // Instruction prompts may omit inputs the answer alone pins down.
  if (*format == CorpusFormat::R2C && !fields.contains("road")) return "no road";
  try {
    return check(*format, fields, net, params);
  } catch (const std::out_of_range&) {
    return "missing field";
  }
}

}  // namespace roadmind::testing
