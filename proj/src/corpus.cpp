#include "roadmind/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "roadmind/config.hpp"
#include "roadmind/error.hpp"
#include "roadmind/kernels.hpp"
#include "roadmind/sampling.hpp"
#include "roadmind/snapshot.hpp"
#include "roadmind/spatial.hpp"
#include "templates_data.hpp"

namespace roadmind {

using nlohmann::ordered_json;
using Fields = std::map<std::string, std::string>;

namespace {

std::string pad(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%010llu", static_cast<unsigned long long>(v));
  return buf;
}

ordered_json point_json(const GeoPoint& p) { return ordered_json::array({p.lat, p.lon}); }

SupervisionItem make_item(CorpusFormat format, std::string key, Fields fields,
                          ordered_json source_ids, const CorpusParams& params,
                          const TemplateSet& templates) {
  fields["city"] = params.city;
  const FormatTemplates& t = templates.at(format);
  SupervisionItem item;
  item.format = format;
  item.source_key = std::move(key);
  item.city = params.city;
  item.pretrain_doc = fill_template(t.title, fields) + "\n\n" + fill_template(t.body, fields);
  const std::string answer = fill_template(t.answer, fields);
  for (const auto& prompt : t.prompts) item.instruction_pairs.emplace_back(fill_template(prompt, fields), answer);
  item.source_ids = std::move(source_ids);
  return item;
}

Fields segment_fields(const RoadSegment& seg, int decimals) {
  return {{"road", seg.meta.name.value_or("an unnamed road")},
          {"road_type", seg.meta.road_type.name()},
          {"speed", render_speed(seg.meta.maxspeed_kmh)},
          {"lanes", render_lanes(seg.meta.lanes)},
          {"length_m", render_meters(seg.meta.length_m)},
          {"geometry", render_geometry(seg.geometry, decimals)},
          {"geometry_head", "from " + format_point(seg.geometry.front(), decimals) + " to " +
                                format_point(seg.geometry.back(), decimals)}};
}

}  // namespace

std::string_view to_string(CorpusFormat f) {
  switch (f) {
    case CorpusFormat::R2I: return "R2I";
    case CorpusFormat::P2S: return "P2S";
    case CorpusFormat::S2I: return "S2I";
    case CorpusFormat::R2C: return "R2C";
    case CorpusFormat::PP_DIST: return "PP_DIST";
    case CorpusFormat::PP_DIR: return "PP_DIR";
    case CorpusFormat::P2DR: return "P2DR";
  }
  return "?";
}

std::optional<CorpusFormat> parse_format(std::string_view s) {
  for (auto f : kAllFormats) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::string_view to_string(Flavor f) { return f == Flavor::Pretrain ? "pretrain" : "instruct"; }

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = from_json(nlohmann::json::parse(detail::kTemplatesJson));
  return set;
}

TemplateSet TemplateSet::from_json(const nlohmann::json& doc) {
  TemplateSet set;
  try {
    set.version = doc.at("version").get<std::string>();
    for (const auto& [name, spec] : doc.at("formats").items()) {
      auto format = parse_format(name);
      if (!format) throw Error(ErrorKind::SchemaError, "unknown corpus format '" + name + "' in templates");
      FormatTemplates t{spec.at("title").get<std::string>(), spec.at("body").get<std::string>(),
                        spec.at("answer").get<std::string>(),
                        spec.at("prompts").get<std::vector<std::string>>()};
      if (t.prompts.size() < 5) {
        throw Error(ErrorKind::SchemaError, "format " + name + " needs at least 5 prompt templates");
      }
      set.formats.emplace(*format, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("templates: ") + e.what());
  }
  for (auto f : kAllFormats) {
    if (!set.formats.contains(f)) {
      throw Error(ErrorKind::SchemaError, "templates missing format " + std::string(to_string(f)));
    }
  }
  return set;
}

const FormatTemplates& TemplateSet::at(CorpusFormat f) const { return formats.at(f); }

std::string fill_template(std::string_view tmpl, const Fields& fields) {
  std::string out;
  out.reserve(tmpl.size() * 2);
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find('{', i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) throw Error(ErrorKind::InvalidArgument, "unterminated placeholder");
    out.append(tmpl.substr(i, open - i));
    const std::string key(tmpl.substr(open + 1, close - open - 1));
    auto it = fields.find(key);
    if (it == fields.end()) throw Error(ErrorKind::InvalidArgument, "no value for placeholder {" + key + "}");
    out.append(it->second);
    i = close + 1;
  }
  return out;
}

std::string render_speed(const std::optional<int>& kmh) {
  return kmh ? std::to_string(*kmh) + " km/h" : std::string("unknown");
}

std::string render_lanes(const std::optional<int>& lanes) {
  return lanes ? std::to_string(*lanes) : std::string("unknown");
}

std::string render_geometry(std::span<const GeoPoint> geometry, int decimals) {
  std::string out = "[";
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    if (i > 0) out += ", ";
    out += format_point(geometry[i], decimals);
  }
  return out + "]";
}

std::string render_meters(double meters) { return std::to_string(std::llround(meters)); }

std::vector<SupervisionItem> gen_r2i(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates) {
  std::vector<SupervisionItem> items;
  items.reserve(net.roads.size());
  for (const auto& road : net.roads) {
    Fields f{{"road", road.name},
             {"road_type", road.meta.road_type.name()},
             {"speed", render_speed(road.meta.maxspeed_kmh)},
             {"lanes", render_lanes(road.meta.lanes)},
             {"length_m", render_meters(road.meta.total_length_m)},
             {"segments", std::to_string(road.meta.segment_count)}};
    items.push_back(make_item(CorpusFormat::R2I, road.name, std::move(f), {{"road", road.name}}, params, templates));
  }
  return items;
}

std::vector<SupervisionItem> gen_p2s(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates) {
  std::vector<SupervisionItem> items;
  items.reserve(net.segments.size() * params.p2s_per_segment);
  for (const auto& seg : net.segments) {
    Rng rng(derive_seed(params.seed, "p2s", seg.seg_id));
    for (std::uint32_t j = 0; j < params.p2s_per_segment; ++j) {
      const double u = rng.uniform01();
      const GeoPoint p = snap(interpolate_along(seg.geometry, u).point, params.coord_decimals);
      Fields f = segment_fields(seg, params.coord_decimals);
      f["point"] = format_point(p, params.coord_decimals);
      items.push_back(make_item(CorpusFormat::P2S, pad(seg.seg_id) + "-" + pad(j), std::move(f),
                                {{"segment", seg.seg_id}, {"sample", j}, {"param", u}, {"point", point_json(p)}},
                                params, templates));
    }
  }
  return items;
}

std::vector<SupervisionItem> gen_s2i(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates) {
  std::vector<SupervisionItem> items;
  for (const auto& seg : net.segments) {
    if (!seg.meta.name) continue;
    items.push_back(make_item(CorpusFormat::S2I, pad(seg.seg_id), segment_fields(seg, params.coord_decimals),
                              {{"segment", seg.seg_id}}, params, templates));
  }
  return items;
}

std::vector<SupervisionItem> gen_r2c(const RoadNetwork& net, const CorpusParams& params,
                                     const TemplateSet& templates) {
  std::vector<SupervisionItem> items;
  for (const auto& road : net.roads) {
    const auto conns = connected_roads(road.name, net);
    if (conns.empty()) continue;
    std::string rendered;
    std::set<std::string> distinct;
    for (const auto& c : conns) {
      if (!rendered.empty()) rendered += "; ";
      rendered += c.road + " at " + format_point(c.at, params.coord_decimals);
      distinct.insert(c.road);
    }
    Fields f{{"road", road.name}, {"connections", rendered}, {"count", std::to_string(distinct.size())}};
    items.push_back(make_item(CorpusFormat::R2C, road.name, std::move(f), {{"road", road.name}}, params, templates));
  }
  return items;
}

std::vector<PointPair> sample_point_pairs(const RoadNetwork& net, std::uint64_t n, std::uint64_t seed,
                                          std::string_view stream, double cell_km, int coord_decimals) {
  if (n == 0) return {};
  const std::string base(stream);
  auto draw = [&](const std::string& label, std::uint64_t attempt) {
    auto pts = density_sample(net, n, cell_km, derive_seed(seed, label, attempt));
    for (auto& p : pts) p = snap(p, coord_decimals);
    return pts;
  };
  const auto a = draw(base + "/a", 0);
  const auto b = draw(base + "/b", 0);
  std::map<std::uint64_t, std::vector<GeoPoint>> retries;

  std::vector<PointPair> pairs(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    GeoPoint second = b[i];
    std::uint64_t attempt = 0;
    while (haversine_m(a[i], second) < kMinPairSeparationM) {
      if (++attempt > 64) throw Error(ErrorKind::InvalidArgument, "AOI too small to draw separated point pairs");
      auto it = retries.find(attempt);
      if (it == retries.end()) it = retries.emplace(attempt, draw(base + "/retry", attempt)).first;
      second = it->second[i];
    }
    pairs[i] = {a[i], second};
  }
  return pairs;
}

std::vector<SupervisionItem> gen_point_pairs(const RoadNetwork& net, std::uint64_t n, PairKind kind,
                                             const CorpusParams& params, const TemplateSet& templates) {
  const bool distance = kind == PairKind::Distance;
  const auto pairs =
      sample_point_pairs(net, n, params.seed, distance ? "pp-dist" : "pp-dir", params.cell_km, params.coord_decimals);
  std::vector<SupervisionItem> items;
  items.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [a, b] = pairs[i];
    Fields f{{"p1", format_point(a, params.coord_decimals)}, {"p2", format_point(b, params.coord_decimals)}};
    if (distance) {
      f["distance_m"] = render_meters(haversine_m(a, b));
    } else {
      f["direction"] = std::string(to_string(compass_of(initial_bearing_deg(a, b))));
    }
    items.push_back(make_item(distance ? CorpusFormat::PP_DIST : CorpusFormat::PP_DIR, pad(i), std::move(f),
                              {{"p1", point_json(a)}, {"p2", point_json(b)}}, params, templates));
  }
  return items;
}

std::vector<SupervisionItem> gen_p2dr(const RoadNetwork& net, std::uint64_t n, const CorpusParams& params,
                                      const TemplateSet& templates) {
  if (n == 0) return {};
  auto points = density_sample(net, n, params.cell_km, derive_seed(params.seed, "p2dr"));
  for (auto& p : points) p = snap(p, params.coord_decimals);
  const auto results = kernels::omp::directional_batch(net, points, params.radius_m, 1);

  std::vector<SupervisionItem> items;
  items.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::string rendered;
    for (auto d : kAllDirections) {
      const auto& ranked = results[i].ranked[index_of(d)];
      if (ranked.empty()) continue;
      if (!rendered.empty()) rendered += "; ";
      rendered += std::string(to_string(d)) + ": " + ranked.front().name + " (" +
                  render_meters(ranked.front().distance_m) + " m)";
    }
    if (rendered.empty()) rendered = "none";
    Fields f{{"point", format_point(points[i], params.coord_decimals)},
             {"radius_m", render_meters(params.radius_m)},
             {"directions", rendered}};
    items.push_back(make_item(CorpusFormat::P2DR, pad(i), std::move(f), {{"point", point_json(points[i])}}, params,
                              templates));
  }
  return items;
}

ordered_json CorpusManifest::to_json() const {
  ordered_json counts_json = ordered_json::object();
  for (auto f : kAllFormats) counts_json[std::string(to_string(f))] = counts.contains(f) ? counts.at(f) : 0;
  return {{"city", city},
          {"seed", seed},
          {"flavor", to_string(flavor)},
          {"counts", counts_json},
          {"line_count", line_count},
          {"engine_version", engine_version},
          {"template_version", template_version},
          {"extract_checksum", extract_checksum},
          {"params", params}};
}

std::string render_corpus(std::vector<SupervisionItem> items, Flavor flavor, const EmitOptions& options,
                          CorpusManifest* manifest) {
  std::sort(items.begin(), items.end(), [](const SupervisionItem& a, const SupervisionItem& b) {
    return std::tie(a.format, a.source_key) < std::tie(b.format, b.source_key);
  });

  std::vector<std::string> lines;
  lines.reserve(items.size());
  std::map<CorpusFormat, std::uint64_t> counts;
  for (const auto& item : items) {
    const std::uint64_t position = counts[item.format]++;
    ordered_json line;
    if (flavor == Flavor::Pretrain) {
      line["text"] = item.pretrain_doc;
    } else {
      if (item.instruction_pairs.empty()) throw Error(ErrorKind::InvalidArgument, "item without instruction pairs");
      const auto& [prompt, answer] = item.instruction_pairs[position % item.instruction_pairs.size()];
      line["prompt"] = prompt;
      line["answer"] = answer;
    }
    line["format"] = to_string(item.format);
    line["city"] = item.city;
    lines.push_back(line.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  }

  Rng rng(derive_seed(options.seed, "emit", static_cast<std::uint64_t>(flavor)));
  rng.shuffle(lines);

  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  if (manifest != nullptr) {
    manifest->city = options.city;
    manifest->seed = options.seed;
    manifest->flavor = flavor;
    manifest->counts = std::move(counts);
    manifest->line_count = lines.size();
    manifest->engine_version = kEngineVersion;
    manifest->template_version = options.template_version;
    manifest->extract_checksum = options.extract_checksum;
    manifest->params = options.params;
  }
  return out;
}

CorpusManifest render_and_emit(std::vector<SupervisionItem> items, Flavor flavor, const std::filesystem::path& path,
                               const EmitOptions& options) {
  CorpusManifest manifest;
  const std::string text = render_corpus(std::move(items), flavor, options, &manifest);
  write_file(path, text);
  auto manifest_path = path;
  manifest_path += ".manifest.json";
  write_file(manifest_path, manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace roadmind
