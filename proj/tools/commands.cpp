#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "roadmind/config.hpp"
#include "roadmind/corpus.hpp"
#include "roadmind/error.hpp"
#include "roadmind/eval.hpp"
#include "roadmind/osm_ingest.hpp"
#include "roadmind/road_graph.hpp"
#include "roadmind/snapshot.hpp"

namespace roadmind::cli {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

ordered_json stats_json(const IngestStats& s) {
  return {{"nodes_seen", s.nodes_seen},         {"ways_seen", s.ways_seen},
          {"road_ways", s.road_ways},           {"excluded_ways", s.excluded_ways},
          {"dropped_ways", s.dropped_ways},     {"dangling_refs", s.dangling_refs},
          {"duplicate_nodes", s.duplicate_nodes}, {"nodes_kept", s.nodes_kept},
          {"checksum", s.checksum}};
}

void print_summary(const Snapshot& snap, std::ostream& out) {
  const RoadNetwork& net = snap.network;
  const BBox& b = net.aoi_bbox;
  out << "city:            " << snap.city << "\n";
  out << "area bbox:       [" << fixed(b.min_lat, 5) << ", " << fixed(b.min_lon, 5) << "] - [" << fixed(b.max_lat, 5)
      << ", " << fixed(b.max_lon, 5) << "]\n";
  out << "area:            " << fixed(b.area_km2(), 1) << " km2\n";
  out << "road segments:   " << net.segments.size() << "\n";
  out << "named segments:  " << net.named_segment_count() << "\n";
  out << "named roads:     " << net.roads.size() << "\n";
  out << "total length:    " << fixed(net.total_length_m() / 1000.0, 1) << " km\n";
  out << "source sha256:   " << net.source_checksum << "\n";
  if (!snap.ingest_stats.empty()) {
    out << "ingest stats:\n";
    for (const auto& [k, v] : snap.ingest_stats.items()) {
      if (k != "checksum") out << "  " << k << ": " << v.dump() << "\n";
    }
  }
}

EvalParams eval_params(const RunConfig& c) {
  EvalParams p;
  p.K = c.K;
  p.radius_m = c.r_m;
  p.cell_km = c.cell_km;
  p.coord_decimals = c.coord_decimals;
  return p;
}

// Outputs record the snapshot's city unless --city overrides it.
RunConfig resolved(RunConfig c, const Snapshot& snap) {
  if (c.city == "unknown") c.city = snap.city;
  return c;
}

CorpusParams corpus_params(const RunConfig& c, const std::string& city) {
  CorpusParams p;
  p.city = city;
  p.seed = c.seed;
  p.coord_decimals = c.coord_decimals;
  p.radius_m = c.r_m;
  p.cell_km = c.cell_km;
  p.p2s_per_segment = c.p2s_per_segment;
  return p;
}

std::string jsonl(const std::vector<ordered_json>& records) {
  std::string text;
  for (const auto& r : records) {
    text += r.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    text += '\n';
  }
  return text;
}

void write_json(const fs::path& path, const ordered_json& doc) { write_file(path, doc.dump(2) + "\n"); }

// Run-config fields shared by every command; flags override the config file.
void add_config_options(CLI::App& app, RunConfig& c) {
  app.add_option("--city", c.city, "City label written into outputs")->capture_default_str();
  app.add_option("--seed", c.seed, "Master seed")->capture_default_str();
  app.add_option("--r-m", c.r_m, "Directional retrieval radius in meters")->capture_default_str();
  app.add_option("--cell-km", c.cell_km, "Density sampling cell size in km")->capture_default_str();
  app.add_option("--index-cell-m", c.index_cell_m, "Spatial index cell size in meters")->capture_default_str();
  app.add_option("-K,--k", c.K, "Ground-truth list length")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--coord-decimals", c.coord_decimals, "Decimal places for rendered coordinates")
      ->capture_default_str()
      ->check(CLI::Range(0, 9));
  app.add_flag("--include-non-motorized", c.include_non_motorized, "Keep footways, paths, cycleways and steps");
  app.add_option("--p2s-per-segment", c.p2s_per_segment, "P2S points per segment")->capture_default_str();
  app.add_option("--pp-dist-n", c.pp_dist_n, "PP_DIST item count")->capture_default_str();
  app.add_option("--pp-dir-n", c.pp_dir_n, "PP_DIR item count")->capture_default_str();
  app.add_option("--p2dr-n", c.p2dr_n, "P2DR item count")->capture_default_str();
  app.add_option("--n-per-kind", c.n_per_kind, "Evaluation tasks per kind")->capture_default_str();
  app.add_option("--context-radius-m", c.context_radius_m, "Context pack radius in meters")->capture_default_str();
  app.add_option("--qsf-size", c.qsf_size, "QSF database size")->capture_default_str();
  app.add_option("--qsf-m", c.qsf_m, "QSF neighbors per task")->capture_default_str();
}

Snapshot load(const RunConfig& c) { return load_snapshot(c.snapshot_path, c.index_cell_m); }

int cmd_ingest(RunConfig& c, const std::string& out_path, std::ostream& out) {
  IngestOptions opts;
  opts.include_non_motorized = c.include_non_motorized;
  ParsedExtract parsed = parse_extract(ExtractSource::file(c.extract_path), opts);
  NetworkOptions nopts;
  nopts.index_cell_m = c.index_cell_m;
  nopts.aoi = parsed.declared_bounds;
  Snapshot snap;
  snap.network = build_network(parsed.nodes, parsed.ways, nopts);
  snap.network.source_checksum = parsed.stats.checksum;
  snap.city = c.city;
  c.snapshot_path = out_path;
  snap.config = c.to_json();
  snap.ingest_stats = stats_json(parsed.stats);
  save_snapshot(snap, out_path);
  print_summary(snap, out);
  return 0;
}

int cmd_gen_corpus(const RunConfig& c, const std::string& flavor_arg, const std::vector<std::string>& format_args,
                   const std::string& out_dir, std::ostream& out) {
  std::vector<CorpusFormat> formats;
  if (format_args.empty()) {
    formats.assign(kAllFormats.begin(), kAllFormats.end());
  } else {
    for (const auto& f : format_args) {
      auto parsed = parse_format(f);
      if (!parsed) throw Error(ErrorKind::InvalidArgument, "unknown corpus format '" + f + "'");
      if (std::find(formats.begin(), formats.end(), *parsed) == formats.end()) formats.push_back(*parsed);
    }
  }
  std::vector<Flavor> flavors;
  if (flavor_arg == "pretrain" || flavor_arg == "both") flavors.push_back(Flavor::Pretrain);
  if (flavor_arg == "instruct" || flavor_arg == "both") flavors.push_back(Flavor::Instruct);

  const Snapshot snap = load(c);
  const RoadNetwork& net = snap.network;
  const std::string city = resolved(c, snap).city;
  const CorpusParams params = corpus_params(c, city);
  const TemplateSet& templates = TemplateSet::builtin();

  std::vector<SupervisionItem> items;
  auto append = [&](std::vector<SupervisionItem> part) { std::move(part.begin(), part.end(), std::back_inserter(items)); };
  for (auto f : formats) {
    switch (f) {
      case CorpusFormat::R2I: append(gen_r2i(net, params, templates)); break;
      case CorpusFormat::P2S: append(gen_p2s(net, params, templates)); break;
      case CorpusFormat::S2I: append(gen_s2i(net, params, templates)); break;
      case CorpusFormat::R2C: append(gen_r2c(net, params, templates)); break;
      case CorpusFormat::PP_DIST: append(gen_point_pairs(net, c.pp_dist_n, PairKind::Distance, params, templates)); break;
      case CorpusFormat::PP_DIR: append(gen_point_pairs(net, c.pp_dir_n, PairKind::Direction, params, templates)); break;
      case CorpusFormat::P2DR: append(gen_p2dr(net, c.p2dr_n, params, templates)); break;
    }
  }

  fs::create_directories(out_dir);
  EmitOptions emit;
  emit.city = city;
  emit.seed = c.seed;
  emit.extract_checksum = net.source_checksum;
  emit.template_version = templates.version;
  emit.params = resolved(c, snap).to_json();
  for (auto flavor : flavors) {
    const fs::path path = fs::path(out_dir) / (std::string(to_string(flavor)) + ".jsonl");
    const CorpusManifest m = render_and_emit(items, flavor, path, emit);
    out << path.string() << ": " << m.line_count << " lines\n";
  }
  return 0;
}

int cmd_gen_eval(const RunConfig& c, const std::string& out_path, std::ostream& out) {
  const Snapshot snap = load(c);
  const auto tasks = gen_eval_suite(snap.network, c.n_per_kind, c.seed, eval_params(c));
  write_tasks(tasks, out_path);
  ordered_json manifest;
  manifest["schema"] = "roadmind.tasks";
  manifest["version"] = kTaskSchemaVersion;
  manifest["city"] = resolved(c, snap).city;
  manifest["task_count"] = tasks.size();
  manifest["extract_checksum"] = snap.network.source_checksum;
  manifest["config"] = resolved(c, snap).to_json();
  write_json(out_path + ".manifest.json", manifest);
  out << out_path << ": " << tasks.size() << " tasks\n";
  return 0;
}

int cmd_score(const RunConfig& c, const std::string& tasks_path, const std::string& preds_path,
              const std::string& out_path, std::ostream& out) {
  const auto tasks = read_tasks(tasks_path);
  const auto preds = read_predictions(preds_path);
  std::vector<std::string> names;
  if (!c.snapshot_path.empty()) {
    const Snapshot snap = load(c);
    for (const auto& r : snap.network.roads) names.push_back(r.name);
  } else {
    names = names_from_tasks(tasks);
  }
  const MetricReport report = score(tasks, preds, NameMatcher(names));
  ordered_json doc = report.to_json();
  doc["config"] = c.to_json();
  if (out_path.empty()) {
    out << doc.dump(2) << "\n";
  } else {
    write_json(out_path, doc);
  }
  return 0;
}

int cmd_context_pack(const RunConfig& c, const std::string& tasks_path, const std::string& out_path,
                     std::ostream& out) {
  const Snapshot snap = load(c);
  const auto tasks = read_tasks(tasks_path);
  const auto records = build_context_pack(snap.network, tasks, c.context_radius_m);
  write_file(out_path, jsonl(records));
  out << out_path << ": " << records.size() << " records\n";
  return 0;
}

int cmd_qsf(const RunConfig& c, const std::string& out_path, const std::string& tasks_path,
            const std::string& neighbors_path, std::ostream& out) {
  const Snapshot snap = load(c);
  const QsfDatabase db = build_qsf_db(snap.network, c.seed, c.qsf_size, eval_params(c));
  ordered_json doc = db.to_json(c.coord_decimals);
  doc["config"] = resolved(c, snap).to_json();
  write_json(out_path, doc);
  out << out_path << ": " << db.entries.size() << " points\n";
  if (!tasks_path.empty()) {
    const auto tasks = read_tasks(tasks_path);
    std::vector<ordered_json> records;
    for (const auto& t : tasks) {
      ordered_json list = ordered_json::array();
      for (const auto& nb : qsf_neighbors(db, t.query.at(0), c.qsf_m)) {
        list.push_back({{"index", nb.index}, {"distance_m", nb.distance_m}});
      }
      records.push_back({{"task_id", t.task_id}, {"neighbors", std::move(list)}});
    }
    const std::string path = neighbors_path.empty() ? out_path + ".neighbors.jsonl" : neighbors_path;
    write_file(path, jsonl(records));
    out << path << ": " << records.size() << " tasks\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{"Road-network supervision and evaluation engine", "roadmind"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();
  add_config_options(app, c);
  app.set_version_flag("--version", kEngineVersion);

  std::string out_path, tasks_path, preds_path, neighbors_path, flavor = "both";
  std::vector<std::string> formats;

  auto* ingest = app.add_subcommand("ingest", "Parse an OSM XML extract and write a network snapshot");
  ingest->add_option("extract", c.extract_path, "OSM XML file")->required();
  ingest->add_option("-o,--out", out_path, "Snapshot path")->required();

  auto* stats = app.add_subcommand("stats", "Print the summary of a snapshot");
  stats->add_option("snapshot", c.snapshot_path, "Snapshot path")->required();

  auto* corpus = app.add_subcommand("gen-corpus", "Generate pretraining and instruction corpora");
  corpus->add_option("--snapshot", c.snapshot_path)->required();
  corpus->add_option("--flavor", flavor)->check(CLI::IsMember({"pretrain", "instruct", "both"}))->capture_default_str();
  corpus->add_option("--formats", formats, "Subset of R2I,P2S,S2I,R2C,PP_DIST,PP_DIR,P2DR")->delimiter(',');
  corpus->add_option("-o,--out-dir", out_path)->required();

  auto* gen_eval = app.add_subcommand("gen-eval", "Generate the evaluation task suite");
  gen_eval->add_option("--snapshot", c.snapshot_path)->required();
  gen_eval->add_option("-o,--out", out_path)->required();

  auto* score_cmd = app.add_subcommand("score", "Score a prediction file against a task file");
  score_cmd->add_option("--tasks", tasks_path)->required();
  score_cmd->add_option("--predictions", preds_path)->required();
  score_cmd->add_option("--snapshot", c.snapshot_path, "Network whose road names parse predictions");
  score_cmd->add_option("-o,--out", out_path, "Report path (default: standard output)");

  auto* context = app.add_subcommand("context-pack", "Build contextual-grounding records for tasks");
  context->add_option("--snapshot", c.snapshot_path)->required();
  context->add_option("--tasks", tasks_path)->required();
  context->add_option("-o,--out", out_path)->required();

  auto* qsf = app.add_subcommand("qsf", "Build the query-specific few-shot database");
  qsf->add_option("--snapshot", c.snapshot_path)->required();
  qsf->add_option("-o,--out", out_path)->required();
  qsf->add_option("--tasks", tasks_path, "Also write nearest database points per task");
  qsf->add_option("--neighbors-out", neighbors_path);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : exit_code(ErrorKind::InvalidArgument);
  }

  try {
    if (*ingest) return cmd_ingest(c, out_path, out);
    if (*stats) {
      print_summary(load(c), out);
      return 0;
    }
    if (*corpus) return cmd_gen_corpus(c, flavor, formats, out_path, out);
    if (*gen_eval) return cmd_gen_eval(c, out_path, out);
    if (*score_cmd) return cmd_score(c, tasks_path, preds_path, out_path, out);
    if (*context) return cmd_context_pack(c, tasks_path, out_path, out);
    if (*qsf) return cmd_qsf(c, out_path, tasks_path, neighbors_path, out);
  } catch (const Error& e) {
    err << "roadmind: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "roadmind: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace roadmind::cli
