// causelog: syslog causality mining pipeline.
//
// Offline: extract (template dictionary), model (topology + overlays from
// configs), infer (causality matrix). Online: build (problem graphs from a
// template stream). Plus report/synth/score for analysis and verification.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "causelog/analysis.hpp"
#include "causelog/causality.hpp"
#include "causelog/domain_model.hpp"
#include "causelog/errors.hpp"
#include "causelog/graph_builder.hpp"
#include "causelog/meta.hpp"
#include "causelog/pipeline_config.hpp"
#include "causelog/synthgen.hpp"
#include "causelog/syslog.hpp"
#include "causelog/templates.hpp"
#include "causelog/version.hpp"

namespace fs = std::filesystem;
using namespace causelog;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::string format = "json";

  PipelineConfig resolve() const {
    PipelineConfig cfg;
    if (!config_path.empty()) cfg = PipelineConfig::load(config_path);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    return cfg;
  }
};

int run_extract(const GlobalOpts& g, const std::string& corpus_path,
                const std::string& dict_out, const std::string& events_out) {
  PipelineConfig cfg = g.resolve();
  LayerMap layers = LayerMap::load(cfg.layer_map_path);

  IngestStats ingest;
  auto corpus = read_corpus(corpus_path, cfg.assume_year, &ingest);
  ExtractStats stats;
  TemplateDictionary dict = extract_templates(corpus, cfg, layers, &stats);
  dict.save(dict_out, cfg);

  MatchStats match;
  if (!events_out.empty()) {
    auto events = cfg.threads == 1 ? match_stream_serial(dict, corpus, &match)
                                   : match_stream_parallel(dict, corpus, cfg.threads, &match);
    save_events(events_out, events, dict, cfg);
  }

  std::cerr << Json{{"templates", dict.size()},
                    {"lines", ingest.lines_total},
                    {"parsed", ingest.lines_parsed},
                    {"dropped_bad_timestamp", ingest.dropped_bad_timestamp},
                    {"dropped_malformed", ingest.dropped_malformed},
                    {"dropped_no_constant", stats.dropped_no_constant},
                    {"no_match", match.no_match}}
                   .dump()
            << "\n";
  return 0;
}

int run_model(const GlobalOpts& g, const std::string& config_dir, const std::string& out) {
  PipelineConfig cfg = g.resolve();
  SnapshotHistory history = read_config_tree(config_dir);
  DomainModel model = build_domain_model_from_history(history, cfg);
  model.save(out, cfg);
  std::cerr << Json{{"devices", model.devices.size()},
                    {"physical_edges", model.physical.size()},
                    {"changes", model.changes.size()},
                    {"warnings", model.warnings.size()},
                    {"reachability_violations", model.overlay_reachability_violations().size()}}
                   .dump()
            << "\n";
  return 0;
}

int run_infer(const GlobalOpts& g, const std::string& events_path,
              const std::string& model_path, const std::string& out,
              const std::string& audit_out) {
  PipelineConfig cfg = g.resolve();
  EventStream stream = load_events(events_path);
  DomainModel model = DomainModel::load(model_path);
  CausalityResult result = build_causality_matrix(stream, model, cfg);
  result.matrix.save(out, cfg);
  save_audit(audit_out.empty() ? out + ".audit.ndjson" : audit_out, result.audit, cfg);
  std::cerr << Json{{"candidates", result.candidate_count},
                    {"tested", result.tested_count},
                    {"entries", result.matrix.entries.size()},
                    {"discarded", result.audit.size()}}
                   .dump()
            << "\n";
  return 0;
}

int run_build(const GlobalOpts& g, const std::string& events_path,
              const std::string& dict_path, const std::string& matrix_path,
              const std::string& out_dir) {
  PipelineConfig cfg = g.resolve();
  EventStream stream = load_events(events_path);
  TemplateDictionary dict = TemplateDictionary::load(dict_path);
  CausalityMatrix matrix = CausalityMatrix::load(matrix_path);

  if (dict.dict_hash() != matrix.dict_hash || dict.dict_hash() != stream.dict_hash) {
    throw Error(ErrorCode::VersionMismatch,
                "dictionary, event stream and matrix were not produced together");
  }

  WindowConfig wcfg = WindowConfig::from_pipeline(cfg);
  auto windows = window_stream(stream.events, wcfg);
  auto pgs = cfg.threads == 1 ? build_pgs_serial(windows, matrix)
                              : build_pgs_parallel(windows, matrix, cfg.threads);

  fs::create_directories(out_dir);
  if (g.format == "json" || g.format == "both") {
    save_pg_stream(out_dir + "/pgs.ndjson", pgs, dict, cfg);
  }
  if (g.format == "dot" || g.format == "both") {
    const std::string stamp =
        std::string("// ") + kToolVersion + " config=" + cfg.hash() + "\n";
    for (size_t i = 0; i < pgs.size(); ++i) {
      write_text_file(out_dir + "/pg-" + std::to_string(i) + ".dot",
                      stamp + pg_to_dot(pgs[i], dict, i));
    }
  }
  std::cerr << Json{{"windows", windows.size()}, {"pgs", pgs.size()}}.dump() << "\n";
  return 0;
}

int run_report(const GlobalOpts& g, const std::string& pg_path, const std::string& model_path,
               const std::string& out_dir) {
  PipelineConfig cfg = g.resolve();
  LayerMap layers = LayerMap::load(cfg.layer_map_path);
  DomainModel model = DomainModel::load(model_path);

  std::string stream_path = pg_path;
  if (fs::is_directory(pg_path)) stream_path = pg_path + "/pgs.ndjson";
  if (!fs::exists(stream_path)) {
    // An empty PG directory still produces zero-filled reports.
    fs::create_directories(out_dir);
    TemplateDictionary empty_dict = TemplateDictionary::from_signatures({});
    write_reports(out_dir, {}, empty_dict, model, layers, cfg);
    std::cerr << Json{{"pgs", 0}, {"classes", 0}}.dump() << "\n";
    return 0;
  }
  PgStream stream = load_pg_stream(stream_path);
  write_reports(out_dir, stream.pgs, stream.dict, model, layers, cfg);

  auto sigs = cfg.threads == 1
                  ? signatures_serial(stream.pgs, stream.dict, &model)
                  : signatures_parallel(stream.pgs, stream.dict, &model, cfg.threads);
  std::cerr << Json{{"pgs", stream.pgs.size()}, {"classes", cluster_pgs(sigs).size()}}.dump()
            << "\n";
  return 0;
}

int run_synth(const GlobalOpts& g, const std::string& spec_path, const std::string& out_dir) {
  synth::ScenarioSpec spec = synth::ScenarioSpec::load(spec_path);
  if (g.seed) spec.seed = *g.seed;
  synth::GenerateResult result = synth::generate(spec, out_dir);
  std::cerr << Json{{"lines", result.lines_written},
                    {"devices", result.truth.devices.size()},
                    {"planted_edges", result.truth.edges.size()},
                    {"expected_signatures", result.truth.expected_signatures.size()}}
                   .dump()
            << "\n";
  return 0;
}

int run_score(const GlobalOpts& g, const std::string& matrix_path,
              const std::string& truth_path, const std::string& out) {
  CausalityMatrix matrix = CausalityMatrix::load(matrix_path);
  synth::GroundTruth truth = synth::GroundTruth::load(truth_path);
  synth::ScoreReport report = synth::score_matrix(matrix, truth);
  Json j = report.to_json();
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    FileMeta meta;
    meta.format = "score-report";
    meta.config_hash = g.resolve().hash();
    j["meta"] = meta.to_json();
    write_json_file(out, j);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"syslog causality mining: templates, domain models, causal inference, "
               "problem graphs"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "pipeline config JSON");
  app.add_option("--seed", g.seed, "override the pipeline seed");
  app.add_option("--threads", g.threads, "worker threads (0 = all, 1 = serial)");
  app.add_option("--format", g.format, "output format: json|dot|both")
      ->check(CLI::IsMember({"json", "dot", "both"}));

  std::string corpus, dict_out, events_out;
  auto* extract = app.add_subcommand("extract", "learn a template dictionary from a corpus");
  extract->add_option("corpus", corpus, "syslog corpus file")->required();
  extract->add_option("dict", dict_out, "output dictionary JSON")->required();
  extract->add_option("--events", events_out, "also write the matched event stream");

  std::string config_dir, model_out;
  auto* model = app.add_subcommand("model", "build the domain model from config snapshots");
  model->add_option("configs", config_dir, "config snapshot directory")->required();
  model->add_option("out", model_out, "output model JSON")->required();

  std::string inf_events, inf_model, inf_out, inf_audit;
  auto* infer = app.add_subcommand("infer", "infer the causality matrix");
  infer->add_option("events", inf_events, "template event stream")->required();
  infer->add_option("model", inf_model, "domain model JSON")->required();
  infer->add_option("out", inf_out, "output matrix JSON")->required();
  infer->add_option("--audit", inf_audit,
                    "discard audit log path (default: <out>.audit.ndjson)");

  std::string b_events, b_dict, b_matrix, b_out;
  auto* build = app.add_subcommand("build", "build problem graphs from the event stream");
  build->add_option("events", b_events, "template event stream")->required();
  build->add_option("dict", b_dict, "template dictionary JSON")->required();
  build->add_option("matrix", b_matrix, "causality matrix JSON")->required();
  build->add_option("out", b_out, "output directory")->required();

  std::string r_pgs, r_model, r_out;
  auto* report = app.add_subcommand("report", "cluster problem graphs and write reports");
  report->add_option("pgs", r_pgs, "PG stream file or build output directory")->required();
  report->add_option("model", r_model, "domain model JSON")->required();
  report->add_option("out", r_out, "report output directory")->required();

  std::string s_spec, s_out;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic scenario");
  synth_cmd->add_option("scenario", s_spec, "scenario spec JSON")->required();
  synth_cmd->add_option("out", s_out, "output directory")->required();

  std::string sc_matrix, sc_truth, sc_out;
  auto* score = app.add_subcommand("score", "score an inferred matrix against ground truth");
  score->add_option("matrix", sc_matrix, "inferred causality matrix")->required();
  score->add_option("truth", sc_truth, "ground truth JSON")->required();
  score->add_option("--out", sc_out, "write metrics to a file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return run_extract(g, corpus, dict_out, events_out);
    if (*model) return run_model(g, config_dir, model_out);
    if (*infer) return run_infer(g, inf_events, inf_model, inf_out, inf_audit);
    if (*build) return run_build(g, b_events, b_dict, b_matrix, b_out);
    if (*report) return run_report(g, r_pgs, r_model, r_out);
    if (*synth_cmd) return run_synth(g, s_spec, s_out);
    if (*score) return run_score(g, sc_matrix, sc_truth, sc_out);
  } catch (const Error& e) {
    std::cerr << Json{{"error", error_code_name(e.code())}, {"message", e.what()}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", "Unhandled"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
