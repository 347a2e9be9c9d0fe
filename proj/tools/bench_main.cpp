// Benchmark comparing the serial reference implementations against the
// OpenMP kernels, verifying that both produce identical output.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "causelog/analysis.hpp"
#include "causelog/causality.hpp"
#include "causelog/domain_model.hpp"
#include "causelog/exec.hpp"
#include "causelog/graph_builder.hpp"
#include "causelog/pipeline_config.hpp"
#include "causelog/synthgen.hpp"
#include "causelog/syslog.hpp"
#include "causelog/templates.hpp"

using namespace causelog;
namespace fs = std::filesystem;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename Fn>
double time_it(Fn&& fn) {
  double start = now_seconds();
  fn();
  return now_seconds() - start;
}

synth::ScenarioSpec bench_scenario() {
  synth::ScenarioSpec spec;
  spec.name = "bench";
  spec.seed = 7;
  spec.mode = "continuous";
  spec.duration_days = 2;
  spec.topology.pods = 4;
  spec.topology.counts = {{"TOR", 53}, {"AGG", 8}, {"MB", 2}, {"CORE", 1}};
  spec.vendors = {{"acme", "7.2", 1.0}};
  spec.noise.templates = {"login_fail", "ntp_sync",  "snmp_timeout", "cpu_high",
                          "fan_alarm",  "power_warn", "xcvr_warn",   "cfg_saved",
                          "mem_alarm"};
  spec.noise.rate_per_template_per_day = 40;
  spec.triggers = {{"module_fail", "TOR", 80},
                   {"ospf_proc_fail", "AGG", 300},
                   {"vip_migrate", "MB", 400}};
  spec.rules = {
      {"R1", "module_fail", "link_down", "within", 0.97, {"truncexp", 1.5, 5}},
      {"R2", "module_fail", "stp_change", "within", 0.95, {"truncexp", 1.5, 5}},
      {"R3", "module_fail", "peer_iface_change", "physical", 0.95, {"truncexp", 2, 5}},
      {"R4", "ospf_proc_fail", "ospf_restart", "within", 0.95, {"truncexp", 2, 5}},
      {"R5", "ospf_proc_fail", "route_recompute", "within", 0.95, {"truncexp", 2, 5}},
      {"R6", "ospf_proc_fail", "ospf_neighbor_down", "protocol:ospf", 0.95,
       {"truncexp", 3, 15}},
      {"R7", "vip_migrate", "ha_failover", "within", 0.95, {"truncexp", 1.5, 5}},
      {"R8", "vip_migrate", "tcp_session_reset", "within", 0.95, {"truncexp", 1.5, 5}},
  };
  return spec;
}

void row(const char* name, double serial, double parallel, bool equal) {
  std::printf("%-28s %10.3fs %10.3fs %8.2fx   %s\n", name, serial, parallel,
              parallel > 0 ? serial / parallel : 0.0, equal ? "outputs identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
  int threads = 0;
  if (argc > 1) threads = std::atoi(argv[1]);
  int resolved = resolve_threads(threads);
  std::printf("benchmark workload: 64-device fat-tree, 2 days of synthetic syslog\n");
  std::printf("parallel kernels use %d threads\n\n", resolved);

  std::string dir = fs::temp_directory_path() / "causelog_bench";
  fs::remove_all(dir);
  synth::GenerateResult gen = synth::generate(bench_scenario(), dir);
  std::printf("generated %zu syslog lines\n\n", gen.lines_written);

  PipelineConfig cfg;
  cfg.layer_map_path = std::string(CAUSELOG_SOURCE_DIR) + "/data/layer_keywords.conf";
  LayerMap layers = LayerMap::load(cfg.layer_map_path);
  auto corpus = read_corpus(gen.corpus_path, cfg.assume_year);
  TemplateDictionary dict = extract_templates(corpus, cfg, layers);
  DomainModel model =
      build_domain_model_from_history(read_config_tree(gen.configs_dir), cfg);

  std::printf("%-28s %11s %11s %9s\n", "kernel", "serial", "parallel", "speedup");

  // Template matching.
  std::vector<std::optional<TemplateEvent>> ev_serial, ev_parallel;
  double t_ser = time_it([&] { ev_serial = match_stream_serial(dict, corpus); });
  double t_par =
      time_it([&] { ev_parallel = match_stream_parallel(dict, corpus, threads); });
  bool eq = ev_serial.size() == ev_parallel.size();
  for (size_t i = 0; eq && i < ev_serial.size(); ++i) {
    eq = ev_serial[i].has_value() == ev_parallel[i].has_value() &&
         (!ev_serial[i] || ev_serial[i]->template_id == ev_parallel[i]->template_id);
  }
  row("template matching", t_ser, t_par, eq);

  std::vector<TemplateEvent> events;
  for (auto& e : ev_serial) {
    if (e) events.push_back(std::move(*e));
  }

  // Causal inference.
  CausalityEngine engine(events, model, cfg, dict.size());
  engine.set_dict(dict.dict_hash(), {});
  CausalityResult r_serial, r_parallel;
  t_ser = time_it([&] { r_serial = engine.run_serial(); });
  t_par = time_it([&] { r_parallel = engine.run_parallel(threads); });
  eq = r_serial.matrix.to_json(cfg) == r_parallel.matrix.to_json(cfg) &&
       r_serial.audit.size() == r_parallel.audit.size();
  row("causal pair testing", t_ser, t_par, eq);

  // Problem graph construction.
  WindowConfig wcfg;
  wcfg.emission = WindowEmission::GapBased;
  wcfg.gap = 30;
  auto windows = window_stream(events, wcfg);
  std::vector<ProblemGraph> pg_serial, pg_parallel;
  t_ser = time_it([&] { pg_serial = build_pgs_serial(windows, r_serial.matrix); });
  t_par = time_it(
      [&] { pg_parallel = build_pgs_parallel(windows, r_serial.matrix, threads); });
  eq = pg_serial.size() == pg_parallel.size();
  for (size_t i = 0; eq && i < pg_serial.size(); ++i) {
    eq = pg_to_json(pg_serial[i], dict, i) == pg_to_json(pg_parallel[i], dict, i);
  }
  row("problem graph build", t_ser, t_par, eq);

  // Graph signatures.
  std::vector<PgSignature> sig_serial, sig_parallel;
  t_ser = time_it([&] { sig_serial = signatures_serial(pg_serial, dict, &model); });
  t_par = time_it(
      [&] { sig_parallel = signatures_parallel(pg_serial, dict, &model, threads); });
  eq = sig_serial.size() == sig_parallel.size();
  for (size_t i = 0; eq && i < sig_serial.size(); ++i) {
    eq = sig_serial[i].canonical_form == sig_parallel[i].canonical_form;
  }
  row("graph signatures", t_ser, t_par, eq);

  std::printf("\nwindows: %zu, problem graphs: %zu, matrix entries: %zu\n", windows.size(),
              pg_serial.size(), r_serial.matrix.entries.size());
  fs::remove_all(dir);
  return 0;
}
