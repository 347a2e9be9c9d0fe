// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Scenario files and seeds are committed; thresholds are
// pinned in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "causelog/analysis.hpp"
#include "causelog/causality.hpp"
#include "causelog/domain_model.hpp"
#include "causelog/graph_builder.hpp"
#include "causelog/pipeline_config.hpp"
#include "causelog/rng.hpp"
#include "causelog/synthgen.hpp"
#include "causelog/syslog.hpp"
#include "causelog/templates.hpp"

using namespace causelog;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] C%d %s: %s\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string source_dir() { return CAUSELOG_SOURCE_DIR; }

PipelineConfig base_config() {
  PipelineConfig cfg;
  cfg.layer_map_path = source_dir() + "/data/layer_keywords.conf";
  return cfg;
}

struct PipelineRun {
  synth::GenerateResult gen;
  TemplateDictionary dict;
  std::vector<TemplateEvent> events;
  DomainModel model;
  size_t no_match = 0;
  bool signatures_exact = false;
};

// synth -> ingest -> extract -> match -> model. Closure bookkeeping feeds C3.
PipelineRun run_front_half(const synth::ScenarioSpec& spec, const std::string& dir,
                           const PipelineConfig& cfg) {
  PipelineRun run;
  fs::remove_all(dir);
  run.gen = synth::generate(spec, dir);

  LayerMap layers = LayerMap::load(cfg.layer_map_path);
  auto corpus = read_corpus(run.gen.corpus_path, cfg.assume_year);
  run.dict = extract_templates(corpus, cfg, layers);

  MatchStats stats;
  auto matched = match_stream_parallel(run.dict, corpus, cfg.threads, &stats);
  run.no_match = stats.no_match;
  for (auto& ev : matched) {
    if (ev) run.events.push_back(std::move(*ev));
  }

  std::set<std::string> extracted;
  for (const auto& t : run.dict.templates()) extracted.insert(t.signature_text());
  std::set<std::string> expected(run.gen.truth.expected_signatures.begin(),
                                 run.gen.truth.expected_signatures.end());
  run.signatures_exact = extracted == expected;

  run.model = build_domain_model_from_history(read_config_tree(run.gen.configs_dir), cfg);
  return run;
}

size_t g_closure_corpora = 0;
size_t g_closure_failures = 0;

void track_closure(const PipelineRun& run) {
  ++g_closure_corpora;
  if (run.no_match != 0 || !run.signatures_exact) ++g_closure_failures;
}

// --- C1 + C2 -----------------------------------------------------------------

void criterion_1() {
  PipelineConfig cfg = base_config();
  synth::ScenarioSpec spec = synth::ScenarioSpec::load(source_dir() + "/scenarios/default.json");

  double precision_sum = 0, recall_sum = 0, worst_seconds = 0;
  const std::vector<uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  for (uint64_t seed : seeds) {
    auto start = std::chrono::steady_clock::now();
    spec.seed = seed;
    cfg.seed = seed;
    PipelineRun run = run_front_half(spec, "acc_c1", cfg);
    track_closure(run);

    CausalityEngine engine(run.events, run.model, cfg, run.dict.size());
    std::vector<std::string> sigs;
    for (const auto& t : run.dict.templates()) sigs.push_back(t.signature_text());
    engine.set_dict(run.dict.dict_hash(), sigs);
    CausalityResult result = engine.run();

    synth::ScoreReport score = synth::score_matrix(result.matrix, run.gen.truth);
    precision_sum += score.precision;
    recall_sum += score.recall;
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    worst_seconds = std::max(worst_seconds, seconds);
  }
  double precision = precision_sum / static_cast<double>(seeds.size());
  double recall = recall_sum / static_cast<double>(seeds.size());

  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "precision %.3f (>= 0.9), recall %.3f (>= 0.85), worst seed %.1fs (< 300s)",
                precision, recall, worst_seconds);
  report(1, precision >= 0.9 && recall >= 0.85 && worst_seconds < 300.0,
         "causal-edge recovery on 10 seeds", buf);
  fs::remove_all("acc_c1");
}

void criterion_2() {
  PipelineConfig cfg = base_config();
  synth::ScenarioSpec spec = synth::ScenarioSpec::load(source_dir() + "/scenarios/null.json");

  size_t total_candidates = 0, total_entries = 0;
  for (uint64_t seed = 1; seed <= 50; ++seed) {
    spec.seed = seed;
    cfg.seed = seed;
    PipelineRun run = run_front_half(spec, "acc_c2", cfg);
    track_closure(run);
    CausalityEngine engine(run.events, run.model, cfg, run.dict.size());
    CausalityResult result = engine.run();
    total_candidates += result.candidate_count;
    total_entries += result.matrix.entries.size();
  }
  double rate = total_candidates == 0
                    ? 0.0
                    : static_cast<double>(total_entries) / static_cast<double>(total_candidates);
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "%zu accepted of %zu candidate pairs over 50 null seeds, rate %.4f (<= 0.02)",
                total_entries, total_candidates, rate);
  report(2, rate <= 0.02, "null-scenario calibration", buf);
  fs::remove_all("acc_c2");
}

// --- C3 ------------------------------------------------------------------------

void criterion_3() {
  PipelineConfig cfg = base_config();
  synth::ScenarioSpec spec = synth::ScenarioSpec::load(source_dir() + "/scenarios/twelve.json");
  PipelineRun run = run_front_half(spec, "acc_c3", cfg);
  track_closure(run);

  bool exact_twelve = run.dict.size() == 12 && run.signatures_exact;
  bool closure_everywhere = g_closure_failures == 0;
  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "planted formats recovered %zu/12 exact=%s; NoMatch 0 and exact signature set "
                "on %zu/%zu corpora",
                run.dict.size(), exact_twelve ? "yes" : "no",
                g_closure_corpora - g_closure_failures, g_closure_corpora);
  report(3, exact_twelve && closure_everywhere && run.no_match == 0, "template closure", buf);
  fs::remove_all("acc_c3");
}

// --- C4: PG construction invariants ---------------------------------------------

CausalityMatrix random_matrix(SplitMix64& rng, size_t n,
                              const std::vector<std::string>& devices) {
  CausalityMatrix m;
  m.template_count = n;
  std::set<DevicePairKey> pairs;
  for (size_t i = 0; i + 1 < devices.size(); ++i) {
    pairs.insert(DevicePairKey(devices[i], devices[i + 1]));
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double p = rng.uniform();
      if (i != j && p < 0.25) {
        MatrixEntry e;
        e.pair.cause = static_cast<int>(i);
        e.pair.effect = static_cast<int>(j);
        e.pair.channel = Channel{ChannelKind::WithinDevice, Protocol::OSPF};
        e.pair.max_lag = 5.0;
        m.entries.push_back(std::move(e));
      } else if (i != j && p < 0.4) {
        MatrixEntry e;
        e.pair.cause = static_cast<int>(i);
        e.pair.effect = static_cast<int>(j);
        e.pair.channel = Channel{ChannelKind::Physical, Protocol::OSPF};
        e.pair.max_lag = 8.0;
        e.pair.device_pairs = pairs;
        m.entries.push_back(std::move(e));
      } else if (i == j && p < 0.15) {
        MatrixEntry e;
        e.pair.cause = static_cast<int>(i);
        e.pair.effect = static_cast<int>(j);
        e.pair.channel = Channel{ChannelKind::WithinDevice, Protocol::OSPF};
        e.pair.max_lag = 5.0;
        m.entries.push_back(std::move(e));
      }
    }
  }
  return m;
}

std::vector<TemplateEvent> random_window_events(SplitMix64& rng, size_t n_templates,
                                                const std::vector<std::string>& devices,
                                                double t0) {
  size_t count = 1 + rng.below(40);
  std::vector<TemplateEvent> events;
  for (size_t k = 0; k < count; ++k) {
    TemplateEvent ev;
    ev.template_id = static_cast<int>(rng.below(n_templates));
    ev.device = devices[rng.below(devices.size())];
    ev.timestamp = t0 + std::floor(rng.uniform() * 25.0);
    events.push_back(std::move(ev));
  }
  std::sort(events.begin(), events.end(), [](const TemplateEvent& a, const TemplateEvent& b) {
    return a.timestamp < b.timestamp;
  });
  for (size_t k = 0; k < events.size(); ++k) events[k].raw_index = k;
  return events;
}

bool verify_edge_soundness(const std::vector<ProblemGraph>& pgs, const EventWindow& window,
                           const CausalityMatrix& m, std::string& why) {
  for (const auto& pg : pgs) {
    for (const auto& e : pg.edges) {
      if (e.self_loop) continue;
      int tu = pg.vertices[static_cast<size_t>(e.from)].template_id;
      int tv = pg.vertices[static_cast<size_t>(e.to)].template_id;
      // Some entry (tu, tv) must exist and some event pair must satisfy it.
      bool found = false;
      for (const auto& entry : m.entries) {
        if (entry.pair.cause != tu || entry.pair.effect != tv) continue;
        for (const auto& x : window.events) {
          if (x.template_id != tu) continue;
          for (const auto& y : window.events) {
            if (y.template_id != tv) continue;
            double lag = y.timestamp - x.timestamp;
            if (lag < 0 || lag > entry.pair.max_lag) continue;
            bool ch = entry.pair.channel.kind == ChannelKind::WithinDevice
                          ? x.device == y.device
                          : x.device != y.device &&
                                entry.pair.device_pairs.count(DevicePairKey(x.device, y.device));
            if (ch) {
              found = true;
              break;
            }
          }
          if (found) break;
        }
        if (found) break;
      }
      if (!found) {
        why = "edge " + std::to_string(tu) + "->" + std::to_string(tv) +
              " has no supporting event pair";
        return false;
      }
    }
  }
  return true;
}

bool verify_merge_idempotent(const std::vector<ProblemGraph>& pgs, std::string& why) {
  for (const auto& pg : pgs) {
    // Re-merging the merged graph must not change its shape.
    EventGraph again;
    again.window_start = pg.window_start;
    again.window_end = pg.window_end;
    for (const auto& v : pg.vertices) {
      TemplateEvent ev;
      ev.template_id = v.template_id;
      ev.device = *v.devices.begin();
      ev.timestamp = v.first_ts;
      ev.raw_index = again.events.size();
      again.events.push_back(std::move(ev));
    }
    for (const auto& e : pg.edges) {
      again.edges.push_back({static_cast<size_t>(e.from), static_cast<size_t>(e.to), 0.0,
                             e.ambiguous, e.channels.empty() ? "" : *e.channels.begin()});
    }
    auto remerged = merge_duplicates(again);
    size_t verts = 0, edges = 0;
    for (const auto& r : remerged) {
      verts += r.vertices.size();
      edges += r.edges.size();
    }
    if (verts != pg.vertices.size() || edges != pg.edges.size()) {
      why = "re-merge changed vertex or edge count";
      return false;
    }
  }
  return true;
}

void criterion_4() {
  SplitMix64 rng(401);
  std::vector<std::string> devices = {"tor1", "tor2", "agg1", "agg2"};

  size_t windows_checked = 0;
  bool ok = true;
  std::string why;
  for (size_t round = 0; ok && round < 110; ++round) {
    size_t n = 2 + rng.below(7);
    CausalityMatrix m = random_matrix(rng, n, devices);

    std::vector<TemplateEvent> stream;
    for (size_t w = 0; w < 10; ++w) {
      auto events = random_window_events(rng, n, devices, static_cast<double>(w) * 1000.0);
      for (auto& ev : events) {
        ev.raw_index = stream.size();
        stream.push_back(ev);
      }
    }
    WindowConfig wcfg;
    wcfg.emission = WindowEmission::Tumbling;
    wcfg.delta = 1000.0;
    auto expected_windows = window_stream(stream, wcfg);

    // Chunked streaming must equal one-shot windowing.
    WindowedStream chunked(wcfg);
    std::vector<EventWindow> streamed;
    size_t pos = 0;
    while (pos < stream.size()) {
      size_t chunk = 1 + rng.below(7);
      for (size_t k = 0; k < chunk && pos < stream.size(); ++k) chunked.feed(stream[pos++]);
      for (auto& w : chunked.take_ready()) streamed.push_back(std::move(w));
    }
    for (auto& w : chunked.finish()) streamed.push_back(std::move(w));
    if (streamed.size() != expected_windows.size()) {
      ok = false;
      why = "streaming window count differs from batch";
      break;
    }
    size_t streamed_events = 0;
    for (size_t i = 0; i < streamed.size(); ++i) {
      streamed_events += streamed[i].events.size();
      if (streamed[i].events.size() != expected_windows[i].events.size()) {
        ok = false;
        why = "streaming window contents differ from batch";
      }
    }
    if (!ok) break;
    if (streamed_events != stream.size()) {
      ok = false;
      why = "windows do not partition the stream";
      break;
    }

    for (const auto& window : expected_windows) {
      ++windows_checked;
      auto pgs = build_pg(window, m);
      size_t total = 0;
      for (const auto& pg : pgs) total += pg.message_count();
      if (total != window.events.size()) {
        ok = false;
        why = "event conservation violated";
        break;
      }
      if (!verify_edge_soundness(pgs, window, m, why)) {
        ok = false;
        break;
      }
      if (!verify_merge_idempotent(pgs, why)) {
        ok = false;
        break;
      }
    }
  }

  // Cascade chain: hardware module failure -> link down -> {STP change,
  // cross-device interface change}; one root, two devices, four vertices.
  CausalityMatrix chain;
  chain.template_count = 4;
  auto add_entry = [&](int c, int e, ChannelKind kind) {
    MatrixEntry entry;
    entry.pair.cause = c;
    entry.pair.effect = e;
    entry.pair.channel = Channel{kind, Protocol::OSPF};
    entry.pair.max_lag = 6.0;
    if (kind != ChannelKind::WithinDevice) {
      entry.pair.device_pairs.insert(DevicePairKey("tor1", "agg1"));
    }
    chain.entries.push_back(std::move(entry));
  };
  add_entry(0, 1, ChannelKind::WithinDevice); // module failure -> link down
  add_entry(1, 2, ChannelKind::WithinDevice); // link down -> STP change
  add_entry(1, 3, ChannelKind::Physical);     // link down -> peer interface change
  EventWindow window;
  window.start = 0;
  window.end = 60;
  auto put = [&](int tid, const std::string& dev, double ts, size_t idx) {
    TemplateEvent ev;
    ev.template_id = tid;
    ev.device = dev;
    ev.timestamp = ts;
    ev.raw_index = idx;
    window.events.push_back(std::move(ev));
  };
  put(0, "tor1", 0, 0);
  put(1, "tor1", 1, 1);
  put(2, "tor1", 2, 2);
  put(3, "agg1", 3, 3);
  auto chain_pgs = build_pg(window, chain);
  bool chain_ok =
      chain_pgs.size() == 1 && chain_pgs[0].vertices.size() == 4 &&
      chain_pgs[0].device_union().size() == 2 && chain_pgs[0].roots.size() == 1 &&
      chain_pgs[0].vertices[static_cast<size_t>(chain_pgs[0].roots[0])].template_id == 0;
  if (!chain_ok && ok) {
    ok = false;
    why = "module-failure cascade did not build as one rooted 4-vertex graph";
  }

  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "%zu randomized windows: merge idempotence, edge soundness, conservation, "
                "streaming equivalence; cascade chain %s%s%s",
                windows_checked, chain_ok ? "ok" : "broken", ok ? "" : " | ",
                ok ? "" : why.c_str());
  report(4, ok && chain_ok && windows_checked >= 1000, "problem-graph invariants", buf);
}

// --- C5: self-loop / duplicate merge rule -----------------------------------------

void criterion_5() {
  bool ok = true;
  std::string why;
  for (int k = 1; k <= 20 && ok; ++k) {
    for (bool linked : {true, false}) {
      CausalityMatrix m;
      m.template_count = 1;
      if (linked) {
        MatrixEntry e;
        e.pair.cause = 0;
        e.pair.effect = 0;
        e.pair.channel = Channel{ChannelKind::WithinDevice, Protocol::OSPF};
        e.pair.max_lag = 5.0;
        m.entries.push_back(std::move(e));
      }
      EventWindow window;
      window.start = 0;
      window.end = 100;
      for (int i = 0; i < k; ++i) {
        TemplateEvent ev;
        ev.template_id = 0;
        ev.device = "tor1";
        ev.timestamp = static_cast<double>(i);
        ev.raw_index = static_cast<size_t>(i);
        window.events.push_back(std::move(ev));
      }
      auto pgs = build_pg(window, m);
      if (pgs.size() != 1 || pgs[0].vertices.size() != 1) {
        ok = false;
        why = "burst did not merge to one vertex";
        break;
      }
      if (pgs[0].vertices[0].occurrence_count != static_cast<size_t>(k)) {
        ok = false;
        why = "occurrence count mismatch at k=" + std::to_string(k);
        break;
      }
      bool has_self = false;
      for (const auto& e : pgs[0].edges) has_self |= e.self_loop;
      bool expect_self = linked && k >= 2;
      if (has_self != expect_self) {
        ok = false;
        why = "self-loop rule broken at k=" + std::to_string(k) +
              (linked ? " (linked)" : " (unlinked)");
        break;
      }
    }
  }
  report(5, ok, "duplicate-burst merge rule (k in 1..20)",
         ok ? "count == k; self-loop exactly when k >= 2 and the matrix links the template"
            : why);
}

// --- C6: clustering -----------------------------------------------------------------

void criterion_6() {
  PipelineConfig cfg = base_config();
  cfg.seed = 2;
  synth::ScenarioSpec spec =
      synth::ScenarioSpec::load(source_dir() + "/scenarios/clustering.json");
  PipelineRun run = run_front_half(spec, "acc_c6", cfg);
  track_closure(run);

  CausalityMatrix truth_m = synth::truth_matrix(run.gen.truth, run.dict);
  WindowConfig wcfg;
  wcfg.emission = WindowEmission::GapBased;
  wcfg.gap = 30.0;
  auto windows = window_stream(run.events, wcfg);
  auto pgs = build_pgs_parallel(windows, truth_m, cfg.threads);

  auto signatures = signatures_parallel(pgs, run.dict, &run.model, cfg.threads);
  auto classes = cluster_pgs(signatures);

  size_t member_total = 0;
  std::set<size_t> seen;
  bool disjoint = true;
  for (const auto& cls : classes) {
    member_total += cls.members.size();
    for (size_t m : cls.members) disjoint &= seen.insert(m).second;
  }

  LayerMap layers = LayerMap::load(cfg.layer_map_path);
  std::set<std::string> norm_forms;
  for (const auto& pg : pgs) norm_forms.insert(normalized_form(pg, run.dict, layers));

  bool ok = pgs.size() == 1000 && windows.size() == run.gen.truth.bursts.size() &&
            classes.size() == run.gen.truth.expected_class_count &&
            norm_forms.size() == run.gen.truth.expected_type_count &&
            member_total == pgs.size() && disjoint;
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "%zu PGs in %zu windows (%zu bursts); %zu classes (expect %zu), %zu "
                "normalized types (expect %zu); partition %s",
                pgs.size(), windows.size(), run.gen.truth.bursts.size(), classes.size(),
                run.gen.truth.expected_class_count, norm_forms.size(),
                run.gen.truth.expected_type_count,
                member_total == pgs.size() && disjoint ? "holds" : "broken");
  report(6, ok, "longitudinal clustering", buf);
  fs::remove_all("acc_c6");
}

// --- C7: footprint shape ---------------------------------------------------------------

void criterion_7() {
  PipelineConfig cfg = base_config();
  cfg.seed = 3;
  synth::ScenarioSpec spec =
      synth::ScenarioSpec::load(source_dir() + "/scenarios/footprint.json");
  PipelineRun run = run_front_half(spec, "acc_c7", cfg);
  track_closure(run);

  CausalityMatrix truth_m = synth::truth_matrix(run.gen.truth, run.dict);
  WindowConfig wcfg;
  wcfg.emission = WindowEmission::GapBased;
  wcfg.gap = 30.0;
  auto windows = window_stream(run.events, wcfg);
  auto pgs = build_pgs_parallel(windows, truth_m, cfg.threads);

  LayerBreakdown breakdown = layer_breakdown(pgs, run.dict, run.model);
  double tor_share = pgs.empty() ? 0.0
                                 : static_cast<double>(breakdown.tier_counts["TOR"]) /
                                       static_cast<double>(pgs.size());
  double analytic = run.gen.truth.analytic_tier_share.at("TOR");
  double delta = std::abs(tor_share - analytic);

  char buf[200];
  std::snprintf(buf, sizeof(buf),
                "ToR share %.4f vs analytic %.4f (|delta| %.4f <= 0.03) over %zu PGs",
                tor_share, analytic, delta, pgs.size());
  report(7, delta <= 0.03 && pgs.size() == 3000, "tier footprint shape", buf);
  fs::remove_all("acc_c7");
}

// --- C8: determinism ---------------------------------------------------------------------

void criterion_8() {
  PipelineConfig cfg = base_config();
  cfg.seed = 5;
  synth::ScenarioSpec spec = synth::ScenarioSpec::load(source_dir() + "/scenarios/default.json");
  spec.seed = 5;

  auto file_equal = [](const std::string& a, const std::string& b) {
    return read_text_file(a) == read_text_file(b);
  };

  bool ok = true;
  std::string why;

  fs::remove_all("acc_c8a");
  fs::remove_all("acc_c8b");
  synth::GenerateResult gen_a = synth::generate(spec, "acc_c8a");
  synth::GenerateResult gen_b = synth::generate(spec, "acc_c8b");
  if (!file_equal(gen_a.corpus_path, gen_b.corpus_path) ||
      !file_equal(gen_a.truth_path, gen_b.truth_path)) {
    ok = false;
    why = "synth outputs differ across runs";
  }

  LayerMap layers = LayerMap::load(cfg.layer_map_path);
  auto corpus = read_corpus(gen_a.corpus_path, cfg.assume_year);
  TemplateDictionary dict = extract_templates(corpus, cfg, layers);
  DomainModel model = build_domain_model_from_history(read_config_tree(gen_a.configs_dir), cfg);

  auto events_serial = match_stream_serial(dict, corpus);
  auto events_parallel = match_stream_parallel(dict, corpus, 4);
  save_events("acc_c8a/ev1.ndjson", events_serial, dict, cfg);
  save_events("acc_c8a/ev2.ndjson", events_parallel, dict, cfg);
  if (ok && !file_equal("acc_c8a/ev1.ndjson", "acc_c8a/ev2.ndjson")) {
    ok = false;
    why = "event streams differ between serial and parallel matching";
  }

  std::vector<TemplateEvent> events;
  for (auto& ev : events_serial) {
    if (ev) events.push_back(std::move(*ev));
  }
  CausalityEngine engine(events, model, cfg, dict.size());
  std::vector<std::string> sigs;
  for (const auto& t : dict.templates()) sigs.push_back(t.signature_text());
  engine.set_dict(dict.dict_hash(), sigs);
  CausalityResult serial = engine.run_serial();
  CausalityResult parallel = engine.run_parallel(4);
  serial.matrix.save("acc_c8a/m1.json", cfg);
  parallel.matrix.save("acc_c8a/m2.json", cfg);
  save_audit("acc_c8a/a1.ndjson", serial.audit, cfg);
  save_audit("acc_c8a/a2.ndjson", parallel.audit, cfg);
  if (ok && (!file_equal("acc_c8a/m1.json", "acc_c8a/m2.json") ||
             !file_equal("acc_c8a/a1.ndjson", "acc_c8a/a2.ndjson"))) {
    ok = false;
    why = "matrix or audit differs between serial and parallel inference";
  }

  WindowConfig wcfg = WindowConfig::from_pipeline(cfg);
  auto windows = window_stream(events, wcfg);
  auto pgs_serial = build_pgs_serial(windows, serial.matrix);
  auto pgs_parallel = build_pgs_parallel(windows, serial.matrix, 4);
  save_pg_stream("acc_c8a/pg1.ndjson", pgs_serial, dict, cfg);
  save_pg_stream("acc_c8a/pg2.ndjson", pgs_parallel, dict, cfg);
  if (ok && !file_equal("acc_c8a/pg1.ndjson", "acc_c8a/pg2.ndjson")) {
    ok = false;
    why = "problem graphs differ between serial and parallel build";
  }

  PipelineConfig rep_serial = cfg;
  rep_serial.threads = 1;
  PipelineConfig rep_parallel = cfg;
  rep_parallel.threads = 4;
  write_reports("acc_c8a/rep1", pgs_serial, dict, model, layers, rep_serial);
  write_reports("acc_c8a/rep2", pgs_serial, dict, model, layers, rep_parallel);
  for (const char* f : {"tier_counts.csv", "layer_counts.csv", "classes.csv",
                        "class_stats.csv", "normalized_types.csv"}) {
    if (ok && !file_equal(std::string("acc_c8a/rep1/") + f, std::string("acc_c8a/rep2/") + f)) {
      ok = false;
      why = std::string("report ") + f + " differs between serial and parallel";
    }
  }

  report(8, ok, "stage determinism",
         ok ? "synth, extract, infer, build, report byte-identical across runs and across "
              "1 vs 4 workers"
            : why);
  fs::remove_all("acc_c8a");
  fs::remove_all("acc_c8b");
}

} // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
