#include <doctest.h>

#include "causelog/errors.hpp"
#include "causelog/graph_builder.hpp"

using namespace causelog;

namespace {

TemplateEvent ev(int tid, const std::string& device, double ts, size_t idx) {
  TemplateEvent e;
  e.template_id = tid;
  e.device = device;
  e.timestamp = ts;
  e.raw_index = idx;
  return e;
}

MatrixEntry entry(int cause, int effect, ChannelKind kind, double max_lag,
                  std::set<DevicePairKey> pairs = {}) {
  MatrixEntry e;
  e.pair.cause = cause;
  e.pair.effect = effect;
  e.pair.channel = Channel{kind, Protocol::OSPF};
  e.pair.max_lag = max_lag;
  e.pair.device_pairs = std::move(pairs);
  return e;
}

TemplateDictionary burst_dict() {
  return TemplateDictionary::from_signatures({
      {"LineProtocol on <IFACE> flapped", "L2"},
      {"module <NUM> failed", "HW"},
      {"route table updated", "L3"},
  });
}

} // namespace

TEST_CASE("tumbling windows split at multiples of delta") {
  WindowConfig cfg;
  cfg.emission = WindowEmission::Tumbling;
  cfg.delta = 10.0;
  std::vector<TemplateEvent> events = {ev(0, "d", 1, 0), ev(0, "d", 2, 1), ev(0, "d", 11, 2)};
  auto windows = window_stream(events, cfg);
  REQUIRE(windows.size() == 2);
  CHECK(windows[0].events.size() == 2);
  CHECK(windows[0].start == doctest::Approx(0.0));
  CHECK(windows[0].end == doctest::Approx(10.0));
  CHECK(windows[1].events.size() == 1);
  CHECK(windows[1].start == doctest::Approx(10.0));
}

TEST_CASE("an empty stream windows to nothing") {
  WindowConfig cfg;
  CHECK(window_stream({}, cfg).empty());
}

TEST_CASE("a gap-based window closes after gap seconds of silence") {
  WindowConfig cfg;
  cfg.emission = WindowEmission::GapBased;
  cfg.gap = 30.0;
  std::vector<TemplateEvent> events = {
      ev(0, "d", 0, 0), ev(0, "d", 10, 1), ev(0, "d", 39.9, 2), // 29.9 s silence: same window
      ev(0, "d", 69.9, 3),                                      // exactly 30 s: new window
      ev(0, "d", 200, 4),
  };
  auto windows = window_stream(events, cfg);
  REQUIRE(windows.size() == 3);
  CHECK(windows[0].events.size() == 3);
  CHECK(windows[1].events.size() == 1);
  CHECK(windows[2].events.size() == 1);
}

TEST_CASE("templates with no matrix entries become one graph per template group") {
  CausalityMatrix m;
  m.template_count = 3;
  EventWindow w;
  w.start = 0;
  w.end = 100;
  w.events = {ev(0, "a", 1, 0), ev(0, "b", 2, 1), ev(1, "a", 3, 2), ev(0, "c", 4, 3)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 2); // one per distinct template
  size_t total = 0;
  for (const auto& pg : pgs) {
    CHECK(pg.vertices.size() == 1);
    CHECK(pg.edges.empty());
    CHECK(pg.roots == std::vector<int>{0});
    total += pg.message_count();
  }
  CHECK(total == 4);
}

TEST_CASE("independent chains split into separate graphs") {
  CausalityMatrix m;
  m.template_count = 4;
  m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 5));
  m.entries.push_back(entry(2, 3, ChannelKind::WithinDevice, 5));
  EventWindow w;
  w.start = 0;
  w.end = 100;
  w.events = {ev(0, "a", 1, 0), ev(1, "a", 2, 1), ev(2, "b", 1.5, 2), ev(3, "b", 3, 3)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 2);
  for (const auto& pg : pgs) {
    CHECK(pg.vertices.size() == 2);
    CHECK(pg.edges.size() == 1);
    CHECK(pg.roots.size() == 1);
  }
}

TEST_CASE("events outside the matrix dictionary are an error") {
  CausalityMatrix m;
  m.template_count = 1;
  EventWindow w;
  w.events = {ev(5, "a", 1, 0)};
  CHECK_THROWS_AS(build_pg(w, m), Error);
}

TEST_CASE("chained duplicates merge to a self-loop with the occurrence count") {
  CausalityMatrix m;
  m.template_count = 1;
  m.entries.push_back(entry(0, 0, ChannelKind::WithinDevice, 5));
  EventWindow w;
  w.start = 0;
  w.end = 100;
  w.events = {ev(0, "a", 1, 0), ev(0, "a", 2, 1), ev(0, "a", 3, 2)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 1);
  REQUIRE(pgs[0].vertices.size() == 1);
  CHECK(pgs[0].vertices[0].occurrence_count == 3);
  REQUIRE(pgs[0].edges.size() == 1);
  CHECK(pgs[0].edges[0].self_loop);
  // The vertex is still a root: self-loops are ignored for root finding.
  CHECK(pgs[0].roots == std::vector<int>{0});
}

TEST_CASE("all-distinct templates merge to themselves") {
  CausalityMatrix m;
  m.template_count = 3;
  m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 5));
  m.entries.push_back(entry(1, 2, ChannelKind::WithinDevice, 5));
  EventWindow w;
  w.start = 0;
  w.end = 100;
  w.events = {ev(0, "a", 1, 0), ev(1, "a", 2, 1), ev(2, "a", 3, 2)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 1);
  CHECK(pgs[0].vertices.size() == 3);
  for (const auto& v : pgs[0].vertices) CHECK(v.occurrence_count == 1);
  CHECK(pgs[0].edges.size() == 2);
  for (const auto& e : pgs[0].edges) CHECK_FALSE(e.self_loop);
}

TEST_CASE("roots: chain, fan-in and cycle fallback") {
  CausalityMatrix m;
  m.template_count = 3;

  SUBCASE("path a->b->c has root a") {
    m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 5));
    m.entries.push_back(entry(1, 2, ChannelKind::WithinDevice, 5));
    EventWindow w;
    w.events = {ev(0, "d", 1, 0), ev(1, "d", 2, 1), ev(2, "d", 3, 2)};
    auto pgs = build_pg(w, m);
    REQUIRE(pgs.size() == 1);
    REQUIRE(pgs[0].roots.size() == 1);
    CHECK(pgs[0].vertices[static_cast<size_t>(pgs[0].roots[0])].template_id == 0);
    CHECK_FALSE(pgs[0].cyclic);
  }

  SUBCASE("fan-in keeps both causes as roots") {
    m.entries.push_back(entry(0, 2, ChannelKind::WithinDevice, 5));
    m.entries.push_back(entry(1, 2, ChannelKind::WithinDevice, 5));
    EventWindow w;
    w.events = {ev(0, "d", 1, 0), ev(1, "d", 1.5, 1), ev(2, "d", 3, 2)};
    auto pgs = build_pg(w, m);
    REQUIRE(pgs.size() == 1);
    REQUIRE(pgs[0].roots.size() == 2);
    std::set<int> root_templates;
    for (int r : pgs[0].roots) {
      root_templates.insert(pgs[0].vertices[static_cast<size_t>(r)].template_id);
    }
    CHECK(root_templates == std::set<int>{0, 1});
  }

  SUBCASE("a genuine cycle falls back to the earliest vertex and is flagged") {
    // Both directions materialize from two event pairs with equal lag, so
    // both survive as ambiguous edges and merge into a two-vertex cycle.
    m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 5));
    m.entries.push_back(entry(1, 0, ChannelKind::WithinDevice, 5));
    EventWindow w;
    w.events = {ev(0, "d", 1, 0), ev(1, "d", 2, 1), ev(1, "d", 100, 2), ev(0, "d", 101, 3)};
    auto pgs = build_pg(w, m);
    REQUIRE(pgs.size() == 1);
    CHECK(pgs[0].cyclic);
    REQUIRE(pgs[0].roots.size() == 1);
    CHECK(pgs[0].vertices[static_cast<size_t>(pgs[0].roots[0])].template_id == 0);
    // Both surviving edges are marked ambiguous.
    REQUIRE(pgs[0].edges.size() == 2);
    for (const auto& e : pgs[0].edges) CHECK(e.ambiguous);
  }
}

TEST_CASE("direction conflicts keep the smaller lag") {
  CausalityMatrix m;
  m.template_count = 2;
  m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 10));
  m.entries.push_back(entry(1, 0, ChannelKind::WithinDevice, 10));
  EventWindow w;
  // 0@1 -> 1@3 has lag 2; the reverse pairing 1@3 -> 0@8 has lag 5.
  w.events = {ev(0, "d", 1, 0), ev(1, "d", 3, 1), ev(0, "d", 8, 2)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 1);
  bool forward = false, backward = false;
  for (const auto& e : pgs[0].edges) {
    int cu = pgs[0].vertices[static_cast<size_t>(e.from)].template_id;
    int cv = pgs[0].vertices[static_cast<size_t>(e.to)].template_id;
    if (cu == 0 && cv == 1) forward = true;
    if (cu == 1 && cv == 0) backward = true;
  }
  CHECK(forward);
  CHECK_FALSE(backward);
}

TEST_CASE("cross-device edges require the entry's device pairs") {
  CausalityMatrix m;
  m.template_count = 2;
  m.entries.push_back(
      entry(0, 1, ChannelKind::Physical, 6, {DevicePairKey("tor1", "agg1")}));
  EventWindow w;
  w.events = {ev(0, "tor1", 1, 0), ev(1, "agg1", 2, 1), ev(0, "tor2", 10, 2),
              ev(1, "agg2", 11, 3)};
  auto pgs = build_pg(w, m);
  // tor1->agg1 connects; tor2->agg2 is not an admissible pair.
  size_t connected = 0, edges = 0;
  for (const auto& pg : pgs) {
    edges += pg.edges.size();
    if (pg.vertices.size() == 1) continue;
    connected += 1;
  }
  CHECK(connected == 1);
  CHECK(edges == 1);
}

TEST_CASE("problem graph streams round-trip through ndjson") {
  PipelineConfig cfg;
  auto dict = burst_dict();
  CausalityMatrix m;
  m.template_count = 3;
  m.entries.push_back(entry(1, 0, ChannelKind::WithinDevice, 5));
  EventWindow w;
  w.start = 0;
  w.end = 50;
  w.events = {ev(1, "tor1", 1, 0), ev(0, "tor1", 2, 1), ev(2, "agg1", 20, 2)};
  auto pgs = build_pg(w, m);
  save_pg_stream("pg_roundtrip.ndjson", pgs, dict, cfg);
  auto stream = load_pg_stream("pg_roundtrip.ndjson");
  REQUIRE(stream.pgs.size() == pgs.size());
  CHECK(stream.dict.size() == dict.size());
  CHECK(stream.dict_hash == dict.dict_hash());
  for (size_t i = 0; i < pgs.size(); ++i) {
    CHECK(pg_to_json(stream.pgs[i], stream.dict, i).dump() ==
          pg_to_json(pgs[i], dict, i).dump());
  }
  std::remove("pg_roundtrip.ndjson");
}

TEST_CASE("dot output labels vertices with signatures and marks roots") {
  auto dict = burst_dict();
  CausalityMatrix m;
  m.template_count = 3;
  m.entries.push_back(entry(1, 0, ChannelKind::WithinDevice, 5));
  EventWindow w;
  w.events = {ev(1, "tor1", 1, 0), ev(0, "tor1", 2, 1)};
  auto pgs = build_pg(w, m);
  REQUIRE(pgs.size() == 1);
  std::string dot = pg_to_dot(pgs[0], dict, 0);
  CHECK(dot.find("digraph") != std::string::npos);
  CHECK(dot.find("module <NUM> failed") != std::string::npos);
  CHECK(dot.find("LineProtocol on <IFACE> flapped") != std::string::npos);
  CHECK(dot.find("->") != std::string::npos);
}

TEST_CASE("serial and parallel window builds agree") {
  CausalityMatrix m;
  m.template_count = 4;
  m.entries.push_back(entry(0, 1, ChannelKind::WithinDevice, 5));
  m.entries.push_back(entry(2, 3, ChannelKind::WithinDevice, 5));

  std::vector<EventWindow> windows;
  for (int k = 0; k < 50; ++k) {
    EventWindow w;
    w.start = k * 100.0;
    w.end = w.start + 100.0;
    w.events = {ev(0, "a", w.start + 1, static_cast<size_t>(4 * k)),
                ev(1, "a", w.start + 2, static_cast<size_t>(4 * k + 1)),
                ev(2, "b", w.start + 3, static_cast<size_t>(4 * k + 2)),
                ev(3, "b", w.start + 4, static_cast<size_t>(4 * k + 3))};
    windows.push_back(std::move(w));
  }
  auto dict = TemplateDictionary::from_signatures(
      {{"a", "OTHER"}, {"b", "OTHER"}, {"c", "OTHER"}, {"d", "OTHER"}});
  auto serial = build_pgs_serial(windows, m);
  auto parallel = build_pgs_parallel(windows, m, 4);
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(pg_to_json(serial[i], dict, i).dump() == pg_to_json(parallel[i], dict, i).dump());
  }
}
