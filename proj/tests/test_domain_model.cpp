#include <doctest.h>

#include <filesystem>

#include "causelog/domain_model.hpp"
#include "causelog/errors.hpp"
#include "causelog/synthgen.hpp"

using namespace causelog;
namespace fs = std::filesystem;

namespace {

const char* kTorConfig = R"(device tor01 {
  vendor acme;
  os 7.2;
  tier TOR;
  interface eth0 peer agg01:eth4;
  ospf { peer agg01; dead-interval 40; }
  vlan 100;
})";

const char* kAggConfig = R"(device agg01 {
  vendor borun;
  os 3.1;
  tier AGG;
  interface eth4 peer tor01:eth0;
  ospf { peer tor01; dead-interval 30; }
  vlan 100;
})";

} // namespace

TEST_CASE("protocol stanzas parse peers and timers") {
  auto dev = parse_config("device agg1 { vendor v; os 1; tier AGG; "
                          "ospf { peer agg2; dead-interval 40; } }");
  REQUIRE(dev.protocols.size() == 1);
  CHECK(dev.protocols[0].protocol == Protocol::OSPF);
  CHECK(dev.protocols[0].peers == std::vector<std::string>{"agg2"});
  CHECK(dev.protocols[0].timers.at("dead-interval") == doctest::Approx(40.0));
}

TEST_CASE("a config without protocol stanzas is valid") {
  auto dev = parse_config("device tor9 { vendor v; os 1; tier TOR; }");
  CHECK(dev.protocols.empty());
  CHECK(dev.name == "tor9");
}

TEST_CASE("syntax errors carry a line number") {
  try {
    parse_config("device t {\n vendor v;\n tier NOPE;\n}");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
  try {
    parse_config("device t {\n vendor v\n}");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line") != std::string::npos);
  }
}

TEST_CASE("unknown sections are preserved verbatim for diffing") {
  auto dev = parse_config("device t { vendor v; os 1; tier TOR; banner motd-base; "
                          "custom { something odd; } }");
  CHECK(dev.sections.count("banner"));
  CHECK(dev.sections.count("custom"));
}

TEST_CASE("delay bound is the max of the endpoint timers plus slack") {
  PipelineConfig cfg; // slack defaults to 1 s
  auto devices = std::vector<DeviceModel>{parse_config(kTorConfig), parse_config(kAggConfig)};
  auto model = build_domain_model(devices, cfg);
  REQUIRE(model.overlay_adjacent(Protocol::OSPF, "tor01", "agg01"));
  CHECK(model.delay_bound(Protocol::OSPF, "tor01", "agg01") == doctest::Approx(41.0));

  // With zero slack the bound is exactly the larger timer.
  cfg.slack_seconds = 0.0;
  auto bare = build_domain_model(devices, cfg);
  CHECK(bare.delay_bound(Protocol::OSPF, "agg01", "tor01") == doctest::Approx(40.0));
}

TEST_CASE("peering a device absent from the snapshot drops the edge with a warning") {
  PipelineConfig cfg;
  auto dev = parse_config("device tor01 { vendor v; os 1; tier TOR; "
                          "interface eth0 peer ghost:eth9; }");
  auto model = build_domain_model({dev}, cfg);
  CHECK(model.physical.empty());
  REQUIRE_FALSE(model.warnings.empty());
  CHECK(model.warnings[0].find("ghost") != std::string::npos);
}

TEST_CASE("one-sided physical peering keeps the edge and warns") {
  PipelineConfig cfg;
  auto a = parse_config("device a { vendor v; os 1; tier TOR; interface eth0 peer b:eth0; }");
  auto b = parse_config("device b { vendor v; os 1; tier AGG; }");
  auto model = build_domain_model({a, b}, cfg);
  CHECK(model.physically_adjacent("a", "b"));
  bool warned = false;
  for (const auto& w : model.warnings) warned |= w.find("one-sided") != std::string::npos;
  CHECK(warned);
}

TEST_CASE("vlan membership builds a clique overlay") {
  PipelineConfig cfg;
  auto a = parse_config("device a { vendor v; os 1; tier TOR; vlan 7; }");
  auto b = parse_config("device b { vendor v; os 1; tier TOR; vlan 7; }");
  auto c = parse_config("device c { vendor v; os 1; tier TOR; vlan 7; }");
  auto d = parse_config("device d { vendor v; os 1; tier TOR; vlan 8; }");
  auto model = build_domain_model({a, b, c, d}, cfg);
  CHECK(model.overlay_adjacent(Protocol::VLAN, "a", "b"));
  CHECK(model.overlay_adjacent(Protocol::VLAN, "b", "c"));
  CHECK(model.overlay_adjacent(Protocol::VLAN, "a", "c"));
  CHECK_FALSE(model.overlay_adjacent(Protocol::VLAN, "a", "d"));
  CHECK(model.delay_bound(Protocol::VLAN, "a", "b") ==
        doctest::Approx(cfg.vlan_timer_seconds + cfg.slack_seconds));
}

TEST_CASE("adjacency queries are order-independent") {
  PipelineConfig cfg;
  auto devices = std::vector<DeviceModel>{parse_config(kTorConfig), parse_config(kAggConfig)};
  auto model = build_domain_model(devices, cfg);
  CHECK(model.physically_adjacent("tor01", "agg01") ==
        model.physically_adjacent("agg01", "tor01"));
  CHECK(model.delay_bound(Protocol::OSPF, "tor01", "agg01") ==
        model.delay_bound(Protocol::OSPF, "agg01", "tor01"));
}

TEST_CASE("identical snapshots diff to nothing; one edit names its section") {
  auto a1 = parse_config(kTorConfig);
  auto b1 = parse_config(kAggConfig);
  CHECK(diff_configs({a1, b1}, {a1, b1}, "2026-01-06").empty());

  std::string edited = kAggConfig;
  auto pos = edited.find("dead-interval 30");
  edited.replace(pos, 16, "dead-interval 45");
  auto b2 = parse_config(edited);
  auto changes = diff_configs({a1, b1}, {a1, b2}, "2026-01-06");
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].device == "agg01");
  CHECK(changes[0].changed_sections == std::vector<std::string>{"ospf"});
  CHECK(changes[0].effective_date == "2026-01-06");
}

TEST_CASE("devices present in only one snapshot appear as whole-device changes") {
  auto a = parse_config(kTorConfig);
  auto b = parse_config(kAggConfig);
  auto changes = diff_configs({a, b}, {a}, "2026-01-06");
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].device == "agg01");
  CHECK(changes[0].changed_sections == std::vector<std::string>{"device"});
}

TEST_CASE("the planted edit schedule is recovered from a 7-day snapshot history") {
  PipelineConfig cfg;
  auto spec = synth::ScenarioSpec::load(std::string(CAUSELOG_SOURCE_DIR) +
                                        "/scenarios/configs7.json");
  fs::remove_all("dm_configs7");
  auto gen = synth::generate(spec, "dm_configs7");

  auto model = build_domain_model_from_history(read_config_tree(gen.configs_dir), cfg);
  REQUIRE(model.changes.size() == gen.truth.config_edits.size());
  for (size_t i = 0; i < model.changes.size(); ++i) {
    bool found = false;
    for (const auto& planted : gen.truth.config_edits) {
      found |= planted.device == model.changes[i].device &&
               planted.effective_date == model.changes[i].effective_date &&
               planted.changed_sections == model.changes[i].changed_sections;
    }
    CHECK(found);
  }
  // Zero rules and zero noise also means an empty corpus with valid configs.
  CHECK(read_text_file(gen.corpus_path).empty());
  fs::remove_all("dm_configs7");
}

TEST_CASE("synthetic topology round-trips through config parsing exactly") {
  PipelineConfig cfg;
  auto spec = synth::ScenarioSpec::load(std::string(CAUSELOG_SOURCE_DIR) +
                                        "/scenarios/default.json");
  fs::remove_all("dm_topo");
  auto gen = synth::generate(spec, "dm_topo");

  auto history = read_config_tree(gen.configs_dir);
  auto model = build_domain_model_from_history(history, cfg);

  std::set<std::pair<std::string, std::string>> built;
  for (const auto& pair : model.physical) built.insert({pair.a, pair.b});
  std::set<std::pair<std::string, std::string>> planted(gen.truth.physical_links.begin(),
                                                        gen.truth.physical_links.end());
  CHECK(built == planted);
  CHECK(model.devices.size() == gen.truth.devices.size());
  for (const auto& dev : gen.truth.devices) {
    REQUIRE(model.devices.count(dev.name));
    CHECK(tier_name(model.devices.at(dev.name).tier) == dev.tier);
    CHECK(model.devices.at(dev.name).vendor == dev.vendor);
  }
  CHECK(model.overlay_reachability_violations().empty());
  fs::remove_all("dm_topo");
}

TEST_CASE("overlay edges disconnected from the physical graph are reported") {
  PipelineConfig cfg;
  auto a = parse_config("device a { vendor v; os 1; tier AGG; ospf { peer b; } }");
  auto b = parse_config("device b { vendor v; os 1; tier AGG; ospf { peer a; } }");
  auto model = build_domain_model({a, b}, cfg);
  CHECK_FALSE(model.overlay_reachability_violations().empty());
}

TEST_CASE("identical snapshot bytes produce identical model serialization") {
  PipelineConfig cfg;
  auto devices = std::vector<DeviceModel>{parse_config(kTorConfig), parse_config(kAggConfig)};
  auto m1 = build_domain_model(devices, cfg);
  auto m2 = build_domain_model(devices, cfg);
  CHECK(m1.to_json(cfg).dump() == m2.to_json(cfg).dump());

  auto back = DomainModel::from_json(m1.to_json(cfg));
  CHECK(back.to_json(cfg).dump() == m1.to_json(cfg).dump());
}
