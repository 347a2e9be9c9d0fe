#include "causelog/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <queue>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/rng.hpp"
#include "causelog/syslog.hpp"

namespace causelog {
namespace synth {
namespace {

namespace fs = std::filesystem;

int64_t parse_date(const std::string& d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') {
    throw Error(ErrorCode::SpecError, "bad date '" + d + "', want YYYY-MM-DD");
  }
  int y = std::stoi(d.substr(0, 4));
  int m = std::stoi(d.substr(5, 2));
  int da = std::stoi(d.substr(8, 2));
  int yy = y - (m <= 2);
  int64_t era = (yy >= 0 ? yy : yy - 399) / 400;
  unsigned yoe = static_cast<unsigned>(yy - era * 400);
  unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                 static_cast<unsigned>(da) - 1u;
  unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

} // namespace

// --- catalog ------------------------------------------------------------

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = {
      {"module_fail", "platform", 2, StackLayer::HW, "module",
       {"Module {num} failure detected on chassis", "HW module {num} fault code {num}"}},
      {"link_down", "link", 3, StackLayer::L2, "link",
       {"Interface {iface} link down", "Link failure detected on port {iface}"}},
      {"stp_change", "l2proto", 4, StackLayer::L2, "stp",
       {"STP topology change on vlan {num}", "STP reconvergence complete instance {num}"}},
      {"peer_iface_change", "link", 4, StackLayer::L2, "interface",
       {"Peer interface {iface} state changed to down",
        "Remote interface {iface} transitioned down"}},
      {"ospf_proc_fail", "routing", 2, StackLayer::L3, "ospf",
       {"OSPF process terminated unexpectedly", "OSPF daemon crashed with signal {num}"}},
      {"ospf_restart", "routing", 4, StackLayer::L3, "ospf",
       {"OSPF process restarting now", "OSPF daemon restart initiated"}},
      {"route_recompute", "routing", 5, StackLayer::L3, "route",
       {"OSPF route recalculation scheduled instance {num}",
        "OSPF route table recomputation started"}},
      {"ospf_neighbor_down", "routing", 3, StackLayer::L3, "neighbor",
       {"OSPF neighbor {ip} dead timer expired", "OSPF adjacency with neighbor {ip} lost"}},
      {"vip_migrate", "lb", 4, StackLayer::L4, "vip",
       {"VIP {ip} migrated to standby", "VIP {ip} ownership moved to backup unit"}},
      {"ha_failover", "lb", 3, StackLayer::L4, "failover",
       {"HA failover sequence started", "HA failover to peer unit complete"}},
      {"tcp_session_reset", "lb", 4, StackLayer::L4, "tcp",
       {"TCP session to {ip} reset by peer", "TCP connection {ip} session reset"}},
      {"login_fail", "auth", 5, StackLayer::OTHER, "login",
       {"User login failed from {ip}", "Login authentication failure from {ip}"}},
      {"ntp_sync", "system", 5, StackLayer::OTHER, "ntp",
       {"NTP synchronization lost with {ip}", "NTP clock sync to {ip} failed"}},
      {"snmp_timeout", "system", 5, StackLayer::OTHER, "snmp",
       {"SNMP agent request timeout", "SNMP polling timeout from manager"}},
      {"cpu_high", "system", 4, StackLayer::OTHER, "cpu",
       {"CPU utilization {num} percent exceeded", "CPU load at {num} percent high"}},
      {"fan_alarm", "platform", 3, StackLayer::HW, "fan",
       {"Fan speed abnormal on tray {num}", "Fan rpm out of range tray {num}"}},
      {"power_warn", "platform", 3, StackLayer::HW, "power",
       {"Power supply {num} voltage warning", "Power unit {num} voltage out of spec"}},
      {"xcvr_warn", "platform", 4, StackLayer::PHY, "xcvr",
       {"Xcvr {iface} rx power low", "Xcvr module {iface} optical rx degraded"}},
      {"cfg_saved", "system", 6, StackLayer::OTHER, "config",
       {"Configuration saved by admin user", "Config commit completed by admin"}},
      {"mem_alarm", "platform", 3, StackLayer::HW, "memory",
       {"Memory utilization above {num} percent", "Memory pool depletion warning level {num}"}},
  };
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& semantic) {
  for (const auto& e : catalog()) {
    if (e.semantic == semantic) return e;
  }
  throw Error(ErrorCode::SpecError, "unknown semantic event '" + semantic + "'");
}

std::string masked_signature(const std::string& format) {
  std::string out = format;
  auto replace_all = [&](const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("{iface}", "<IFACE>");
  replace_all("{ip}", "<IP>");
  replace_all("{mac}", "<MAC>");
  replace_all("{num}", "<NUM>");
  return out;
}

// --- scenario (de)serialization ------------------------------------------

namespace {

void reject_unknown(const Json& j, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw Error(ErrorCode::SpecError, "unknown key '" + it.key() + "' in " + where);
    }
  }
}

LagSpec lag_from_json(const Json& j) {
  reject_unknown(j, {"kind", "scale", "bound"}, "lag");
  LagSpec lag;
  lag.kind = j.value("kind", "truncexp");
  lag.scale = j.value("scale", 1.0);
  lag.bound = j.value("bound", 5.0);
  if (lag.kind != "truncexp" && lag.kind != "constant") {
    throw Error(ErrorCode::SpecError, "lag kind must be truncexp or constant");
  }
  if (lag.bound < 0 || lag.scale < 0) {
    throw Error(ErrorCode::SpecError, "lag scale/bound must be non-negative");
  }
  return lag;
}

} // namespace

Json ScenarioSpec::to_json() const {
  Json vend = Json::array();
  for (const auto& v : vendors) {
    vend.push_back(Json{{"name", v.name}, {"os", v.os}, {"ratio", v.ratio}});
  }
  Json trig = Json::array();
  for (const auto& t : triggers) {
    trig.push_back(Json{{"semantic", t.semantic},
                        {"tier", t.tier},
                        {"rate_per_device_per_day", t.rate_per_device_per_day}});
  }
  Json rls = Json::array();
  for (const auto& r : rules) {
    rls.push_back(Json{{"name", r.name},
                       {"cause", r.cause},
                       {"effect", r.effect},
                       {"channel", r.channel},
                       {"probability", r.probability},
                       {"lag", Json{{"kind", r.lag.kind}, {"scale", r.lag.scale},
                                    {"bound", r.lag.bound}}}});
  }
  Json tys = Json::array();
  for (const auto& t : types) {
    Json edges = Json::array();
    for (const auto& [a, b] : t.edges) edges.push_back(Json::array({a, b}));
    tys.push_back(Json{{"name", t.name},
                       {"weight", t.weight},
                       {"tier", t.tier},
                       {"channel", t.channel},
                       {"events", t.events},
                       {"offsets", t.offsets},
                       {"device_of", t.device_of},
                       {"edges", edges}});
  }
  Json edits = Json::array();
  for (const auto& e : config_edits) {
    edits.push_back(Json{{"device_index", e.device_index}, {"day", e.day}});
  }
  Json topo{{"pods", topology.pods}, {"devices", topology.devices}};
  if (!topology.counts.empty()) topo["counts"] = topology.counts;
  if (!topology.ratios.empty()) topo["ratios"] = topology.ratios;

  return Json{{"meta", Json{{"format", "scenario"}, {"version", 1}}},
              {"name", name},
              {"seed", seed},
              {"mode", mode},
              {"duration_days", duration_days},
              {"granularity", granularity},
              {"start_date", start_date},
              {"topology", topo},
              {"vendors", vend},
              {"noise", Json{{"templates", noise.templates},
                             {"rate_per_template_per_day", noise.rate_per_template_per_day}}},
              {"triggers", trig},
              {"rules", rls},
              {"episodic_instances", episodic_instances},
              {"episodic_spacing", episodic_spacing},
              {"types", tys},
              {"config_edits", edits}};
}

ScenarioSpec ScenarioSpec::from_json(const Json& j) {
  reject_unknown(j, {"meta", "name", "seed", "mode", "duration_days", "granularity",
                     "start_date", "topology", "vendors", "noise", "triggers", "rules",
                     "episodic_instances", "episodic_spacing", "types", "config_edits"},
                 "scenario");
  if (j.contains("meta")) {
    FileMeta meta;
    meta.format = j.at("meta").value("format", "scenario");
    meta.version = j.at("meta").value("version", 1);
    if (meta.format != "scenario" || meta.version != 1) {
      throw Error(ErrorCode::VersionMismatch, "unsupported scenario format/version");
    }
  }
  ScenarioSpec s;
  s.name = j.value("name", "scenario");
  s.seed = j.value("seed", uint64_t{1});
  s.mode = j.value("mode", "continuous");
  if (s.mode != "continuous" && s.mode != "episodic") {
    throw Error(ErrorCode::SpecError, "mode must be continuous or episodic");
  }
  s.duration_days = j.value("duration_days", 1);
  s.granularity = j.value("granularity", 1.0);
  s.start_date = j.value("start_date", "2026-01-05");
  if (s.duration_days < 1) throw Error(ErrorCode::SpecError, "duration_days must be >= 1");

  if (j.contains("topology")) {
    const Json& t = j.at("topology");
    reject_unknown(t, {"pods", "devices", "ratios", "counts"}, "topology");
    s.topology.pods = t.value("pods", 4);
    s.topology.devices = t.value("devices", 64);
    if (t.contains("ratios")) {
      s.topology.ratios = t.at("ratios").get<std::map<std::string, double>>();
    }
    if (t.contains("counts")) {
      s.topology.counts = t.at("counts").get<std::map<std::string, int>>();
    }
  }
  for (const auto& vj : j.value("vendors", Json::array())) {
    reject_unknown(vj, {"name", "os", "ratio"}, "vendor");
    s.vendors.push_back({vj.at("name").get<std::string>(), vj.value("os", "1.0"),
                         vj.value("ratio", 1.0)});
  }
  if (s.vendors.empty()) s.vendors.push_back({"acme", "7.2", 1.0});
  if (s.vendors.size() > 2) {
    throw Error(ErrorCode::SpecError, "the format catalog carries two vendor phrasings");
  }
  if (j.contains("noise")) {
    const Json& nj = j.at("noise");
    reject_unknown(nj, {"templates", "rate_per_template_per_day"}, "noise");
    for (const auto& t : nj.value("templates", Json::array())) {
      s.noise.templates.push_back(t.get<std::string>());
    }
    s.noise.rate_per_template_per_day = nj.value("rate_per_template_per_day", 0.0);
  }
  for (const auto& tj : j.value("triggers", Json::array())) {
    reject_unknown(tj, {"semantic", "tier", "rate_per_device_per_day"}, "trigger");
    s.triggers.push_back({tj.at("semantic").get<std::string>(), tj.value("tier", "ANY"),
                          tj.at("rate_per_device_per_day").get<double>()});
  }
  for (const auto& rj : j.value("rules", Json::array())) {
    reject_unknown(rj, {"name", "cause", "effect", "channel", "probability", "lag"}, "rule");
    RuleSpec r;
    r.name = rj.value("name", "");
    r.cause = rj.at("cause").get<std::string>();
    r.effect = rj.at("effect").get<std::string>();
    r.channel = rj.value("channel", "within");
    r.probability = rj.value("probability", 1.0);
    if (rj.contains("lag")) r.lag = lag_from_json(rj.at("lag"));
    if (r.channel != "within" && r.channel != "physical" &&
        r.channel.rfind("protocol:", 0) != 0) {
      throw Error(ErrorCode::SpecError, "rule channel must be within|physical|protocol:<p>");
    }
    s.rules.push_back(std::move(r));
  }
  s.episodic_instances = j.value("episodic_instances", 0);
  s.episodic_spacing = j.value("episodic_spacing", 120.0);
  for (const auto& tj : j.value("types", Json::array())) {
    reject_unknown(tj, {"name", "weight", "tier", "channel", "events", "offsets",
                        "device_of", "edges"},
                   "type");
    EpisodicTypeSpec t;
    t.name = tj.at("name").get<std::string>();
    t.weight = tj.value("weight", 1.0);
    t.tier = tj.value("tier", "ANY");
    t.channel = tj.value("channel", "within");
    for (const auto& e : tj.at("events")) t.events.push_back(e.get<std::string>());
    for (const auto& o : tj.at("offsets")) t.offsets.push_back(o.get<double>());
    for (const auto& d : tj.value("device_of", Json::array())) {
      t.device_of.push_back(d.get<int>());
    }
    if (t.device_of.empty()) t.device_of.assign(t.events.size(), 0);
    for (const auto& e : tj.value("edges", Json::array())) {
      t.edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
    }
    if (t.events.size() != t.offsets.size() || t.events.size() != t.device_of.size()) {
      throw Error(ErrorCode::SpecError, "type '" + t.name + "' arrays must align");
    }
    s.types.push_back(std::move(t));
  }
  for (const auto& ej : j.value("config_edits", Json::array())) {
    reject_unknown(ej, {"device_index", "day"}, "config_edit");
    s.config_edits.push_back({ej.at("device_index").get<int>(), ej.at("day").get<int>()});
  }

  for (const auto& t : s.triggers) catalog_entry(t.semantic);
  for (const auto& r : s.rules) {
    catalog_entry(r.cause);
    catalog_entry(r.effect);
  }
  for (const auto& n : s.noise.templates) catalog_entry(n);
  for (const auto& t : s.types) {
    for (const auto& e : t.events) catalog_entry(e);
  }
  return s;
}

ScenarioSpec ScenarioSpec::load(const std::string& path) {
  return from_json(read_json_file(path));
}

// --- topology ---------------------------------------------------------------

namespace {

struct GenDevice {
  std::string name;
  DeviceTier tier;
  int pod = 0;
  int vendor_style = 0; // index into spec.vendors
  std::vector<std::pair<std::string, std::string>> iface_peers; // (local if, peer "dev:if")
  std::vector<std::string> ospf_peers;
  std::vector<std::string> bgp_peers;
  std::optional<double> ospf_dead;
  std::optional<double> bgp_hold;
  std::vector<int> vlans;
};

struct GenTopology {
  std::vector<GenDevice> devices;
  std::map<std::string, size_t> index;
  std::map<std::string, std::vector<std::string>> phys_adj;
  std::map<std::string, std::vector<std::string>> ospf_adj;
  std::set<std::pair<std::string, std::string>> phys_links; // sorted pairs
};

std::map<std::string, int> tier_counts_from_spec(const TopologySpec& topo) {
  std::map<std::string, int> counts;
  if (!topo.counts.empty()) {
    counts = topo.counts;
  } else if (!topo.ratios.empty()) {
    // Largest remainder allocation; every named tier keeps at least one
    // device.
    int n = topo.devices;
    std::vector<std::pair<std::string, double>> targets(topo.ratios.begin(), topo.ratios.end());
    int assigned = 0;
    std::map<std::string, int> floors;
    std::vector<std::pair<double, std::string>> remainders;
    for (const auto& [tier, ratio] : targets) {
      double exact = ratio * n;
      int f = std::max(1, static_cast<int>(std::floor(exact)));
      floors[tier] = f;
      assigned += f;
      remainders.emplace_back(exact - std::floor(exact), tier);
    }
    std::sort(remainders.rbegin(), remainders.rend());
    size_t k = 0;
    while (assigned < n) {
      floors[remainders[k % remainders.size()].second] += 1;
      ++assigned;
      ++k;
    }
    while (assigned > n) {
      // Trim from the largest tier.
      auto largest = std::max_element(floors.begin(), floors.end(),
                                      [](const auto& a, const auto& b) {
                                        return a.second < b.second;
                                      });
      largest->second -= 1;
      --assigned;
    }
    counts = floors;
  } else {
    throw Error(ErrorCode::SpecError, "topology needs counts or ratios");
  }
  for (const char* tier : {"TOR", "AGG", "CORE", "MB"}) {
    if (!counts.count(tier)) counts[tier] = 0;
  }
  if (counts["TOR"] < 1 || counts["AGG"] < 1 || counts["CORE"] < 1) {
    throw Error(ErrorCode::SpecError, "topology needs at least one TOR, AGG and CORE");
  }
  return counts;
}

std::string device_name(const char* prefix, int ordinal, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, ordinal + 1);
  return buf;
}

GenTopology build_topology(const ScenarioSpec& spec) {
  auto counts = tier_counts_from_spec(spec.topology);
  int pods = std::max(1, std::min(spec.topology.pods, counts["AGG"]));

  GenTopology topo;
  auto add_device = [&](const char* prefix, DeviceTier tier, int ordinal, int total, int pod) {
    GenDevice d;
    int width = total >= 100 ? 3 : 2;
    d.name = device_name(prefix, ordinal, width);
    d.tier = tier;
    d.pod = pod;
    topo.devices.push_back(std::move(d));
  };

  for (int i = 0; i < counts["CORE"]; ++i) add_device("core", DeviceTier::CORE, i, counts["CORE"], -1);
  for (int i = 0; i < counts["AGG"]; ++i) add_device("agg", DeviceTier::AGG, i, counts["AGG"], i % pods);
  for (int i = 0; i < counts["TOR"]; ++i) add_device("tor", DeviceTier::TOR, i, counts["TOR"], i % pods);
  for (int i = 0; i < counts["MB"]; ++i) add_device("mb", DeviceTier::MB, i, counts["MB"], i % pods);

  std::sort(topo.devices.begin(), topo.devices.end(),
            [](const GenDevice& a, const GenDevice& b) { return a.name < b.name; });
  for (size_t i = 0; i < topo.devices.size(); ++i) topo.index[topo.devices[i].name] = i;

  // Vendor styles: greedy ratio-balanced assignment in name order.
  std::vector<double> want;
  for (const auto& v : spec.vendors) want.push_back(v.ratio);
  double total_ratio = 0;
  for (double w : want) total_ratio += w;
  std::vector<size_t> got(spec.vendors.size(), 0);
  for (size_t i = 0; i < topo.devices.size(); ++i) {
    size_t pick = 0;
    double best = -1e18;
    for (size_t v = 0; v < want.size(); ++v) {
      double deficit = want[v] / total_ratio * static_cast<double>(i + 1) -
                       static_cast<double>(got[v]);
      if (deficit > best) {
        best = deficit;
        pick = v;
      }
    }
    topo.devices[i].vendor_style = static_cast<int>(pick);
    got[pick] += 1;
  }

  auto link = [&](const std::string& a, const std::string& b) {
    GenDevice& da = topo.devices[topo.index.at(a)];
    GenDevice& db = topo.devices[topo.index.at(b)];
    std::string ia = "eth" + std::to_string(da.iface_peers.size());
    std::string ib = "eth" + std::to_string(db.iface_peers.size());
    da.iface_peers.emplace_back(ia, b + ":" + ib);
    db.iface_peers.emplace_back(ib, a + ":" + ia);
    topo.phys_adj[a].push_back(b);
    topo.phys_adj[b].push_back(a);
    topo.phys_links.insert({std::min(a, b), std::max(a, b)});
  };
  auto ospf_peer = [&](const std::string& a, const std::string& b) {
    topo.devices[topo.index.at(a)].ospf_peers.push_back(b);
    topo.devices[topo.index.at(b)].ospf_peers.push_back(a);
    topo.ospf_adj[a].push_back(b);
    topo.ospf_adj[b].push_back(a);
  };

  std::vector<std::string> cores, aggs, tors, mbs;
  for (const auto& d : topo.devices) {
    switch (d.tier) {
      case DeviceTier::CORE: cores.push_back(d.name); break;
      case DeviceTier::AGG: aggs.push_back(d.name); break;
      case DeviceTier::TOR: tors.push_back(d.name); break;
      case DeviceTier::MB: mbs.push_back(d.name); break;
    }
  }
  std::map<int, std::vector<std::string>> aggs_by_pod;
  for (const auto& name : aggs) {
    aggs_by_pod[topo.devices[topo.index.at(name)].pod].push_back(name);
  }

  // ToR uplinks to every AGG in its pod; AGGs uplink to every core.
  for (const auto& name : tors) {
    int pod = topo.devices[topo.index.at(name)].pod;
    const auto& pod_aggs = aggs_by_pod.count(pod) ? aggs_by_pod[pod] : aggs_by_pod.begin()->second;
    for (const auto& agg : pod_aggs) {
      link(name, agg);
      ospf_peer(name, agg);
    }
  }
  for (const auto& agg : aggs) {
    for (const auto& core : cores) {
      link(agg, core);
      ospf_peer(agg, core);
      topo.devices[topo.index.at(agg)].bgp_peers.push_back(core);
      topo.devices[topo.index.at(core)].bgp_peers.push_back(agg);
    }
  }
  for (const auto& mb : mbs) {
    int pod = topo.devices[topo.index.at(mb)].pod;
    const auto& pod_aggs = aggs_by_pod.count(pod) ? aggs_by_pod[pod] : aggs_by_pod.begin()->second;
    size_t attach = std::min<size_t>(2, pod_aggs.size());
    for (size_t i = 0; i < attach; ++i) {
      link(mb, pod_aggs[i]);
      ospf_peer(mb, pod_aggs[i]);
    }
  }

  // Per-pod VLAN across TOR/AGG/MB.
  for (auto& d : topo.devices) {
    if (d.tier == DeviceTier::CORE) continue;
    d.vlans.push_back(100 + d.pod);
  }

  // Vendor-dependent protocol timers.
  for (auto& d : topo.devices) {
    d.ospf_dead = d.vendor_style == 0 ? 40.0 : 30.0;
    d.bgp_hold = d.vendor_style == 0 ? 90.0 : 60.0;
  }
  return topo;
}

std::string render_config(const ScenarioSpec& spec, const GenDevice& d,
                          const std::optional<int>& banner_day) {
  const VendorSpec& vendor = spec.vendors[static_cast<size_t>(d.vendor_style)];
  std::ostringstream out;
  out << "device " << d.name << " {\n";
  out << "  vendor " << vendor.name << ";\n";
  out << "  os " << vendor.os << ";\n";
  out << "  tier " << tier_name(d.tier) << ";\n";
  out << "  banner " << (banner_day ? "motd-day" + std::to_string(*banner_day) : "motd-base")
      << ";\n";
  for (const auto& [ifname, peer] : d.iface_peers) {
    out << "  interface " << ifname << " peer " << peer << ";\n";
  }
  if (!d.ospf_peers.empty()) {
    out << "  ospf {";
    for (const auto& p : d.ospf_peers) out << " peer " << p << ";";
    out << " dead-interval " << *d.ospf_dead << ";";
    out << " }\n";
  }
  if (!d.bgp_peers.empty()) {
    out << "  bgp {";
    for (const auto& p : d.bgp_peers) out << " peer " << p << ";";
    out << " hold-time " << *d.bgp_hold << ";";
    out << " }\n";
  }
  for (int v : d.vlans) out << "  vlan " << v << ";\n";
  out << "}\n";
  return out.str();
}

// --- event emission -----------------------------------------------------

struct Emission {
  double t = 0.0; // real (unquantized) time
  uint64_t seq = 0;
  size_t device = 0;
  size_t semantic = 0; // catalog index
  std::string kind;    // trigger | effect | noise | instance
  std::string rule;    // rule or type name
  int64_t parent = -1; // seq of the causal parent
};

struct EmissionCmp {
  bool operator()(const Emission& a, const Emission& b) const {
    if (a.t != b.t) return a.t > b.t;
    return a.seq > b.seq;
  }
};

size_t catalog_index(const std::string& semantic) {
  const auto& cat = catalog();
  for (size_t i = 0; i < cat.size(); ++i) {
    if (cat[i].semantic == semantic) return i;
  }
  throw Error(ErrorCode::SpecError, "unknown semantic event '" + semantic + "'");
}

bool tier_matches(const std::string& filter, DeviceTier tier) {
  if (filter == "ANY") return true;
  return tier_from_name(filter) == tier;
}

double sample_lag(const LagSpec& lag, SplitMix64& rng) {
  if (lag.kind == "constant") return lag.scale;
  if (lag.bound <= 0) return 0.0;
  return rng.truncated_exponential(std::max(lag.scale, 1e-9), lag.bound);
}

std::string instantiate_format(const std::string& format, SplitMix64& rng, int pod,
                               size_t device_ordinal) {
  std::string out;
  out.reserve(format.size() + 16);
  for (size_t i = 0; i < format.size();) {
    if (format[i] == '{') {
      size_t close = format.find('}', i);
      std::string key = format.substr(i + 1, close - i - 1);
      if (key == "iface") {
        out += "eth" + std::to_string(rng.below(8)) + "/" + std::to_string(rng.below(4) + 1);
      } else if (key == "ip") {
        out += "10." + std::to_string(pod + 1) + "." +
               std::to_string(device_ordinal % 250) + "." + std::to_string(rng.below(250) + 1);
      } else if (key == "mac") {
        char buf[18];
        std::snprintf(buf, sizeof(buf), "%02x:%02x:%02x:%02x:%02x:%02x",
                      static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)),
                      static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)),
                      static_cast<unsigned>(rng.below(256)), static_cast<unsigned>(rng.below(256)));
        out += buf;
      } else if (key == "num") {
        out += std::to_string(rng.below(1000));
      } else {
        throw Error(ErrorCode::SpecError, "unknown placeholder {" + key + "}");
      }
      i = close + 1;
    } else {
      out.push_back(format[i++]);
    }
  }
  return out;
}

std::string channel_name_of(const std::string& spec_channel) {
  if (spec_channel == "within") return "WITHIN_DEVICE";
  if (spec_channel == "physical") return "PHYSICAL";
  if (spec_channel.rfind("protocol:", 0) == 0) {
    return std::string("PROTOCOL:") + protocol_name(protocol_from_name(spec_channel.substr(9)));
  }
  throw Error(ErrorCode::SpecError, "bad channel '" + spec_channel + "'");
}

// Planted masked formats must stay separable under the extraction threshold.
void validate_format_separation(const std::set<std::pair<size_t, int>>& used_formats) {
  std::vector<std::vector<std::string>> masked;
  for (const auto& [sem, style] : used_formats) {
    const auto& entry = catalog()[sem];
    std::string sig = masked_signature(entry.formats[static_cast<size_t>(style) %
                                                     entry.formats.size()]);
    std::vector<std::string> toks;
    std::istringstream in(sig);
    std::string tok;
    while (in >> tok) toks.push_back(tok);
    masked.push_back(std::move(toks));
  }
  for (size_t i = 0; i < masked.size(); ++i) {
    for (size_t j = i + 1; j < masked.size(); ++j) {
      if (masked[i].size() != masked[j].size()) continue;
      size_t agree = 0;
      for (size_t p = 0; p < masked[i].size(); ++p) agree += masked[i][p] == masked[j][p];
      double ratio = static_cast<double>(agree) / static_cast<double>(masked[i].size());
      if (ratio >= 0.70) {
        throw Error(ErrorCode::SpecError,
                    "planted formats too similar to separate (agreement " +
                        std::to_string(ratio) + ")");
      }
    }
  }
}

struct EdgeAccumulator {
  std::map<std::tuple<std::string, std::string, std::string>, TruthEdge> edges;

  void add(const std::string& cause_sig, const std::string& effect_sig,
           const std::string& channel, double lag, const std::string& dev_a,
           const std::string& dev_b) {
    auto key = std::make_tuple(cause_sig, effect_sig, channel);
    auto it = edges.find(key);
    if (it == edges.end()) {
      TruthEdge e;
      e.cause_signature = cause_sig;
      e.effect_signature = effect_sig;
      e.channel = channel;
      it = edges.emplace(key, std::move(e)).first;
    }
    it->second.occurrences += 1;
    it->second.max_lag = std::max(it->second.max_lag, lag);
    if (dev_a != dev_b) it->second.device_pairs.insert(DevicePairKey(dev_a, dev_b));
  }
};

} // namespace

GenerateResult generate(const ScenarioSpec& spec, const std::string& out_dir) {
  GenTopology topo = build_topology(spec);
  const auto& cat = catalog();
  const double day_seconds = 86400.0;
  const double t0 = static_cast<double>(parse_date(spec.start_date)) * day_seconds;
  const double horizon = spec.duration_days * day_seconds;

  for (const auto& edit : spec.config_edits) {
    if (edit.device_index < 0 ||
        static_cast<size_t>(edit.device_index) >= topo.devices.size()) {
      throw Error(ErrorCode::SpecError, "config edit device_index out of range");
    }
    if (edit.day < 1 || edit.day > spec.duration_days) {
      throw Error(ErrorCode::SpecError, "config edit day outside the snapshot range");
    }
  }

  // A rule's lag bound must stay inside the delay bound the emitted configs
  // imply for its channel, otherwise the planted edge is unrecoverable. The
  // tightest implied bound is the smallest timer any vendor style emits.
  {
    double min_ospf = 1e18, min_bgp = 1e18;
    std::set<int> styles;
    for (const auto& d : topo.devices) styles.insert(d.vendor_style);
    for (int s : styles) {
      min_ospf = std::min(min_ospf, s == 0 ? 40.0 : 30.0);
      min_bgp = std::min(min_bgp, s == 0 ? 90.0 : 60.0);
    }
    for (const auto& rule : spec.rules) {
      double cap = rule.channel == "protocol:ospf"  ? min_ospf
                   : rule.channel == "protocol:bgp" ? min_bgp
                                                    : 1e18;
      if (rule.lag.bound > cap) {
        throw Error(ErrorCode::SpecError,
                    "rule '" + rule.name + "' lag bound exceeds the implied delay bound");
      }
    }
  }

  fs::create_directories(out_dir);
  fs::create_directories(out_dir + "/configs");

  // Config snapshots, one directory per day.
  for (int day = 0; day <= spec.duration_days; ++day) {
    std::string date = format_date(parse_date(spec.start_date) + day);
    fs::create_directories(out_dir + "/configs/" + date);
    for (size_t i = 0; i < topo.devices.size(); ++i) {
      std::optional<int> banner;
      for (const auto& edit : spec.config_edits) {
        if (static_cast<size_t>(edit.device_index) == i && edit.day <= day) {
          if (!banner || *banner < edit.day) banner = edit.day;
        }
      }
      write_text_file(out_dir + "/configs/" + date + "/" + topo.devices[i].name + ".cfg",
                      render_config(spec, topo.devices[i], banner));
    }
  }

  // Rules indexed by cause semantic for cascade expansion.
  std::map<size_t, std::vector<size_t>> rules_by_cause;
  for (size_t r = 0; r < spec.rules.size(); ++r) {
    rules_by_cause[catalog_index(spec.rules[r].cause)].push_back(r);
  }

  std::priority_queue<Emission, std::vector<Emission>, EmissionCmp> queue;
  uint64_t next_seq = 0;

  if (spec.mode == "continuous") {
    for (size_t g = 0; g < spec.triggers.size(); ++g) {
      const TriggerSpec& trig = spec.triggers[g];
      size_t sem = catalog_index(trig.semantic);
      double rate = trig.rate_per_device_per_day / day_seconds;
      if (rate <= 0) continue;
      for (size_t d = 0; d < topo.devices.size(); ++d) {
        if (!tier_matches(trig.tier, topo.devices[d].tier)) continue;
        SplitMix64 rng(mix_seed(spec.seed, 10 + g, d));
        double t = rng.exponential(rate);
        while (t < horizon) {
          queue.push({t0 + t, next_seq++, d, sem, "trigger", trig.semantic, -1});
          t += rng.exponential(rate);
        }
      }
    }
    for (size_t n = 0; n < spec.noise.templates.size(); ++n) {
      size_t sem = catalog_index(spec.noise.templates[n]);
      double rate = spec.noise.rate_per_template_per_day / day_seconds;
      if (rate <= 0) continue;
      for (size_t d = 0; d < topo.devices.size(); ++d) {
        SplitMix64 rng(mix_seed(spec.seed, 500 + n, d));
        double t = rng.exponential(rate);
        while (t < horizon) {
          queue.push({t0 + t, next_seq++, d, sem, "noise", spec.noise.templates[n], -1});
          t += rng.exponential(rate);
        }
      }
    }
  }

  GroundTruth truth;
  EdgeAccumulator edge_acc;
  std::set<std::pair<size_t, int>> used_formats; // (semantic, vendor style)

  // Episodic instances: well-separated problem bursts with a planted type
  // label; ground truth for windowing, clustering, and footprint checks.
  struct ShapeDescriptor {
    std::string raw;
    std::string normalized;
  };
  std::set<std::string> distinct_raw_shapes, distinct_norm_shapes;

  if (spec.mode == "episodic") {
    if (spec.types.empty() || spec.episodic_instances <= 0) {
      throw Error(ErrorCode::SpecError, "episodic mode needs types and instances");
    }
    for (const auto& type : spec.types) {
      if (type.events.empty() || type.offsets[0] != 0.0) {
        throw Error(ErrorCode::SpecError, "type '" + type.name + "' must start at offset 0");
      }
      for (const auto& [a, b] : type.edges) {
        if (a < 0 || b < 0 || static_cast<size_t>(a) >= type.events.size() ||
            static_cast<size_t>(b) >= type.events.size() ||
            type.offsets[static_cast<size_t>(a)] > type.offsets[static_cast<size_t>(b)]) {
          throw Error(ErrorCode::SpecError, "type '" + type.name + "' has a bad edge");
        }
      }
      // Connectivity: one burst must become one problem graph.
      if (type.events.size() > 1) {
        std::vector<int> comp(type.events.size());
        for (size_t i = 0; i < comp.size(); ++i) comp[i] = static_cast<int>(i);
        bool changed = true;
        while (changed) {
          changed = false;
          for (const auto& [a, b] : type.edges) {
            // Same template occurrences merge, so same-semantic same-device
            // events are connected implicitly.
            int ca = comp[static_cast<size_t>(a)], cb = comp[static_cast<size_t>(b)];
            if (ca != cb) {
              for (auto& c : comp) {
                if (c == std::max(ca, cb)) c = std::min(ca, cb);
              }
              changed = true;
            }
          }
          for (size_t i = 0; i < type.events.size(); ++i) {
            for (size_t j = i + 1; j < type.events.size(); ++j) {
              if (type.events[i] == type.events[j] && type.device_of[i] == type.device_of[j] &&
                  comp[i] != comp[j]) {
                int hi = std::max(comp[i], comp[j]), lo = std::min(comp[i], comp[j]);
                for (auto& c : comp) {
                  if (c == hi) c = lo;
                }
                changed = true;
              }
            }
          }
        }
        for (int c : comp) {
          if (c != comp[0]) {
            throw Error(ErrorCode::SpecError, "type '" + type.name + "' is disconnected");
          }
        }
      }
    }

    double total_weight = 0;
    for (const auto& t : spec.types) total_weight += t.weight;

    SplitMix64 sched_rng(mix_seed(spec.seed, 1));
    double t = 5.0;
    for (int k = 0; k < spec.episodic_instances; ++k) {
      // Pick a type by weight.
      double pick = sched_rng.uniform() * total_weight;
      size_t type_idx = 0;
      double acc = 0;
      for (size_t i = 0; i < spec.types.size(); ++i) {
        acc += spec.types[i].weight;
        if (pick < acc) {
          type_idx = i;
          break;
        }
      }
      const EpisodicTypeSpec& type = spec.types[type_idx];

      // Primary device uniform over the tier; secondary a deterministic
      // neighbor choice on the type's channel.
      std::vector<size_t> eligible;
      for (size_t d = 0; d < topo.devices.size(); ++d) {
        if (tier_matches(type.tier, topo.devices[d].tier)) eligible.push_back(d);
      }
      if (eligible.empty()) {
        throw Error(ErrorCode::SpecError, "no device matches tier " + type.tier);
      }
      size_t primary = eligible[sched_rng.below(eligible.size())];
      std::optional<size_t> secondary;
      bool needs_secondary = false;
      for (int dv : type.device_of) needs_secondary |= dv == 1;
      if (needs_secondary) {
        const auto& adj = type.channel.rfind("protocol:", 0) == 0
                              ? topo.ospf_adj[topo.devices[primary].name]
                              : topo.phys_adj[topo.devices[primary].name];
        if (adj.empty()) {
          throw Error(ErrorCode::SpecError, "device " + topo.devices[primary].name +
                                                " has no neighbor for type " + type.name);
        }
        secondary = topo.index.at(adj[sched_rng.below(adj.size())]);
      }

      BurstInfo burst;
      burst.type = type.name;
      burst.start = std::floor((t0 + t) / std::max(spec.granularity, 1e-9)) *
                    std::max(spec.granularity, 1e-9);
      std::vector<uint64_t> seqs;
      for (size_t e = 0; e < type.events.size(); ++e) {
        size_t dev = type.device_of[e] == 1 ? *secondary : primary;
        size_t sem = catalog_index(type.events[e]);
        queue.push({t0 + t + type.offsets[e], next_seq, dev, sem, "instance", type.name,
                    static_cast<int64_t>(k)});
        seqs.push_back(next_seq);
        ++next_seq;
      }
      burst.end = burst.start + (type.offsets.empty() ? 0.0 : type.offsets.back());
      burst.devices.push_back(topo.devices[primary].name);
      if (secondary) burst.devices.push_back(topo.devices[*secondary].name);
      truth.bursts.push_back(std::move(burst));

      // Truth edges and shape descriptors for this realized instance.
      auto sig_of = [&](size_t e) {
        size_t dev = type.device_of[e] == 1 ? *secondary : primary;
        const auto& entry = cat[catalog_index(type.events[e])];
        int style = topo.devices[dev].vendor_style;
        used_formats.insert({catalog_index(type.events[e]), style});
        return masked_signature(entry.formats[static_cast<size_t>(style) %
                                              entry.formats.size()]);
      };
      auto norm_of = [&](size_t e) {
        const auto& entry = cat[catalog_index(type.events[e])];
        return std::string(layer_name(entry.layer)) + "/" + entry.keyword;
      };
      for (const auto& [a, b] : type.edges) {
        size_t dev_a = type.device_of[static_cast<size_t>(a)] == 1 ? *secondary : primary;
        size_t dev_b = type.device_of[static_cast<size_t>(b)] == 1 ? *secondary : primary;
        std::string channel = dev_a == dev_b ? "WITHIN_DEVICE" : channel_name_of(type.channel);
        edge_acc.add(sig_of(static_cast<size_t>(a)), sig_of(static_cast<size_t>(b)), channel,
                     type.offsets[static_cast<size_t>(b)] - type.offsets[static_cast<size_t>(a)],
                     topo.devices[dev_a].name, topo.devices[dev_b].name);
      }
      auto shape = [&](auto label_of) {
        std::set<std::string> verts;
        std::set<std::string> shape_edges;
        std::vector<std::string> labels(type.events.size());
        for (size_t e = 0; e < type.events.size(); ++e) {
          labels[e] = label_of(e);
          verts.insert(labels[e]);
        }
        for (const auto& [a, b] : type.edges) {
          shape_edges.insert(labels[static_cast<size_t>(a)] + ">" +
                             labels[static_cast<size_t>(b)]);
        }
        std::string out = "V[";
        for (const auto& v : verts) out += v + "|";
        out += "]E[";
        for (const auto& e : shape_edges) out += e + ",";
        out += "]";
        return out;
      };
      distinct_raw_shapes.insert(shape(sig_of));
      distinct_norm_shapes.insert(shape(norm_of));

      t += spec.episodic_spacing + sched_rng.uniform() * spec.episodic_spacing * 0.25;
    }
    if (t > horizon) {
      throw Error(ErrorCode::SpecError,
                  "episodic schedule exceeds duration_days; need " +
                      std::to_string(t / day_seconds) + " days");
    }

    double total_w = 0;
    for (const auto& ty : spec.types) total_w += ty.weight;
    std::map<std::string, int> tier_count;
    for (const auto& d : topo.devices) tier_count[tier_name(d.tier)] += 1;
    bool within_only = true;
    for (const auto& ty : spec.types) {
      for (int dv : ty.device_of) within_only &= dv == 0;
    }
    if (within_only) {
      for (const auto& [tier, cnt] : tier_count) {
        double share = 0;
        for (const auto& ty : spec.types) {
          double p_tier;
          if (ty.tier == "ANY") {
            p_tier = static_cast<double>(cnt) / static_cast<double>(topo.devices.size());
          } else {
            p_tier = ty.tier == tier ? 1.0 : 0.0;
          }
          share += ty.weight / total_w * p_tier;
        }
        truth.analytic_tier_share[tier] = share;
      }
    }
  }

  // Drain the queue; cascade expansion happens at pop time so chains keep
  // causal order even inside one quantized second.
  struct OutLine {
    double ts;
    uint64_t seq;
    std::string line;
    Json lineage;
  };
  std::vector<OutLine> lines;
  size_t depth_limit_hits = 0;
  std::map<uint64_t, int> depth_of;

  while (!queue.empty()) {
    Emission e = queue.top();
    queue.pop();
    const GenDevice& dev = topo.devices[e.device];
    size_t sem = e.semantic;
    int style = dev.vendor_style;
    const CatalogEntry& entry = cat[sem];
    const std::string& format = entry.formats[static_cast<size_t>(style) % entry.formats.size()];
    used_formats.insert({sem, style});

    double quantum = spec.granularity > 0 ? spec.granularity : 0.001;
    double ts = std::floor(e.t / quantum) * quantum;

    SplitMix64 fmt_rng(mix_seed(spec.seed, 2000 + sem, e.seq));
    std::string message = instantiate_format(format, fmt_rng, dev.pod, e.device);

    SyslogRecord rec;
    rec.timestamp = ts;
    rec.device = dev.name;
    rec.facility = entry.facility;
    rec.severity = entry.severity;
    rec.message = message;

    Json lineage{{"seq", e.seq},
                 {"ts", ts},
                 {"device", dev.name},
                 {"semantic", entry.semantic},
                 {"vendor_style", style},
                 {"kind", e.kind},
                 {"label", e.rule}};
    if (e.kind == "effect") lineage["parent"] = e.parent;
    if (e.kind == "instance") lineage["instance"] = e.parent;
    lines.push_back({ts, e.seq, format_syslog_line(rec), std::move(lineage)});

    if (e.kind == "noise") {
      truth.noise_count += 1;
    }

    if (spec.mode != "continuous") continue;

    int depth = 0;
    if (auto it = depth_of.find(e.seq); it != depth_of.end()) depth = it->second;
    auto rit = rules_by_cause.find(sem);
    if (rit == rules_by_cause.end()) continue;
    for (size_t rule_idx : rit->second) {
      const RuleSpec& rule = spec.rules[rule_idx];
      SplitMix64 rng(mix_seed(spec.seed, 3000 + rule_idx, e.seq));
      if (rng.uniform() >= rule.probability) continue;
      if (depth >= 16) {
        ++depth_limit_hits;
        continue;
      }
      size_t target = e.device;
      if (rule.channel == "physical" || rule.channel.rfind("protocol:", 0) == 0) {
        const auto& adj = rule.channel == "physical" ? topo.phys_adj[dev.name]
                                                     : topo.ospf_adj[dev.name];
        if (adj.empty()) continue;
        target = topo.index.at(adj[rng.below(adj.size())]);
      }
      double lag = sample_lag(rule.lag, rng);
      size_t effect_sem = catalog_index(rule.effect);
      uint64_t child_seq = next_seq++;
      depth_of[child_seq] = depth + 1;
      queue.push({e.t + lag, child_seq, target, effect_sem, "effect", rule.name,
                  static_cast<int64_t>(e.seq)});

      const GenDevice& tdev = topo.devices[target];
      std::string cause_sig =
          masked_signature(entry.formats[static_cast<size_t>(style) % entry.formats.size()]);
      const CatalogEntry& eff_entry = cat[effect_sem];
      std::string effect_sig = masked_signature(
          eff_entry.formats[static_cast<size_t>(tdev.vendor_style) % eff_entry.formats.size()]);
      used_formats.insert({effect_sem, tdev.vendor_style});
      edge_acc.add(cause_sig, effect_sig, channel_name_of(rule.channel), lag, dev.name,
                   tdev.name);
    }
  }

  validate_format_separation(used_formats);

  // Corpus in quantized-time order; pop order already respects real time, so
  // a stable sort keeps cascades ordered inside one second.
  std::stable_sort(lines.begin(), lines.end(), [](const OutLine& a, const OutLine& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.seq < b.seq;
  });

  std::ostringstream corpus;
  std::ostringstream lineage_out;
  lineage_out << Json{{"meta", Json{{"format", "lineage"}, {"version", 1}}},
                      {"events", lines.size()}}
                     .dump()
              << "\n";
  for (const auto& l : lines) {
    corpus << l.line << "\n";
    lineage_out << l.lineage.dump() << "\n";
  }

  GenerateResult result;
  result.corpus_path = out_dir + "/syslog.log";
  result.configs_dir = out_dir + "/configs";
  result.truth_path = out_dir + "/truth.json";
  result.lineage_path = out_dir + "/lineage.ndjson";
  write_text_file(result.corpus_path, corpus.str());
  write_text_file(result.lineage_path, lineage_out.str());

  for (const auto& d : topo.devices) {
    truth.devices.push_back({d.name, spec.vendors[static_cast<size_t>(d.vendor_style)].name,
                             spec.vendors[static_cast<size_t>(d.vendor_style)].os,
                             tier_name(d.tier), d.pod});
  }
  for (const auto& [a, b] : topo.phys_links) truth.physical_links.emplace_back(a, b);
  for (const auto& [key, edge] : edge_acc.edges) truth.edges.push_back(edge);

  std::set<std::string> sigs;
  for (const auto& [sem, style] : used_formats) {
    const auto& entry = cat[sem];
    sigs.insert(masked_signature(entry.formats[static_cast<size_t>(style) %
                                               entry.formats.size()]));
  }
  truth.expected_signatures.assign(sigs.begin(), sigs.end());
  truth.expected_class_count = distinct_raw_shapes.size();
  truth.expected_type_count = distinct_norm_shapes.size();
  truth.event_count = lines.size();

  for (const auto& edit : spec.config_edits) {
    ConfigChangeSet c;
    c.device = topo.devices[static_cast<size_t>(edit.device_index)].name;
    c.effective_date = format_date(parse_date(spec.start_date) + edit.day);
    c.changed_sections.push_back("banner");
    truth.config_edits.push_back(std::move(c));
  }

  truth.save(result.truth_path);
  result.truth = truth;
  result.lines_written = lines.size();
  return result;
}

// --- ground truth (de)serialization --------------------------------------

Json GroundTruth::to_json() const {
  Json devs = Json::array();
  for (const auto& d : devices) {
    devs.push_back(Json{{"name", d.name},
                        {"vendor", d.vendor},
                        {"os", d.os},
                        {"tier", d.tier},
                        {"pod", d.pod}});
  }
  Json links = Json::array();
  for (const auto& [a, b] : physical_links) links.push_back(Json::array({a, b}));
  Json edges_json = Json::array();
  for (const auto& e : edges) {
    Json pairs = Json::array();
    for (const auto& p : e.device_pairs) pairs.push_back(Json::array({p.a, p.b}));
    edges_json.push_back(Json{{"cause", e.cause_signature},
                              {"effect", e.effect_signature},
                              {"channel", e.channel},
                              {"occurrences", e.occurrences},
                              {"max_lag", e.max_lag},
                              {"device_pairs", pairs}});
  }
  Json bursts_json = Json::array();
  for (const auto& b : bursts) {
    bursts_json.push_back(Json{{"start", b.start},
                               {"end", b.end},
                               {"type", b.type},
                               {"devices", b.devices}});
  }
  Json edits = Json::array();
  for (const auto& c : config_edits) {
    edits.push_back(Json{{"device", c.device},
                         {"date", c.effective_date},
                         {"sections", c.changed_sections}});
  }
  return Json{{"meta", Json{{"format", "ground-truth"}, {"version", 1}}},
              {"devices", devs},
              {"physical_links", links},
              {"edges", edges_json},
              {"expected_signatures", expected_signatures},
              {"bursts", bursts_json},
              {"config_edits", edits},
              {"expected_class_count", expected_class_count},
              {"expected_type_count", expected_type_count},
              {"analytic_tier_share", analytic_tier_share},
              {"event_count", event_count},
              {"noise_count", noise_count}};
}

GroundTruth GroundTruth::from_json(const Json& j) {
  if (j.at("meta").value("format", "") != "ground-truth") {
    throw Error(ErrorCode::VersionMismatch, "not a ground-truth file");
  }
  GroundTruth t;
  for (const auto& dj : j.at("devices")) {
    t.devices.push_back({dj.at("name").get<std::string>(), dj.at("vendor").get<std::string>(),
                         dj.at("os").get<std::string>(), dj.at("tier").get<std::string>(),
                         dj.at("pod").get<int>()});
  }
  for (const auto& lj : j.at("physical_links")) {
    t.physical_links.emplace_back(lj.at(0).get<std::string>(), lj.at(1).get<std::string>());
  }
  for (const auto& ej : j.at("edges")) {
    TruthEdge e;
    e.cause_signature = ej.at("cause").get<std::string>();
    e.effect_signature = ej.at("effect").get<std::string>();
    e.channel = ej.at("channel").get<std::string>();
    e.occurrences = ej.at("occurrences").get<size_t>();
    e.max_lag = ej.at("max_lag").get<double>();
    for (const auto& pj : ej.value("device_pairs", Json::array())) {
      e.device_pairs.insert(DevicePairKey(pj.at(0).get<std::string>(),
                                          pj.at(1).get<std::string>()));
    }
    t.edges.push_back(std::move(e));
  }
  for (const auto& s : j.at("expected_signatures")) {
    t.expected_signatures.push_back(s.get<std::string>());
  }
  for (const auto& bj : j.value("bursts", Json::array())) {
    BurstInfo b;
    b.start = bj.at("start").get<double>();
    b.end = bj.at("end").get<double>();
    b.type = bj.at("type").get<std::string>();
    for (const auto& d : bj.at("devices")) b.devices.push_back(d.get<std::string>());
    t.bursts.push_back(std::move(b));
  }
  for (const auto& cj : j.value("config_edits", Json::array())) {
    ConfigChangeSet c;
    c.device = cj.at("device").get<std::string>();
    c.effective_date = cj.at("date").get<std::string>();
    for (const auto& s : cj.at("sections")) c.changed_sections.push_back(s.get<std::string>());
    t.config_edits.push_back(std::move(c));
  }
  t.expected_class_count = j.value("expected_class_count", size_t{0});
  t.expected_type_count = j.value("expected_type_count", size_t{0});
  if (j.contains("analytic_tier_share")) {
    t.analytic_tier_share = j.at("analytic_tier_share").get<std::map<std::string, double>>();
  }
  t.event_count = j.value("event_count", size_t{0});
  t.noise_count = j.value("noise_count", size_t{0});
  return t;
}

GroundTruth GroundTruth::load(const std::string& path) {
  return from_json(read_json_file(path));
}

void GroundTruth::save(const std::string& path) const {
  write_json_file(path, to_json());
}

CausalityMatrix truth_matrix(const GroundTruth& truth, const TemplateDictionary& dict) {
  std::map<std::string, int> id_of;
  for (const auto& t : dict.templates()) id_of[t.signature_text()] = t.id;

  CausalityMatrix m;
  m.template_count = dict.size();
  m.dict_hash = dict.dict_hash();
  for (const auto& t : dict.templates()) m.template_signatures.push_back(t.signature_text());

  for (const auto& e : truth.edges) {
    auto ci = id_of.find(e.cause_signature);
    auto ei = id_of.find(e.effect_signature);
    if (ci == id_of.end() || ei == id_of.end()) {
      throw Error(ErrorCode::ScoreError,
                  "truth edge signature missing from dictionary: " + e.cause_signature);
    }
    MatrixEntry entry;
    entry.pair.cause = ci->second;
    entry.pair.effect = ei->second;
    entry.pair.channel = Channel::parse(e.channel);
    entry.pair.max_lag = e.max_lag + 1.0; // quantization headroom
    entry.pair.support = static_cast<int>(e.occurrences);
    entry.pair.device_pairs = e.device_pairs;
    entry.result.accepted = true;
    entry.result.p_value = 0.0;
    entry.result.correlation = 1.0;
    m.entries.push_back(std::move(entry));
  }
  std::sort(m.entries.begin(), m.entries.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return a.pair.key() < b.pair.key();
  });
  return m;
}

// --- scoring --------------------------------------------------------------

Json ScoreReport::to_json() const {
  Json per = Json::object();
  for (const auto& [channel, counts] : per_channel) {
    per[channel] = Json{{"recovered", counts.first}, {"planted", counts.second}};
  }
  Json missed_json = Json::array(), spurious_json = Json::array();
  for (const auto& [c, e] : missed) missed_json.push_back(Json::array({c, e}));
  for (const auto& [c, e] : spurious) spurious_json.push_back(Json::array({c, e}));
  return Json{{"precision", precision},
              {"recall", recall},
              {"f1", f1},
              {"empty_inferred", empty_inferred},
              {"true_positives", true_positives},
              {"false_positives", false_positives},
              {"false_negatives", false_negatives},
              {"per_channel", per},
              {"missed", missed_json},
              {"spurious", spurious_json}};
}

ScoreReport score_matrix(const CausalityMatrix& inferred, const GroundTruth& truth) {
  if (!inferred.entries.empty() && inferred.template_signatures.empty()) {
    throw Error(ErrorCode::ScoreError, "inferred matrix carries no template signatures");
  }
  std::set<std::string> known(truth.expected_signatures.begin(),
                              truth.expected_signatures.end());
  for (const auto& e : inferred.entries) {
    const auto& cs = inferred.template_signatures.at(static_cast<size_t>(e.pair.cause));
    const auto& es = inferred.template_signatures.at(static_cast<size_t>(e.pair.effect));
    if (!known.count(cs) || !known.count(es)) {
      throw Error(ErrorCode::ScoreError,
                  "inferred matrix uses a dictionary the truth does not know: " + cs);
    }
  }

  std::set<std::pair<std::string, std::string>> inferred_set, truth_set;
  for (const auto& e : inferred.entries) {
    inferred_set.insert({inferred.template_signatures.at(static_cast<size_t>(e.pair.cause)),
                         inferred.template_signatures.at(static_cast<size_t>(e.pair.effect))});
  }
  std::map<std::pair<std::string, std::string>, std::string> truth_channels;
  for (const auto& e : truth.edges) {
    truth_set.insert({e.cause_signature, e.effect_signature});
    truth_channels[{e.cause_signature, e.effect_signature}] = e.channel;
  }

  ScoreReport report;
  for (const auto& pair : inferred_set) {
    if (truth_set.count(pair)) {
      report.true_positives += 1;
    } else {
      report.false_positives += 1;
      report.spurious.push_back(pair);
    }
  }
  for (const auto& pair : truth_set) {
    auto channel = truth_channels.at(pair);
    report.per_channel[channel].second += 1;
    if (inferred_set.count(pair)) {
      report.per_channel[channel].first += 1;
    } else {
      report.false_negatives += 1;
      report.missed.push_back(pair);
    }
  }

  if (inferred_set.empty()) {
    report.empty_inferred = true;
    report.precision = 1.0; // convention for an empty inferred set
  } else {
    report.precision = static_cast<double>(report.true_positives) /
                       static_cast<double>(inferred_set.size());
  }
  report.recall = truth_set.empty()
                      ? 1.0
                      : static_cast<double>(report.true_positives) /
                            static_cast<double>(truth_set.size());
  report.f1 = (report.precision + report.recall) > 0
                  ? 2 * report.precision * report.recall / (report.precision + report.recall)
                  : 0.0;
  return report;
}

} // namespace synth
} // namespace causelog
