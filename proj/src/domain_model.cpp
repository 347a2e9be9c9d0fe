#include "causelog/domain_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <functional>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/version.hpp"

namespace causelog {

const char* tier_name(DeviceTier tier) {
  switch (tier) {
    case DeviceTier::TOR: return "TOR";
    case DeviceTier::AGG: return "AGG";
    case DeviceTier::CORE: return "CORE";
    case DeviceTier::MB: return "MB";
  }
  return "TOR";
}

DeviceTier tier_from_name(const std::string& name) {
  if (name == "TOR") return DeviceTier::TOR;
  if (name == "AGG") return DeviceTier::AGG;
  if (name == "CORE") return DeviceTier::CORE;
  if (name == "MB") return DeviceTier::MB;
  throw Error(ErrorCode::ParseError, "unknown device tier '" + name + "'");
}

const char* protocol_name(Protocol p) {
  switch (p) {
    case Protocol::BGP: return "BGP";
    case Protocol::OSPF: return "OSPF";
    case Protocol::VLAN: return "VLAN";
  }
  return "OSPF";
}

Protocol protocol_from_name(const std::string& name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (up == "BGP") return Protocol::BGP;
  if (up == "OSPF") return Protocol::OSPF;
  if (up == "VLAN") return Protocol::VLAN;
  throw Error(ErrorCode::ParseError, "unknown protocol '" + name + "'");
}

namespace {

struct ConfigToken {
  std::string text;
  size_t line = 0;
};

std::vector<ConfigToken> lex_config(const std::string& text) {
  std::vector<ConfigToken> out;
  size_t line = 1;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      out.push_back({cur, line});
      cur.clear();
    }
  };
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '\n') {
      flush();
      ++line;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == '{' || c == '}' || c == ';') {
      flush();
      out.push_back({std::string(1, c), line});
    } else if (c == '#') {
      flush();
      while (i < text.size() && text[i] != '\n') ++i;
      --i;
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

class ConfigParser {
public:
  explicit ConfigParser(const std::string& text) : tokens_(lex_config(text)) {}

  DeviceModel parse() {
    expect("device");
    DeviceModel dev;
    dev.name = take("device name");
    expect("{");
    while (!peek_is("}")) {
      parse_statement(dev);
    }
    expect("}");
    if (pos_ != tokens_.size()) {
      fail("trailing input after device block");
    }
    finalize_sections(dev);
    return dev;
  }

private:
  [[noreturn]] void fail(const std::string& what) {
    size_t line = pos_ < tokens_.size() ? tokens_[pos_].line
                                        : (tokens_.empty() ? 1 : tokens_.back().line);
    throw Error(ErrorCode::ParseError, what + " at line " + std::to_string(line));
  }

  bool peek_is(const std::string& s) const {
    return pos_ < tokens_.size() && tokens_[pos_].text == s;
  }

  std::string take(const std::string& what) {
    if (pos_ >= tokens_.size()) fail("expected " + what + ", found end of file");
    return tokens_[pos_++].text;
  }

  void expect(const std::string& s) {
    if (pos_ >= tokens_.size()) fail("expected '" + s + "', found end of file");
    if (tokens_[pos_].text != s) fail("expected '" + s + "', found '" + tokens_[pos_].text + "'");
    ++pos_;
  }

  double take_number(const std::string& what) {
    std::string tok = take(what);
    double v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      --pos_;
      fail(what + " must be numeric, found '" + tok + "'");
    }
    return v;
  }

  void parse_statement(DeviceModel& dev) {
    std::string head = take("statement");
    if (head == "vendor") {
      dev.vendor = take("vendor value");
      dev.sections["vendor"] = dev.vendor;
      expect(";");
    } else if (head == "os") {
      dev.os_version = take("os value");
      dev.sections["os"] = dev.os_version;
      expect(";");
    } else if (head == "tier") {
      std::string t = take("tier value");
      dev.tier = tier_from_name(t);
      dev.sections["tier"] = t;
      expect(";");
    } else if (head == "interface") {
      InterfaceDecl decl;
      decl.name = take("interface name");
      expect("peer");
      std::string peer = take("peer endpoint");
      auto colon = peer.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 >= peer.size()) {
        --pos_;
        fail("peer endpoint must be <device>:<interface>");
      }
      decl.peer_device = peer.substr(0, colon);
      decl.peer_interface = peer.substr(colon + 1);
      expect(";");
      dev.sections["interface " + decl.name] = decl.peer_device + ":" + decl.peer_interface;
      dev.interfaces.push_back(std::move(decl));
    } else if (head == "vlan") {
      double id = take_number("vlan id");
      dev.vlans.push_back(static_cast<int>(id));
      expect(";");
    } else if (head == "bgp" || head == "ospf") {
      ProtocolStanza stanza;
      stanza.protocol = protocol_from_name(head);
      expect("{");
      std::ostringstream canon;
      while (!peek_is("}")) {
        std::string key = take("protocol statement");
        if (key == "peer") {
          stanza.peers.push_back(take("peer device"));
          canon << "peer " << stanza.peers.back() << ";";
        } else {
          double secs = take_number("timer value");
          if (secs <= 0) {
            --pos_;
            fail("timer '" + key + "' must be positive");
          }
          stanza.timers[key] = secs;
          canon << key << " " << secs << ";";
        }
        expect(";");
      }
      expect("}");
      dev.sections[head] = canon.str();
      dev.protocols.push_back(std::move(stanza));
    } else if (peek_is("{")) {
      // Unknown block: preserve verbatim for diffing.
      expect("{");
      std::ostringstream body;
      int depth = 1;
      while (depth > 0) {
        std::string tok = take("unknown block body");
        if (tok == "{") ++depth;
        if (tok == "}") {
          --depth;
          if (depth == 0) break;
        }
        body << tok << " ";
      }
      dev.sections[head] = body.str();
    } else {
      // Unknown statement: preserve verbatim.
      std::ostringstream body;
      while (!peek_is(";")) {
        body << take("unknown statement body") << " ";
      }
      expect(";");
      dev.sections[head] = body.str();
    }
  }

  void finalize_sections(DeviceModel& dev) {
    if (!dev.vlans.empty()) {
      std::vector<int> sorted = dev.vlans;
      std::sort(sorted.begin(), sorted.end());
      std::ostringstream body;
      for (int v : sorted) body << v << ";";
      dev.sections["vlan"] = body.str();
    }
  }

  std::vector<ConfigToken> tokens_;
  size_t pos_ = 0;
};

} // namespace

DeviceModel parse_config(const std::string& text) {
  return ConfigParser(text).parse();
}

std::vector<ConfigChangeSet> diff_configs(const std::vector<DeviceModel>& day_a,
                                          const std::vector<DeviceModel>& day_b,
                                          const std::string& effective_date) {
  std::map<std::string, const DeviceModel*> a, b;
  for (const auto& d : day_a) a[d.name] = &d;
  for (const auto& d : day_b) b[d.name] = &d;

  std::vector<ConfigChangeSet> out;
  std::set<std::string> names;
  for (const auto& [n, _] : a) names.insert(n);
  for (const auto& [n, _] : b) names.insert(n);

  for (const auto& name : names) {
    auto ia = a.find(name);
    auto ib = b.find(name);
    ConfigChangeSet change;
    change.device = name;
    change.effective_date = effective_date;
    if (ia == a.end() || ib == b.end()) {
      change.changed_sections.push_back("device");
      out.push_back(std::move(change));
      continue;
    }
    const auto& sa = ia->second->sections;
    const auto& sb = ib->second->sections;
    std::set<std::string> keys;
    for (const auto& [k, _] : sa) keys.insert(k);
    for (const auto& [k, _] : sb) keys.insert(k);
    for (const auto& k : keys) {
      auto va = sa.find(k);
      auto vb = sb.find(k);
      if (va == sa.end() || vb == sb.end() || va->second != vb->second) {
        change.changed_sections.push_back(k);
      }
    }
    if (!change.changed_sections.empty()) out.push_back(std::move(change));
  }
  return out;
}

namespace {

const char* relevant_timer(Protocol p) {
  switch (p) {
    case Protocol::OSPF: return "dead-interval";
    case Protocol::BGP: return "hold-time";
    case Protocol::VLAN: return "";
  }
  return "";
}

double default_timer(Protocol p, const PipelineConfig& cfg) {
  switch (p) {
    case Protocol::OSPF: return cfg.default_ospf_dead_interval;
    case Protocol::BGP: return cfg.default_bgp_hold_time;
    case Protocol::VLAN: return cfg.vlan_timer_seconds;
  }
  return cfg.vlan_timer_seconds;
}

} // namespace

DomainModel build_domain_model(const std::vector<DeviceModel>& devices,
                               const PipelineConfig& cfg) {
  DomainModel model;
  std::map<std::string, const DeviceModel*> by_name;
  for (const auto& d : devices) {
    by_name[d.name] = &d;
    model.devices[d.name] = {d.vendor, d.os_version, d.tier, -1};
  }

  // Physical edges from interface peering. One-sided peering keeps the edge
  // with a warning; a peer absent from the snapshot drops it with a warning.
  std::map<DevicePairKey, int> peer_mentions;
  for (const auto& d : devices) {
    for (const auto& ifc : d.interfaces) {
      if (!by_name.count(ifc.peer_device)) {
        model.warnings.push_back("dangling peer: " + d.name + " interface " + ifc.name +
                                 " peers unknown device " + ifc.peer_device);
        continue;
      }
      peer_mentions[DevicePairKey(d.name, ifc.peer_device)]++;
    }
  }
  for (const auto& [pair, mentions] : peer_mentions) {
    model.physical.insert(pair);
    if (mentions < 2) {
      model.warnings.push_back("one-sided physical peering: " + pair.a + " -- " + pair.b);
    }
  }

  // Protocol overlays. BGP/OSPF edges come from peer statements; VLAN edges
  // are cliques over devices sharing a VLAN id (broadcast-domain semantics).
  std::map<Protocol, std::map<DevicePairKey, int>> overlay_mentions;
  auto timer_of = [&](const DeviceModel& d, Protocol p) {
    for (const auto& stanza : d.protocols) {
      if (stanza.protocol != p) continue;
      auto it = stanza.timers.find(relevant_timer(p));
      if (it != stanza.timers.end()) return it->second;
    }
    return default_timer(p, cfg);
  };

  for (const auto& d : devices) {
    for (const auto& stanza : d.protocols) {
      for (const auto& peer : stanza.peers) {
        if (!by_name.count(peer)) {
          model.warnings.push_back("dangling " + std::string(protocol_name(stanza.protocol)) +
                                   " peer: " + d.name + " -> " + peer);
          continue;
        }
        overlay_mentions[stanza.protocol][DevicePairKey(d.name, peer)]++;
      }
    }
  }
  std::map<int, std::vector<std::string>> vlan_members;
  for (const auto& d : devices) {
    for (int vlan : d.vlans) vlan_members[vlan].push_back(d.name);
  }
  for (const auto& [vlan, members] : vlan_members) {
    for (size_t i = 0; i < members.size(); ++i) {
      for (size_t j = i + 1; j < members.size(); ++j) {
        overlay_mentions[Protocol::VLAN][DevicePairKey(members[i], members[j])] += 2;
      }
    }
  }

  for (const auto& [proto, edges] : overlay_mentions) {
    for (const auto& [pair, mentions] : edges) {
      model.overlays[proto].insert(pair);
      if (mentions < 2) {
        model.warnings.push_back(std::string("one-sided ") + protocol_name(proto) +
                                 " peering: " + pair.a + " -- " + pair.b);
      }
      double ta = timer_of(*by_name.at(pair.a), proto);
      double tb = timer_of(*by_name.at(pair.b), proto);
      model.delay_bounds[proto][pair] = std::max(ta, tb) + cfg.slack_seconds;
    }
  }

  // Pods: connected components of the physical graph once CORE devices are
  // removed, numbered by their lexicographically smallest member.
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& pair : model.physical) {
    if (model.devices.at(pair.a).tier == DeviceTier::CORE ||
        model.devices.at(pair.b).tier == DeviceTier::CORE) {
      continue;
    }
    adj[pair.a].push_back(pair.b);
    adj[pair.b].push_back(pair.a);
  }
  std::vector<std::vector<std::string>> components;
  std::set<std::string> seen;
  for (const auto& [name, info] : model.devices) {
    if (info.tier == DeviceTier::CORE || seen.count(name)) continue;
    std::vector<std::string> stack = {name};
    std::vector<std::string> comp;
    seen.insert(name);
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      comp.push_back(cur);
      for (const auto& next : adj[cur]) {
        if (seen.insert(next).second) stack.push_back(next);
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  std::sort(components.begin(), components.end(),
            [](const auto& x, const auto& y) { return x.front() < y.front(); });
  for (size_t i = 0; i < components.size(); ++i) {
    for (const auto& name : components[i]) {
      model.devices[name].pod = static_cast<int>(i);
    }
  }
  return model;
}

std::optional<double> DomainModel::delay_bound(Protocol p, const std::string& x,
                                               const std::string& y) const {
  auto it = delay_bounds.find(p);
  if (it == delay_bounds.end()) return std::nullopt;
  auto jt = it->second.find(DevicePairKey(x, y));
  if (jt == it->second.end()) return std::nullopt;
  return jt->second;
}

std::vector<std::string> DomainModel::overlay_reachability_violations() const {
  // Union-find over the physical graph.
  std::map<std::string, std::string> parent;
  for (const auto& [name, _] : devices) parent[name] = name;
  std::function<std::string(const std::string&)> find = [&](const std::string& x) {
    if (parent[x] != x) parent[x] = find(parent[x]);
    return parent[x];
  };
  for (const auto& pair : physical) {
    parent[find(pair.a)] = find(pair.b);
  }

  std::vector<std::string> violations;
  for (const auto& [proto, edges] : overlays) {
    for (const auto& pair : edges) {
      if (find(pair.a) != find(pair.b)) {
        violations.push_back(std::string(protocol_name(proto)) + " overlay edge " + pair.a +
                             " -- " + pair.b + " is not physically connected");
      }
    }
  }
  return violations;
}

Json DomainModel::to_json(const PipelineConfig& cfg) const {
  FileMeta meta;
  meta.format = "domain-model";
  meta.config_hash = cfg.hash();

  Json devs = Json::array();
  for (const auto& [name, info] : devices) {
    devs.push_back(Json{{"name", name},
                        {"vendor", info.vendor},
                        {"os", info.os_version},
                        {"tier", tier_name(info.tier)},
                        {"pod", info.pod}});
  }
  Json phys = Json::array();
  for (const auto& pair : physical) phys.push_back(Json::array({pair.a, pair.b}));

  Json over = Json::object();
  for (const auto& [proto, edges] : overlays) {
    Json arr = Json::array();
    for (const auto& pair : edges) arr.push_back(Json::array({pair.a, pair.b}));
    over[protocol_name(proto)] = arr;
  }
  Json bounds = Json::array();
  for (const auto& [proto, edges] : delay_bounds) {
    for (const auto& [pair, secs] : edges) {
      bounds.push_back(Json{{"protocol", protocol_name(proto)},
                            {"a", pair.a},
                            {"b", pair.b},
                            {"seconds", secs}});
    }
  }
  Json chg = Json::array();
  for (const auto& c : changes) {
    chg.push_back(Json{{"device", c.device},
                       {"date", c.effective_date},
                       {"sections", c.changed_sections}});
  }
  return Json{{"meta", meta.to_json()}, {"devices", devs},        {"physical", phys},
              {"overlays", over},       {"delay_bounds", bounds}, {"changes", chg},
              {"warnings", warnings}};
}

DomainModel DomainModel::from_json(const Json& j) {
  FileMeta meta = FileMeta::from_json(j.at("meta"));
  check_meta(meta, "domain-model", 1);

  DomainModel model;
  for (const auto& dj : j.at("devices")) {
    DeviceInfo info;
    info.vendor = dj.at("vendor").get<std::string>();
    info.os_version = dj.at("os").get<std::string>();
    info.tier = tier_from_name(dj.at("tier").get<std::string>());
    info.pod = dj.at("pod").get<int>();
    model.devices[dj.at("name").get<std::string>()] = info;
  }
  for (const auto& ej : j.at("physical")) {
    model.physical.insert(DevicePairKey(ej.at(0).get<std::string>(), ej.at(1).get<std::string>()));
  }
  for (auto it = j.at("overlays").begin(); it != j.at("overlays").end(); ++it) {
    Protocol p = protocol_from_name(it.key());
    for (const auto& ej : it.value()) {
      model.overlays[p].insert(
          DevicePairKey(ej.at(0).get<std::string>(), ej.at(1).get<std::string>()));
    }
  }
  for (const auto& bj : j.at("delay_bounds")) {
    Protocol p = protocol_from_name(bj.at("protocol").get<std::string>());
    model.delay_bounds[p][DevicePairKey(bj.at("a").get<std::string>(),
                                        bj.at("b").get<std::string>())] =
        bj.at("seconds").get<double>();
  }
  for (const auto& cj : j.value("changes", Json::array())) {
    ConfigChangeSet c;
    c.device = cj.at("device").get<std::string>();
    c.effective_date = cj.at("date").get<std::string>();
    for (const auto& s : cj.at("sections")) c.changed_sections.push_back(s.get<std::string>());
    model.changes.push_back(std::move(c));
  }
  for (const auto& w : j.value("warnings", Json::array())) {
    model.warnings.push_back(w.get<std::string>());
  }
  return model;
}

DomainModel DomainModel::load(const std::string& path) {
  return from_json(read_json_file(path));
}

void DomainModel::save(const std::string& path, const PipelineConfig& cfg) const {
  write_json_file(path, to_json(cfg));
}

std::vector<DeviceModel> read_snapshot_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw Error(ErrorCode::IoError, "not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<DeviceModel> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(parse_config(read_text_file(f.string())));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, f.string() + ": " + e.what());
    }
  }
  return out;
}

SnapshotHistory read_config_tree(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw Error(ErrorCode::IoError, "not a directory: " + root);
  std::vector<std::string> days;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) days.push_back(entry.path().filename().string());
  }
  if (days.empty()) {
    // Flat layout: treat the directory itself as a single snapshot.
    SnapshotHistory history;
    history.days.emplace_back("", read_snapshot_dir(root));
    return history;
  }
  std::sort(days.begin(), days.end());
  SnapshotHistory history;
  for (const auto& day : days) {
    history.days.emplace_back(day, read_snapshot_dir(root + "/" + day));
  }
  return history;
}

DomainModel build_domain_model_from_history(const SnapshotHistory& history,
                                            const PipelineConfig& cfg) {
  if (history.days.empty()) throw Error(ErrorCode::IoError, "empty config history");
  DomainModel model = build_domain_model(history.days.back().second, cfg);
  for (size_t i = 1; i < history.days.size(); ++i) {
    auto changes = diff_configs(history.days[i - 1].second, history.days[i].second,
                                history.days[i].first);
    model.changes.insert(model.changes.end(), changes.begin(), changes.end());
  }
  return model;
}

} // namespace causelog
