#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causelog/meta.hpp"
#include "causelog/pipeline_config.hpp"

namespace causelog {

enum class DeviceTier { TOR, AGG, CORE, MB };

const char* tier_name(DeviceTier tier);
DeviceTier tier_from_name(const std::string& name);

enum class Protocol { BGP, OSPF, VLAN };

const char* protocol_name(Protocol p);
Protocol protocol_from_name(const std::string& name);

struct ProtocolStanza {
  Protocol protocol = Protocol::OSPF;
  std::vector<std::string> peers;
  std::map<std::string, double> timers; // timer name -> seconds, positive
};

struct InterfaceDecl {
  std::string name;
  std::string peer_device;
  std::string peer_interface;
};

struct DeviceModel {
  std::string name;
  std::string vendor;
  std::string os_version;
  DeviceTier tier = DeviceTier::TOR;
  std::vector<InterfaceDecl> interfaces;
  std::vector<ProtocolStanza> protocols;
  std::vector<int> vlans;
  // Section name -> canonical text, for config diffing. Unknown sections are
  // preserved verbatim.
  std::map<std::string, std::string> sections;
};

// Parses one device config in the vendor-neutral grammar:
//   device <name> { vendor <v>; os <ver>; tier <T>;
//                   interface <if> peer <dev>:<if>;
//                   <protocol> { peer <dev>; <timer> <seconds>; }
//                   vlan <id>; }
// Throws Error(ParseError) with a line number on syntax errors.
DeviceModel parse_config(const std::string& text);

struct ConfigChangeSet {
  std::string device;
  std::string effective_date; // YYYY-MM-DD
  std::vector<std::string> changed_sections;
};

std::vector<ConfigChangeSet> diff_configs(const std::vector<DeviceModel>& day_a,
                                          const std::vector<DeviceModel>& day_b,
                                          const std::string& effective_date);

struct DevicePairKey {
  std::string a, b; // sorted so the pair is order-independent

  DevicePairKey() = default;
  DevicePairKey(std::string x, std::string y) {
    if (x <= y) {
      a = std::move(x);
      b = std::move(y);
    } else {
      a = std::move(y);
      b = std::move(x);
    }
  }
  auto operator<=>(const DevicePairKey&) const = default;
};

struct DomainModel {
  struct DeviceInfo {
    std::string vendor;
    std::string os_version;
    DeviceTier tier = DeviceTier::TOR;
    int pod = -1; // physical-graph component after removing CORE devices
  };

  std::map<std::string, DeviceInfo> devices;
  std::set<DevicePairKey> physical;
  std::map<Protocol, std::set<DevicePairKey>> overlays;
  std::map<Protocol, std::map<DevicePairKey, double>> delay_bounds;
  std::vector<ConfigChangeSet> changes; // accumulated across snapshot days
  std::vector<std::string> warnings;

  bool physically_adjacent(const std::string& x, const std::string& y) const {
    return physical.count(DevicePairKey(x, y)) > 0;
  }
  bool overlay_adjacent(Protocol p, const std::string& x, const std::string& y) const {
    auto it = overlays.find(p);
    return it != overlays.end() && it->second.count(DevicePairKey(x, y)) > 0;
  }
  std::optional<double> delay_bound(Protocol p, const std::string& x,
                                    const std::string& y) const;

  // Overlay edges whose endpoints are not connected in the physical graph,
  // directly or transitively. Reported, never silently accepted.
  std::vector<std::string> overlay_reachability_violations() const;

  Json to_json(const PipelineConfig& cfg) const;
  static DomainModel from_json(const Json& j);
  static DomainModel load(const std::string& path);
  void save(const std::string& path, const PipelineConfig& cfg) const;
};

// Physical graph from interface peering (one-sided peering is kept and
// warned about; peers missing from the snapshot are dropped and warned
// about), per-protocol overlays, and delay bounds of
// max(timer_a, timer_b) + slack.
DomainModel build_domain_model(const std::vector<DeviceModel>& devices,
                               const PipelineConfig& cfg);

// Reads every `<device>.cfg` under a snapshot directory, sorted by filename.
std::vector<DeviceModel> read_snapshot_dir(const std::string& dir);

// A config history: `<root>/<YYYY-MM-DD>/<device>.cfg`, days sorted.
struct SnapshotHistory {
  std::vector<std::pair<std::string, std::vector<DeviceModel>>> days;
};

SnapshotHistory read_config_tree(const std::string& root);

// Model from the most recent snapshot, with change sets accumulated from
// consecutive-day diffs.
DomainModel build_domain_model_from_history(const SnapshotHistory& history,
                                            const PipelineConfig& cfg);

} // namespace causelog
