#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causelog/causality.hpp"
#include "causelog/domain_model.hpp"
#include "causelog/meta.hpp"
#include "causelog/templates.hpp"

namespace causelog {
namespace synth {

// --- scenario specification -------------------------------------------------

struct VendorSpec {
  std::string name;
  std::string os;
  double ratio = 1.0;
};

struct TopologySpec {
  int pods = 4;
  int devices = 64;
  std::map<std::string, double> ratios; // tier -> fraction; or explicit counts
  std::map<std::string, int> counts;
};

struct LagSpec {
  std::string kind = "truncexp"; // or "constant"
  double scale = 1.0;
  double bound = 5.0;
};

struct TriggerSpec {
  std::string semantic;
  std::string tier; // TOR/AGG/CORE/MB/ANY
  double rate_per_device_per_day = 0.0;
};

struct RuleSpec {
  std::string name;
  std::string cause;
  std::string effect;
  std::string channel = "within"; // within | physical | protocol:<p>
  double probability = 1.0;
  LagSpec lag;
};

struct NoiseSpec {
  std::vector<std::string> templates;
  double rate_per_template_per_day = 0.0;
};

struct EpisodicTypeSpec {
  std::string name;
  double weight = 1.0;
  std::string tier = "ANY"; // primary device tier
  std::string channel = "within"; // channel of cross-device edges
  std::vector<std::string> events;
  std::vector<double> offsets;          // seconds from instance start
  std::vector<int> device_of;           // 0 = primary, 1 = secondary
  std::vector<std::pair<int, int>> edges;
};

struct ConfigEditSpec {
  int device_index = 0; // into the sorted device list
  int day = 1;          // snapshot day the edit lands on
};

struct ScenarioSpec {
  std::string name = "scenario";
  uint64_t seed = 1;
  std::string mode = "continuous"; // or "episodic"
  int duration_days = 1;
  double granularity = 1.0; // timestamp quantum in seconds; 0 = milliseconds
  std::string start_date = "2026-01-05";
  TopologySpec topology;
  std::vector<VendorSpec> vendors;
  NoiseSpec noise;
  std::vector<TriggerSpec> triggers;
  std::vector<RuleSpec> rules;
  int episodic_instances = 0;
  double episodic_spacing = 120.0;
  std::vector<EpisodicTypeSpec> types;
  std::vector<ConfigEditSpec> config_edits;

  Json to_json() const;
  static ScenarioSpec from_json(const Json& j);
  static ScenarioSpec load(const std::string& path);
};

// --- ground truth -----------------------------------------------------------

struct TruthEdge {
  std::string cause_signature;
  std::string effect_signature;
  std::string channel; // engine channel name
  size_t occurrences = 0;
  double max_lag = 0.0;
  std::set<DevicePairKey> device_pairs;
};

struct BurstInfo {
  double start = 0.0;
  double end = 0.0;
  std::string type;
  std::vector<std::string> devices;
};

struct TruthDevice {
  std::string name;
  std::string vendor;
  std::string os;
  std::string tier;
  int pod = 0;
};

struct GroundTruth {
  std::vector<TruthDevice> devices;
  std::vector<std::pair<std::string, std::string>> physical_links;
  std::vector<TruthEdge> edges;
  std::vector<std::string> expected_signatures; // sorted, realized set
  std::vector<BurstInfo> bursts;                // episodic mode
  std::vector<ConfigChangeSet> config_edits;
  size_t expected_class_count = 0; // episodic: distinct merged shapes
  size_t expected_type_count = 0;  // episodic: shapes under normalized labels
  std::map<std::string, double> analytic_tier_share; // within-only episodic
  size_t event_count = 0;
  size_t noise_count = 0;

  Json to_json() const;
  static GroundTruth from_json(const Json& j);
  static GroundTruth load(const std::string& path);
  void save(const std::string& path) const;
};

// --- generation -------------------------------------------------------------

struct GenerateResult {
  GroundTruth truth;
  size_t lines_written = 0;
  std::string corpus_path;
  std::string configs_dir;
  std::string truth_path;
  std::string lineage_path;
};

// Writes syslog.log, configs/<date>/<device>.cfg, truth.json, and
// lineage.ndjson under out_dir. Identical spec and seed give identical bytes.
GenerateResult generate(const ScenarioSpec& spec, const std::string& out_dir);

// The reference matrix a perfect engine would recover, expressed against a
// concrete dictionary (usually the one extracted from the generated corpus).
CausalityMatrix truth_matrix(const GroundTruth& truth, const TemplateDictionary& dict);

// The semantic event catalog: per-vendor-style formats plus the declared
// layer/keyword used for normalization enumeration.
struct CatalogEntry {
  std::string semantic;
  std::string facility;
  int severity = 5;
  StackLayer layer = StackLayer::OTHER;
  std::string keyword;
  std::vector<std::string> formats; // one per vendor style
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry& catalog_entry(const std::string& semantic);

// Masked signature text of a format (placeholders become wildcard markers).
// Computed by substitution, independent of the tokenizer.
std::string masked_signature(const std::string& format);

// --- scoring ----------------------------------------------------------------

struct ScoreReport {
  double precision = 1.0;
  double recall = 1.0;
  double f1 = 1.0;
  bool empty_inferred = false;
  size_t true_positives = 0;
  size_t false_positives = 0;
  size_t false_negatives = 0;
  std::map<std::string, std::pair<size_t, size_t>> per_channel; // channel -> (tp, truth)
  std::vector<std::pair<std::string, std::string>> missed;
  std::vector<std::pair<std::string, std::string>> spurious;

  Json to_json() const;
};

// Edge-set comparison on (cause signature, effect signature) pairs, channels
// deduplicated. Throws ScoreError when the inferred matrix's signatures do
// not come from the truth's dictionary.
ScoreReport score_matrix(const CausalityMatrix& inferred, const GroundTruth& truth);

} // namespace synth
} // namespace causelog
