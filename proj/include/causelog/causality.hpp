#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causelog/domain_model.hpp"
#include "causelog/meta.hpp"
#include "causelog/pipeline_config.hpp"
#include "causelog/templates.hpp"

namespace causelog {

enum class ChannelKind { WithinDevice, Physical, ProtocolOverlay };

struct Channel {
  ChannelKind kind = ChannelKind::WithinDevice;
  Protocol protocol = Protocol::OSPF; // meaningful only for ProtocolOverlay

  std::string name() const;
  static Channel parse(const std::string& name);
  auto operator<=>(const Channel&) const = default;
};

struct CandidatePair {
  int cause = 0;
  int effect = 0;
  Channel channel;
  double max_lag = 0.0;
  int support = 0;
  std::set<DevicePairKey> device_pairs;  // cross-device channels only
  std::set<std::string> cause_devices;   // devices contributing cause events
  std::set<std::string> effect_devices;

  auto key() const { return std::tie(cause, effect, channel); }
};

// Matching confounders compare with total equality; UNKNOWN fields compare
// equal only to UNKNOWN.
struct ConfoundingKey {
  std::string vendor = "UNKNOWN";
  std::string os_version = "UNKNOWN";
  std::string tier = "UNKNOWN";
  std::string topology_class = "UNKNOWN";
  std::string config_epoch = "UNKNOWN";

  bool operator==(const ConfoundingKey&) const = default;
};

struct CausalTestResult {
  double correlation = 0.0;
  double p_value = 1.0;
  double treated_rate = 0.0;
  double untreated_rate = 0.0;
  size_t treated_trials = 0;
  size_t untreated_trials = 0;
  size_t treated_successes = 0;
  size_t untreated_successes = 0;
  int control_template = -1;
  bool accepted = false;
};

enum class DiscardReason {
  LowCorrelation,
  InsufficientData,
  NoControl,
  Underpowered,
  NotSignificant,
};

const char* discard_reason_name(DiscardReason r);

struct AuditRecord {
  CandidatePair pair;
  DiscardReason reason;
  std::optional<double> correlation;
  std::optional<double> p_value;
  std::optional<int> control_template;
};

struct MatrixEntry {
  CandidatePair pair;
  CausalTestResult result;
};

struct CausalityMatrix {
  size_t template_count = 0;
  std::string dict_hash;
  std::vector<std::string> template_signatures; // indexed by template id
  std::vector<MatrixEntry> entries;             // sorted by (cause, effect, channel)

  const MatrixEntry* find(int cause, int effect, const Channel& channel) const;
  std::vector<const MatrixEntry*> entries_for_effect(int effect) const;
  bool any_entry(int cause, int effect) const;

  Json to_json(const PipelineConfig& cfg) const;
  static CausalityMatrix from_json(const Json& j);
  static CausalityMatrix load(const std::string& path);
  void save(const std::string& path, const PipelineConfig& cfg) const;
};

struct CausalityResult {
  CausalityMatrix matrix;
  std::vector<AuditRecord> audit;
  size_t candidate_count = 0;
  size_t tested_count = 0; // pairs that produced a p-value
};

void save_audit(const std::string& path, const std::vector<AuditRecord>& audit,
                const PipelineConfig& cfg);

// The offline causality engine: candidate generation from happens-before and
// domain adjacencies, a Spearman correlation gate, confounder-matched control
// selection, a one-sided two-proportion test (Fisher exact when any cell is
// small), and Benjamini-Hochberg correction across all tested pairs.
class CausalityEngine {
public:
  CausalityEngine(std::vector<TemplateEvent> events, const DomainModel& model,
                  const PipelineConfig& cfg, size_t template_count);

  const std::vector<CandidatePair>& candidate_pairs() const { return candidates_; }

  struct CorrelationOutcome {
    std::optional<double> rho; // nullopt: insufficient data
  };
  CorrelationOutcome correlate(const CandidatePair& pair) const;

  const ConfoundingKey& template_key(int t) const { return keys_.at(static_cast<size_t>(t)); }

  // Templates whose global-series correlation with the treatment strictly
  // exceeds alpha and whose confounding key equals the treatment's key.
  std::vector<int> build_confounding_set(int treatment) const;

  static std::optional<int> select_untreated(const std::vector<int>& pool, uint64_t seed);

  struct QedOutcome {
    std::optional<CausalTestResult> result; // nullopt: underpowered
    size_t treated_trials = 0;
    size_t untreated_trials = 0;
  };
  QedOutcome qed_test(const CandidatePair& pair, int control) const;

  // Full composition over all candidates. The serial variant is the
  // reference implementation; the parallel variant fans the pure per-pair
  // stages out over OpenMP and must produce byte-identical results.
  CausalityResult run_serial() const;
  CausalityResult run_parallel(int threads) const;
  CausalityResult run() const; // dispatches on cfg.threads

  void set_dict(const std::string& dict_hash, std::vector<std::string> signatures);

private:
  struct PairStage {
    std::optional<double> rho;
    std::optional<int> control;
    QedOutcome qed;
    std::optional<DiscardReason> early_discard;
  };

  void build_indexes();
  void build_candidates();
  void build_keys();
  std::vector<double> series_for(int t, const std::set<std::string>& devices) const;
  const std::vector<double>& global_series(int t) const;
  double global_rho(int a, int b) const;
  bool trial_success(const CandidatePair& pair, const std::string& device, double ts,
                     size_t raw_index) const;
  std::string epoch_label(const std::string& device, double ts) const;
  CausalityResult assemble(const std::vector<PairStage>& stages) const;
  template <typename ForIndex>
  CausalityResult run_with(ForIndex&& for_index) const;

  std::vector<TemplateEvent> events_;
  const DomainModel& model_;
  PipelineConfig cfg_;
  size_t template_count_;
  std::string dict_hash_;
  std::vector<std::string> signatures_;

  int64_t bin_lo_ = 0, bin_hi_ = 0;
  std::map<std::string, std::vector<size_t>> by_device_; // event indexes, time order
  std::map<std::pair<std::string, int>, std::vector<size_t>> by_device_template_;
  std::vector<std::set<std::string>> template_devices_;
  std::vector<std::map<std::string, std::map<int64_t, double>>> bin_counts_; // per template
  mutable std::vector<std::vector<double>> global_series_cache_;
  mutable std::vector<bool> global_series_ready_;
  std::vector<ConfoundingKey> keys_;
  std::vector<CandidatePair> candidates_;
  std::map<std::string, std::vector<int64_t>> change_days_; // per device, sorted
  std::map<std::string, std::vector<std::pair<std::string, double>>> phys_neighbors_;
  std::map<Protocol, std::map<std::string, std::vector<std::pair<std::string, double>>>>
      overlay_neighbors_;
};

// Convenience wrapper matching the pipeline stage: events come from a stream
// file whose header names the dictionary.
CausalityResult build_causality_matrix(const EventStream& stream, const DomainModel& model,
                                       const PipelineConfig& cfg);

} // namespace causelog
