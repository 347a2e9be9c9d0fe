#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causelog/meta.hpp"
#include "causelog/pipeline_config.hpp"
#include "causelog/syslog.hpp"
#include "causelog/tokenizer.hpp"

namespace causelog {

enum class StackLayer { PHY, L2, L3, L4, HW, OTHER };

const char* layer_name(StackLayer layer);
StackLayer layer_from_name(const std::string& name);

// Keyword-to-layer rules loaded from a versioned data file. First matching
// rule in file order wins; keywords match case-insensitively as substrings
// of a template's constant tokens.
class LayerMap {
public:
  static LayerMap load(const std::string& path);
  static LayerMap from_text(const std::string& text);

  StackLayer classify(const std::vector<std::string>& constant_tokens) const;
  // The rule keyword that fired, or nullopt; used for vendor normalization.
  std::optional<std::pair<StackLayer, std::string>> match(
      const std::vector<std::string>& constant_tokens) const;

  int version() const { return version_; }

private:
  struct Rule {
    StackLayer layer;
    std::string keyword;
  };
  std::vector<Rule> rules_;
  int version_ = 0;
};

enum class SlotKind { Constant, Any, Num, Ip, Mac, Iface };

struct Slot {
  SlotKind kind = SlotKind::Constant;
  std::string text; // set only for Constant slots

  bool operator==(const Slot& other) const = default;
};

struct Template {
  int id = 0;
  std::vector<Slot> signature;
  std::string vendor_tag; // empty when unknown
  StackLayer stack_layer = StackLayer::OTHER;

  std::vector<std::string> constant_tokens() const;
  std::string signature_text() const; // space-joined, wildcards as markers
  size_t constant_count() const;
};

struct TemplateEvent {
  int template_id = 0;
  double timestamp = 0.0;
  std::string device;
  size_t raw_index = 0; // ordinal of the source line in the sorted corpus
  // Original variable-position tokens, in signature order; kept so a matched
  // line can be reconstructed from its template.
  std::vector<std::string> variables;
};

struct ExtractStats {
  size_t lines_in = 0;
  size_t lines_used = 0;
  size_t dropped_no_constant = 0; // line would form a constant-free template
};

struct MatchStats {
  size_t matched = 0;
  size_t no_match = 0;
};

class TemplateDictionary {
public:
  const std::vector<Template>& templates() const { return templates_; }
  const Template& at(int id) const { return templates_.at(static_cast<size_t>(id)); }
  size_t size() const { return templates_.size(); }

  // Unique template whose constant slots equal the line's tokens. Ties
  // (possible below merge threshold 1.0) resolve to the template with the
  // most constant tokens, then the lowest id. NoMatch is nullopt.
  std::optional<TemplateEvent> match(const SyslogRecord& record, size_t raw_index) const;
  std::optional<int> match_tokens(const std::vector<Token>& tokens) const;

  // Candidate template ids per constant-token multiset key.
  const std::map<uint64_t, std::vector<int>>& token_index() const { return token_index_; }

  std::string dict_hash() const; // hash of the signature set, order-independent

  Json to_json(const PipelineConfig& cfg) const;
  static TemplateDictionary from_json(const Json& j);
  static TemplateDictionary load(const std::string& path);
  void save(const std::string& path, const PipelineConfig& cfg) const;

  // Rebuilds a dictionary from signature texts (wildcard markers included)
  // and layer names, e.g. from a problem-graph stream header.
  static TemplateDictionary from_signatures(
      const std::vector<std::pair<std::string, std::string>>& sig_and_layer);

  friend TemplateDictionary extract_templates(const std::vector<SyslogRecord>& corpus,
                                              const PipelineConfig& cfg,
                                              const LayerMap& layers, ExtractStats* stats);

private:
  void rebuild_index();

  std::vector<Template> templates_;
  std::map<uint64_t, std::vector<int>> token_index_;
  std::map<size_t, std::vector<int>> by_token_count_;
  double merge_threshold_ = 0.75;
};

// Clusters tokenized lines by (token count, constant-token agreement >= merge
// threshold). Deterministic given corpus order and config.
TemplateDictionary extract_templates(const std::vector<SyslogRecord>& corpus,
                                     const PipelineConfig& cfg, const LayerMap& layers,
                                     ExtractStats* stats = nullptr);

// Serial reference: one matcher pass in corpus order.
std::vector<std::optional<TemplateEvent>> match_stream_serial(
    const TemplateDictionary& dict, const std::vector<SyslogRecord>& corpus,
    MatchStats* stats = nullptr);

// OpenMP kernel; the dictionary is immutable and shared read-only. Output is
// indexed by line so it is identical to the serial reference.
std::vector<std::optional<TemplateEvent>> match_stream_parallel(
    const TemplateDictionary& dict, const std::vector<SyslogRecord>& corpus, int threads,
    MatchStats* stats = nullptr);

// Event stream (ndjson) serialization. The header line carries the dict hash
// and template count so downstream stages can verify provenance.
void save_events(const std::string& path, const std::vector<std::optional<TemplateEvent>>& events,
                 const TemplateDictionary& dict, const PipelineConfig& cfg);

struct EventStream {
  FileMeta meta;
  std::string dict_hash;
  size_t template_count = 0;
  size_t no_match_count = 0;
  std::vector<std::string> template_signatures;
  std::vector<TemplateEvent> events;
};

EventStream load_events(const std::string& path);

} // namespace causelog
