#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "causelog/domain_model.hpp"
#include "causelog/graph_builder.hpp"
#include "causelog/templates.hpp"

namespace causelog {

struct PgSignature {
  std::string canonical_form;          // order-independent labeled-digraph encoding
  std::map<std::string, size_t> layer_profile; // stack layer -> vertex count
  std::set<std::string> tier_profile;

  bool operator==(const PgSignature&) const = default;
};

// Canonical encoding of the template-labeled digraph: equal strings iff the
// labeled graphs are isomorphic. Labels are usually unique per vertex (one
// vertex per template after merging), which makes refinement cheap; equal
// labels fall back to exact search.
std::string canonical_digraph(const std::vector<std::string>& labels,
                              const std::vector<std::pair<int, int>>& edges);

PgSignature canonical_form(const ProblemGraph& pg, const TemplateDictionary& dict,
                           const DomainModel* model);

// Vendor normalization: template signature -> "<layer>/<keyword>" via the
// stack-layer keyword map; templates with no keyword keep their signature.
std::string normalized_label(const Template& t, const LayerMap& layers);
std::string normalized_form(const ProblemGraph& pg, const TemplateDictionary& dict,
                            const LayerMap& layers);

// Serial reference and OpenMP kernel for per-graph signature computation.
std::vector<PgSignature> signatures_serial(const std::vector<ProblemGraph>& pgs,
                                           const TemplateDictionary& dict,
                                           const DomainModel* model);
std::vector<PgSignature> signatures_parallel(const std::vector<ProblemGraph>& pgs,
                                             const TemplateDictionary& dict,
                                             const DomainModel* model, int threads);

struct PgClass {
  PgSignature signature;
  std::vector<size_t> members; // pg indexes
  size_t exemplar = 0;
};

// Exact grouping by signature; classes sorted by member count descending,
// ties broken by signature bytes.
std::vector<PgClass> cluster_pgs(const std::vector<PgSignature>& signatures);

struct LayerBreakdown {
  std::map<std::string, size_t> tier_counts; // a PG counts in every tier it touches
  size_t cross_tier = 0;
  std::map<std::string, size_t> layer_counts;
  std::vector<std::string> warnings; // unknown devices
};

LayerBreakdown layer_breakdown(const std::vector<ProblemGraph>& pgs,
                               const TemplateDictionary& dict, const DomainModel& model);

struct PgStats {
  double duration_seconds = 0.0;
  size_t message_count = 0;
  size_t device_count = 0;
  std::vector<int> root_templates;
};

PgStats pg_stats(const ProblemGraph& pg);

// CSV reports plus one exemplar DOT per class, written under out_dir.
void write_reports(const std::string& out_dir, const std::vector<ProblemGraph>& pgs,
                   const TemplateDictionary& dict, const DomainModel& model,
                   const LayerMap& layers, const PipelineConfig& cfg);

} // namespace causelog
