#include "causelog/analysis.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>

#include "causelog/errors.hpp"
#include "causelog/exec.hpp"
#include "causelog/hashing.hpp"
#include "causelog/version.hpp"

namespace causelog {
namespace {

std::string render_ordered(const std::vector<std::string>& labels,
                           const std::vector<std::pair<int, int>>& edges,
                           const std::vector<int>& order) {
  // order[i] = original index placed at canonical position i
  std::vector<int> pos(order.size());
  for (size_t i = 0; i < order.size(); ++i) {
    pos[static_cast<size_t>(order[i])] = static_cast<int>(i);
  }

  std::ostringstream out;
  out << "V[";
  for (size_t i = 0; i < order.size(); ++i) {
    if (i) out << "|";
    out << labels[static_cast<size_t>(order[i])];
  }
  out << "]E[";
  std::vector<std::pair<int, int>> remapped;
  remapped.reserve(edges.size());
  for (const auto& [u, v] : edges) {
    remapped.emplace_back(pos[static_cast<size_t>(u)], pos[static_cast<size_t>(v)]);
  }
  std::sort(remapped.begin(), remapped.end());
  for (size_t i = 0; i < remapped.size(); ++i) {
    if (i) out << ",";
    out << remapped[i].first << ">" << remapped[i].second;
  }
  out << "]";
  return out.str();
}

} // namespace

std::string canonical_digraph(const std::vector<std::string>& labels,
                              const std::vector<std::pair<int, int>>& edges) {
  const size_t n = labels.size();
  if (n == 0) return "V[]E[]";

  // Refinement: a vertex's color folds in the sorted multisets of in/out
  // neighbor colors until the partition stops changing.
  std::vector<std::string> color = labels;
  std::vector<std::vector<int>> out_adj(n), in_adj(n);
  for (const auto& [u, v] : edges) {
    out_adj[static_cast<size_t>(u)].push_back(v);
    in_adj[static_cast<size_t>(v)].push_back(u);
  }
  for (size_t round = 0; round < n; ++round) {
    std::vector<std::string> next(n);
    for (size_t v = 0; v < n; ++v) {
      std::vector<std::string> outs, ins;
      for (int w : out_adj[v]) outs.push_back(color[static_cast<size_t>(w)]);
      for (int w : in_adj[v]) ins.push_back(color[static_cast<size_t>(w)]);
      std::sort(outs.begin(), outs.end());
      std::sort(ins.begin(), ins.end());
      std::ostringstream sig;
      sig << color[v] << "/o{";
      for (const auto& s : outs) sig << s << ";";
      sig << "}i{";
      for (const auto& s : ins) sig << s << ";";
      sig << "}";
      next[v] = to_hex(fnv1a64(sig.str())) + ":" + labels[v];
    }
    if (next == color) break;
    color = std::move(next);
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return color[static_cast<size_t>(a)] < color[static_cast<size_t>(b)];
  });

  std::vector<std::pair<size_t, size_t>> tied_groups; // [begin, end) in order
  for (size_t i = 0; i < n;) {
    size_t j = i;
    while (j + 1 < n &&
           color[static_cast<size_t>(order[j + 1])] == color[static_cast<size_t>(order[i])]) {
      ++j;
    }
    if (j > i) tied_groups.emplace_back(i, j + 1);
    i = j + 1;
  }
  if (tied_groups.empty()) return render_ordered(labels, edges, order);

  // Exact minimization over permutations within tied groups. Ties only
  // appear when distinct vertices share a label (vendor normalization), and
  // those groups stay tiny.
  size_t combos = 1;
  for (const auto& [b, e] : tied_groups) {
    size_t f = 1;
    for (size_t k = 2; k <= e - b; ++k) f *= k;
    combos *= f;
    if (combos > 40320) break;
  }
  if (combos > 40320) {
    return render_ordered(labels, edges, order);
  }

  std::string best;
  std::vector<int> work = order;
  std::function<void(size_t)> search = [&](size_t g) {
    if (g == tied_groups.size()) {
      std::string cand = render_ordered(labels, edges, work);
      if (best.empty() || cand < best) best = cand;
      return;
    }
    auto [b, e] = tied_groups[g];
    std::sort(work.begin() + static_cast<long>(b), work.begin() + static_cast<long>(e));
    do {
      search(g + 1);
    } while (std::next_permutation(work.begin() + static_cast<long>(b),
                                   work.begin() + static_cast<long>(e)));
  };
  search(0);
  return best;
}

PgSignature canonical_form(const ProblemGraph& pg, const TemplateDictionary& dict,
                           const DomainModel* model) {
  PgSignature sig;
  std::vector<std::string> labels;
  labels.reserve(pg.vertices.size());
  for (const auto& v : pg.vertices) {
    const Template& t = dict.at(v.template_id);
    labels.push_back(t.signature_text());
    sig.layer_profile[layer_name(t.stack_layer)] += 1;
    if (model) {
      for (const auto& dev : v.devices) {
        auto it = model->devices.find(dev);
        sig.tier_profile.insert(it == model->devices.end() ? "UNKNOWN"
                                                           : tier_name(it->second.tier));
      }
    }
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(pg.edges.size());
  for (const auto& e : pg.edges) edges.emplace_back(e.from, e.to);
  sig.canonical_form = canonical_digraph(labels, edges);
  return sig;
}

std::string normalized_label(const Template& t, const LayerMap& layers) {
  auto m = layers.match(t.constant_tokens());
  if (!m) return t.signature_text();
  return std::string(layer_name(m->first)) + "/" + m->second;
}

std::string normalized_form(const ProblemGraph& pg, const TemplateDictionary& dict,
                            const LayerMap& layers) {
  std::vector<std::string> labels;
  labels.reserve(pg.vertices.size());
  for (const auto& v : pg.vertices) {
    labels.push_back(normalized_label(dict.at(v.template_id), layers));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(pg.edges.size());
  for (const auto& e : pg.edges) edges.emplace_back(e.from, e.to);
  return canonical_digraph(labels, edges);
}

std::vector<PgSignature> signatures_serial(const std::vector<ProblemGraph>& pgs,
                                           const TemplateDictionary& dict,
                                           const DomainModel* model) {
  std::vector<PgSignature> out(pgs.size());
  for (size_t i = 0; i < pgs.size(); ++i) out[i] = canonical_form(pgs[i], dict, model);
  return out;
}

std::vector<PgSignature> signatures_parallel(const std::vector<ProblemGraph>& pgs,
                                             const TemplateDictionary& dict,
                                             const DomainModel* model, int threads) {
  std::vector<PgSignature> out(pgs.size());
  parallel_for_index(pgs.size(), threads,
                     [&](size_t i) { out[i] = canonical_form(pgs[i], dict, model); });
  return out;
}

std::vector<PgClass> cluster_pgs(const std::vector<PgSignature>& signatures) {
  std::map<std::string, std::vector<size_t>> groups;
  for (size_t i = 0; i < signatures.size(); ++i) {
    groups[signatures[i].canonical_form].push_back(i);
  }
  std::vector<PgClass> out;
  out.reserve(groups.size());
  for (auto& [canon, members] : groups) {
    PgClass cls;
    cls.signature = signatures[members.front()];
    cls.members = std::move(members);
    cls.exemplar = cls.members.front();
    out.push_back(std::move(cls));
  }
  std::sort(out.begin(), out.end(), [](const PgClass& a, const PgClass& b) {
    if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
    return a.signature.canonical_form < b.signature.canonical_form;
  });
  return out;
}

LayerBreakdown layer_breakdown(const std::vector<ProblemGraph>& pgs,
                               const TemplateDictionary& dict, const DomainModel& model) {
  LayerBreakdown out;
  std::set<std::string> warned;
  for (const auto& pg : pgs) {
    std::set<std::string> tiers;
    std::set<std::string> pg_layers;
    for (const auto& v : pg.vertices) {
      pg_layers.insert(layer_name(dict.at(v.template_id).stack_layer));
      for (const auto& dev : v.devices) {
        auto it = model.devices.find(dev);
        if (it == model.devices.end()) {
          tiers.insert("UNKNOWN");
          if (warned.insert(dev).second) {
            out.warnings.push_back("device not in model: " + dev);
          }
        } else {
          tiers.insert(tier_name(it->second.tier));
        }
      }
    }
    for (const auto& t : tiers) out.tier_counts[t] += 1;
    if (tiers.size() > 1) out.cross_tier += 1;
    for (const auto& l : pg_layers) out.layer_counts[l] += 1;
  }
  return out;
}

PgStats pg_stats(const ProblemGraph& pg) {
  PgStats s;
  s.duration_seconds = pg.duration();
  s.message_count = pg.message_count();
  s.device_count = pg.device_union().size();
  for (int r : pg.roots) {
    s.root_templates.push_back(pg.vertices[static_cast<size_t>(r)].template_id);
  }
  return s;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

void write_reports(const std::string& out_dir, const std::vector<ProblemGraph>& pgs,
                   const TemplateDictionary& dict, const DomainModel& model,
                   const LayerMap& layers, const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  auto signatures = cfg.threads == 1 ? signatures_serial(pgs, dict, &model)
                                     : signatures_parallel(pgs, dict, &model, cfg.threads);
  auto classes = cluster_pgs(signatures);
  LayerBreakdown breakdown = layer_breakdown(pgs, dict, model);

  const std::string stamp =
      std::string("# ") + kToolVersion + " config=" + cfg.hash() + "\n";

  std::ostringstream tiers;
  tiers << stamp;
  tiers << "tier,pg_count\n";
  for (const char* t : {"TOR", "AGG", "CORE", "MB", "UNKNOWN"}) {
    auto it = breakdown.tier_counts.find(t);
    tiers << t << "," << (it == breakdown.tier_counts.end() ? 0 : it->second) << "\n";
  }
  tiers << "CROSS_TIER," << breakdown.cross_tier << "\n";
  write_text_file(out_dir + "/tier_counts.csv", tiers.str());

  std::ostringstream lay;
  lay << stamp;
  lay << "layer,pg_count\n";
  for (const char* l : {"PHY", "L2", "L3", "L4", "HW", "OTHER"}) {
    auto it = breakdown.layer_counts.find(l);
    lay << l << "," << (it == breakdown.layer_counts.end() ? 0 : it->second) << "\n";
  }
  write_text_file(out_dir + "/layer_counts.csv", lay.str());

  std::ostringstream cls;
  cls << stamp;
  cls << "class_id,member_count,exemplar_pg,vertex_count,edge_count,signature_hash,labels\n";
  for (size_t c = 0; c < classes.size(); ++c) {
    const PgClass& k = classes[c];
    const ProblemGraph& ex = pgs[k.exemplar];
    std::vector<std::string> labels;
    for (const auto& v : ex.vertices) labels.push_back(dict.at(v.template_id).signature_text());
    std::sort(labels.begin(), labels.end());
    std::string joined;
    for (size_t i = 0; i < labels.size(); ++i) {
      if (i) joined += "|";
      joined += labels[i];
    }
    cls << c << "," << k.members.size() << "," << k.exemplar << "," << ex.vertices.size() << ","
        << ex.edges.size() << "," << to_hex(fnv1a64(k.signature.canonical_form)) << ",\"" << joined
        << "\"\n";
  }
  write_text_file(out_dir + "/classes.csv", cls.str());

  std::ostringstream st;
  st << stamp;
  st << "class_id,member_count,min_duration,median_duration,max_duration,min_length,"
        "median_length,max_length\n";
  for (size_t c = 0; c < classes.size(); ++c) {
    std::vector<double> durations, lengths;
    for (size_t m : classes[c].members) {
      PgStats s = pg_stats(pgs[m]);
      durations.push_back(s.duration_seconds);
      lengths.push_back(static_cast<double>(s.message_count));
    }
    auto mm = std::minmax_element(durations.begin(), durations.end());
    auto lm = std::minmax_element(lengths.begin(), lengths.end());
    st << c << "," << classes[c].members.size() << "," << *mm.first << "," << median_of(durations)
       << "," << *mm.second << "," << *lm.first << "," << median_of(lengths) << "," << *lm.second
       << "\n";
  }
  write_text_file(out_dir + "/class_stats.csv", st.str());

  // High-level types: the same graphs regrouped after vendor normalization
  // of vertex labels.
  std::map<std::string, size_t> type_counts;
  for (size_t i = 0; i < pgs.size(); ++i) {
    type_counts[normalized_form(pgs[i], dict, layers)] += 1;
  }
  std::ostringstream ty;
  ty << stamp;
  ty << "type_id,pg_count,normalized_form\n";
  size_t tid = 0;
  std::vector<std::pair<std::string, size_t>> types(type_counts.begin(), type_counts.end());
  std::sort(types.begin(), types.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [form, count] : types) {
    ty << tid++ << "," << count << ",\"" << form << "\"\n";
  }
  write_text_file(out_dir + "/normalized_types.csv", ty.str());

  const std::string dot_stamp =
      std::string("// ") + kToolVersion + " config=" + cfg.hash() + "\n";
  for (size_t c = 0; c < classes.size(); ++c) {
    write_text_file(out_dir + "/class_" + std::to_string(c) + "_exemplar.dot",
                    dot_stamp + pg_to_dot(pgs[classes[c].exemplar], dict, classes[c].exemplar));
  }
}

} // namespace causelog
