#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "causelog/analysis.hpp"

using namespace causelog;

namespace {

ProblemGraph make_pg(const std::vector<std::pair<int, std::string>>& verts,
                     const std::vector<std::pair<int, int>>& edges,
                     const std::vector<double>& first_ts = {}) {
  ProblemGraph pg;
  for (size_t i = 0; i < verts.size(); ++i) {
    PgVertex v;
    v.template_id = verts[i].first;
    v.devices.insert(verts[i].second);
    v.occurrence_count = 1;
    v.first_ts = i < first_ts.size() ? first_ts[i] : static_cast<double>(i);
    v.last_ts = v.first_ts;
    pg.vertices.push_back(std::move(v));
  }
  for (const auto& [a, b] : edges) {
    PgEdge e;
    e.from = a;
    e.to = b;
    e.self_loop = a == b;
    pg.edges.push_back(std::move(e));
  }
  assign_roots(pg);
  return pg;
}

TemplateDictionary abc_dict() {
  return TemplateDictionary::from_signatures({
      {"alpha event", "L2"},
      {"beta event", "L3"},
      {"gamma event", "HW"},
  });
}

// Brute-force labeled digraph isomorphism over all vertex bijections.
bool isomorphic(const std::vector<std::string>& la,
                const std::vector<std::pair<int, int>>& ea,
                const std::vector<std::string>& lb,
                const std::vector<std::pair<int, int>>& eb) {
  if (la.size() != lb.size() || ea.size() != eb.size()) return false;
  std::vector<int> perm(la.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::set<std::pair<int, int>> eb_set(eb.begin(), eb.end());
  do {
    bool ok = true;
    for (size_t i = 0; i < la.size() && ok; ++i) {
      ok = la[i] == lb[static_cast<size_t>(perm[i])];
    }
    for (const auto& [u, v] : ea) {
      if (!ok) break;
      ok = eb_set.count({perm[static_cast<size_t>(u)], perm[static_cast<size_t>(v)]}) > 0;
    }
    if (ok) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

} // namespace

TEST_CASE("vertex order does not change the canonical form") {
  auto dict = abc_dict();
  auto pg1 = make_pg({{0, "d1"}, {1, "d1"}, {2, "d1"}}, {{0, 1}, {1, 2}});
  auto pg2 = make_pg({{2, "d1"}, {0, "d1"}, {1, "d1"}}, {{1, 2}, {2, 0}});
  CHECK(canonical_form(pg1, dict, nullptr).canonical_form ==
        canonical_form(pg2, dict, nullptr).canonical_form);
}

TEST_CASE("reversing a labeled path changes the canonical form") {
  auto dict = abc_dict();
  auto fwd = make_pg({{0, "d"}, {1, "d"}, {2, "d"}}, {{0, 1}, {1, 2}});
  auto rev = make_pg({{0, "d"}, {1, "d"}, {2, "d"}}, {{2, 1}, {1, 0}});
  CHECK(canonical_form(fwd, dict, nullptr).canonical_form !=
        canonical_form(rev, dict, nullptr).canonical_form);
}

TEST_CASE("duplicate labels canonicalize by structure") {
  std::vector<std::string> twice = {"x", "x", "y"};
  // Same graph written with the two x vertices swapped.
  CHECK(canonical_digraph(twice, {{0, 2}, {2, 1}}) == canonical_digraph(twice, {{1, 2}, {2, 0}}));
  // Structurally different graphs over the same label multiset stay apart:
  // x -> x -> y is not x -> y -> x... expressed as edge sets.
  CHECK(canonical_digraph(twice, {{0, 1}, {1, 2}}) != canonical_digraph(twice, {{0, 2}, {1, 2}}));
  // Self loop against plain edge.
  CHECK(canonical_digraph({"x"}, {{0, 0}}) != canonical_digraph({"x"}, {}));
}

TEST_CASE("class members are pairwise isomorphic as labeled digraphs") {
  auto dict = abc_dict();
  std::vector<ProblemGraph> pgs;
  // Three isomorphic graphs in shuffled vertex orders, plus one different.
  pgs.push_back(make_pg({{0, "d"}, {1, "d"}}, {{0, 1}}));
  pgs.push_back(make_pg({{1, "d"}, {0, "d"}}, {{1, 0}}));
  pgs.push_back(make_pg({{0, "e"}, {1, "e"}}, {{0, 1}}));
  pgs.push_back(make_pg({{1, "d"}, {0, "d"}}, {{0, 1}})); // reversed direction

  auto sigs = signatures_serial(pgs, dict, nullptr);
  auto classes = cluster_pgs(sigs);
  REQUIRE(classes.size() == 2);
  CHECK(classes[0].members.size() == 3);

  auto labels_of = [&](const ProblemGraph& pg) {
    std::vector<std::string> out;
    for (const auto& v : pg.vertices) out.push_back(dict.at(v.template_id).signature_text());
    return out;
  };
  auto edges_of = [&](const ProblemGraph& pg) {
    std::vector<std::pair<int, int>> out;
    for (const auto& e : pg.edges) out.emplace_back(e.from, e.to);
    return out;
  };
  for (const auto& cls : classes) {
    for (size_t i = 1; i < cls.members.size(); ++i) {
      const auto& a = pgs[cls.members[0]];
      const auto& b = pgs[cls.members[i]];
      CHECK(isomorphic(labels_of(a), edges_of(a), labels_of(b), edges_of(b)));
    }
  }
}

TEST_CASE("clustering identity and discrete cases") {
  auto dict = abc_dict();
  std::vector<ProblemGraph> same;
  for (int i = 0; i < 5; ++i) same.push_back(make_pg({{0, "d"}, {1, "d"}}, {{0, 1}}));
  auto one = cluster_pgs(signatures_serial(same, dict, nullptr));
  REQUIRE(one.size() == 1);
  CHECK(one[0].members.size() == 5);

  std::vector<ProblemGraph> distinct;
  distinct.push_back(make_pg({{0, "d"}}, {}));
  distinct.push_back(make_pg({{1, "d"}}, {}));
  distinct.push_back(make_pg({{2, "d"}}, {}));
  auto three = cluster_pgs(signatures_serial(distinct, dict, nullptr));
  CHECK(three.size() == 3);

  // Partition invariant: member counts sum to the corpus size.
  size_t total = 0;
  for (const auto& c : three) total += c.members.size();
  CHECK(total == distinct.size());
}

TEST_CASE("layer breakdown counts a graph in every tier it touches") {
  auto dict = abc_dict();
  DomainModel model;
  model.devices["tor1"] = {"v", "1", DeviceTier::TOR, 0};
  model.devices["agg1"] = {"v", "1", DeviceTier::AGG, 0};

  std::vector<ProblemGraph> pgs;
  pgs.push_back(make_pg({{0, "tor1"}, {1, "agg1"}}, {{0, 1}})); // cross-tier
  pgs.push_back(make_pg({{0, "tor1"}}, {}));
  pgs.push_back(make_pg({{2, "ghost"}}, {})); // unknown device

  auto breakdown = layer_breakdown(pgs, dict, model);
  CHECK(breakdown.tier_counts["TOR"] == 2);
  CHECK(breakdown.tier_counts["AGG"] == 1);
  CHECK(breakdown.tier_counts["UNKNOWN"] == 1);
  CHECK(breakdown.cross_tier == 1);
  CHECK_FALSE(breakdown.warnings.empty());
  CHECK(breakdown.layer_counts["L2"] == 2);
  CHECK(breakdown.layer_counts["L3"] == 1);
  CHECK(breakdown.layer_counts["HW"] == 1);

  auto empty = layer_breakdown({}, dict, model);
  CHECK(empty.tier_counts.empty());
  CHECK(empty.cross_tier == 0);
}

TEST_CASE("pg stats: degenerate, chain and burst") {
  auto dict = abc_dict();

  auto single = make_pg({{0, "d"}}, {});
  auto s1 = pg_stats(single);
  CHECK(s1.duration_seconds == doctest::Approx(0.0));
  CHECK(s1.message_count == 1);
  CHECK(s1.device_count == 1);

  auto chain = make_pg({{0, "d"}, {1, "d"}, {2, "d"}}, {{0, 1}, {1, 2}}, {0.0, 5.0, 12.0});
  auto s2 = pg_stats(chain);
  CHECK(s2.duration_seconds == doctest::Approx(12.0));
  CHECK(s2.message_count == 3);
  CHECK(s2.root_templates == std::vector<int>{0});

  // A 50-duplicate burst inside one second: long in messages, short in time.
  ProblemGraph burst = make_pg({{0, "d"}}, {{0, 0}});
  burst.vertices[0].occurrence_count = 50;
  burst.vertices[0].first_ts = 100.0;
  burst.vertices[0].last_ts = 101.0;
  auto s3 = pg_stats(burst);
  CHECK(s3.duration_seconds == doctest::Approx(1.0));
  CHECK(s3.message_count == 50);
}

TEST_CASE("vendor normalization maps phrasings to shared labels") {
  LayerMap layers = LayerMap::from_text("version 1\nL3 ospf\nL2 link\n");
  auto dict = TemplateDictionary::from_signatures({
      {"OSPF process terminated unexpectedly", "L3"},
      {"OSPF daemon crashed with signal <NUM>", "L3"},
      {"totally custom message", "OTHER"},
  });
  CHECK(normalized_label(dict.at(0), layers) == "L3/ospf");
  CHECK(normalized_label(dict.at(1), layers) == "L3/ospf");
  // No keyword: the raw signature is kept.
  CHECK(normalized_label(dict.at(2), layers) == "totally custom message");

  auto a = make_pg({{0, "d"}}, {});
  auto b = make_pg({{1, "d"}}, {});
  CHECK(normalized_form(a, dict, layers) == normalized_form(b, dict, layers));
}
