#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace causelog {
namespace stats {

// Average ranks with ties sharing the mean rank.
std::vector<double> ranks(const std::vector<double>& values);

// Spearman rank correlation. nullopt when either side has zero variance.
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Upper tail of the standard normal distribution, P(Z > z).
double normal_sf(double z);

// One-sided two-proportion z-test of H1: p1 > p2 with pooled variance.
// Returns the p-value; degenerate pooled rates give 1.0.
double two_proportion_p_value(size_t successes1, size_t trials1, size_t successes2,
                              size_t trials2);

// One-sided Fisher exact test of H1: group 1 is enriched, i.e.
// P(X >= successes1) for X ~ Hypergeom(trials1 + trials2, s1 + s2, trials1).
double fisher_exact_p_value(size_t successes1, size_t trials1, size_t successes2,
                            size_t trials2);

// Benjamini-Hochberg step-up at level q. Returns, per input p-value, whether
// the corresponding hypothesis is rejected. Ties are handled stably.
std::vector<bool> benjamini_hochberg(const std::vector<double>& p_values, double q);

} // namespace stats
} // namespace causelog
