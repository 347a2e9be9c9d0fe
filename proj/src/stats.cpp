#include "causelog/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace causelog {
namespace stats {

std::vector<double> ranks(const std::vector<double>& values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> out(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (size_t k = i; k <= j; ++k) out[order[k]] = mean_rank;
    i = j + 1;
  }
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const size_t n = a.size();
  double ma = 0, mb = 0;
  for (size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double cov = 0, va = 0, vb = 0;
  for (size_t i = 0; i < n; ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    cov += da * db;
    va += da * da;
    vb += db * db;
  }
  if (va <= 0 || vb <= 0) return 0.0;
  return cov / std::sqrt(va * vb);
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return std::nullopt;
  auto zero_variance = [](const std::vector<double>& v) {
    for (size_t i = 1; i < v.size(); ++i) {
      if (v[i] != v[0]) return false;
    }
    return true;
  };
  if (zero_variance(a) || zero_variance(b)) return std::nullopt;
  return pearson(ranks(a), ranks(b));
}

double normal_sf(double z) {
  return 0.5 * std::erfc(z / std::sqrt(2.0));
}

double two_proportion_p_value(size_t successes1, size_t trials1, size_t successes2,
                              size_t trials2) {
  if (trials1 == 0 || trials2 == 0) return 1.0;
  double n1 = static_cast<double>(trials1), n2 = static_cast<double>(trials2);
  double p1 = static_cast<double>(successes1) / n1;
  double p2 = static_cast<double>(successes2) / n2;
  double pooled = (static_cast<double>(successes1) + static_cast<double>(successes2)) / (n1 + n2);
  double var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2);
  if (var <= 0.0) return 1.0; // all successes or all failures in both arms
  double z = (p1 - p2) / std::sqrt(var);
  return normal_sf(z);
}

namespace {

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

} // namespace

double fisher_exact_p_value(size_t successes1, size_t trials1, size_t successes2,
                            size_t trials2) {
  const double n1 = static_cast<double>(trials1);
  const double n2 = static_cast<double>(trials2);
  const double s = static_cast<double>(successes1 + successes2);

  size_t k_max = std::min(trials1, successes1 + successes2);
  // Tail sum in log space anchored at the largest term.
  std::vector<double> log_terms;
  for (size_t k = successes1; k <= k_max; ++k) {
    double kd = static_cast<double>(k);
    if (s - kd > n2) continue; // infeasible cell
    log_terms.push_back(log_choose(n1, kd) + log_choose(n2, s - kd) - log_choose(n1 + n2, s));
  }
  if (log_terms.empty()) return 1.0;
  double peak = *std::max_element(log_terms.begin(), log_terms.end());
  double sum = 0.0;
  for (double lt : log_terms) sum += std::exp(lt - peak);
  double p = std::exp(peak) * sum;
  return std::min(1.0, p);
}

std::vector<bool> benjamini_hochberg(const std::vector<double>& p_values, double q) {
  const size_t m = p_values.size();
  std::vector<bool> rejected(m, false);
  if (m == 0) return rejected;

  std::vector<size_t> order(m);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return p_values[a] < p_values[b]; });

  size_t cutoff = 0; // number of rejected hypotheses
  for (size_t k = m; k >= 1; --k) {
    double threshold = q * static_cast<double>(k) / static_cast<double>(m);
    if (p_values[order[k - 1]] <= threshold) {
      cutoff = k;
      break;
    }
  }
  for (size_t k = 0; k < cutoff; ++k) rejected[order[k]] = true;
  return rejected;
}

} // namespace stats
} // namespace causelog
