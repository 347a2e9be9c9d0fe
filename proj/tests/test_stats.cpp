#include <doctest.h>

#include <cmath>

#include "causelog/rng.hpp"
#include "causelog/stats.hpp"

using namespace causelog;

namespace {

// Independent O(n^2) rank oracle: rank = 1 + count(smaller) + count(equal)/2.
std::vector<double> oracle_ranks(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    double smaller = 0, equal = 0;
    for (size_t j = 0; j < v.size(); ++j) {
      if (v[j] < v[i]) smaller += 1;
      if (v[j] == v[i]) equal += 1;
    }
    out[i] = smaller + (equal - 1) / 2.0 + 1.0;
  }
  return out;
}

double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  auto ra = oracle_ranks(a);
  auto rb = oracle_ranks(b);
  double ma = 0, mb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= static_cast<double>(ra.size());
  mb /= static_cast<double>(rb.size());
  double cov = 0, va = 0, vb = 0;
  for (size_t i = 0; i < ra.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  return cov / std::sqrt(va * vb);
}

double log_binomial(double n, double k) {
  return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1);
}

} // namespace

TEST_CASE("spearman equals the brute-force oracle on random data with ties") {
  SplitMix64 rng(99);
  for (int round = 0; round < 50; ++round) {
    size_t n = 5 + rng.below(40);
    std::vector<double> a(n), b(n);
    for (size_t i = 0; i < n; ++i) {
      a[i] = static_cast<double>(rng.below(8)); // small range forces ties
      b[i] = static_cast<double>(rng.below(8));
    }
    auto rho = stats::spearman(a, b);
    if (!rho) continue; // constant draw
    CHECK(*rho == doctest::Approx(oracle_spearman(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("perfect monotone association gives rho 1") {
  std::vector<double> a = {1, 2, 3, 4, 5, 6};
  std::vector<double> b = {2, 4, 9, 16, 30, 31};
  CHECK(*stats::spearman(a, b) == doctest::Approx(1.0));
  std::vector<double> rev(b.rbegin(), b.rend());
  CHECK(*stats::spearman(a, rev) == doctest::Approx(-1.0));
}

TEST_CASE("zero-variance series have no defined rank correlation") {
  std::vector<double> flat = {3, 3, 3, 3};
  std::vector<double> rising = {1, 2, 3, 4};
  CHECK_FALSE(stats::spearman(flat, rising).has_value());
  CHECK_FALSE(stats::spearman(rising, flat).has_value());
}

TEST_CASE("normal survival function hits the textbook quantiles") {
  CHECK(stats::normal_sf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_sf(1.6449) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(stats::normal_sf(2.3263) == doctest::Approx(0.01).epsilon(1e-3));
}

TEST_CASE("100/100 treated vs 0/100 untreated is overwhelming evidence") {
  // Exact oracle: the one-sided Fisher p-value for this table is
  // 1 / C(200, 100), computed here independently via log-gamma.
  double exact = std::exp(-log_binomial(200, 100));
  double fisher = stats::fisher_exact_p_value(100, 100, 0, 100);
  CHECK(fisher == doctest::Approx(exact).epsilon(1e-9));
  CHECK(fisher < 1e-6);

  double z = stats::two_proportion_p_value(100, 100, 0, 100);
  CHECK(z < 1e-6);
}

TEST_CASE("equal rates are never significant") {
  CHECK(stats::two_proportion_p_value(30, 100, 30, 100) == doctest::Approx(0.5));
  CHECK(stats::two_proportion_p_value(0, 50, 0, 50) == doctest::Approx(1.0));
  CHECK(stats::two_proportion_p_value(50, 50, 50, 50) == doctest::Approx(1.0));
  CHECK(stats::fisher_exact_p_value(2, 20, 2, 20) > 0.5);
}

TEST_CASE("fisher matches the z approximation on large balanced tables") {
  double fisher = stats::fisher_exact_p_value(60, 100, 40, 100);
  double z = stats::two_proportion_p_value(60, 100, 40, 100);
  CHECK(fisher == doctest::Approx(z).epsilon(0.25));
  CHECK(fisher < 0.01);
}

TEST_CASE("benjamini-hochberg is a step-up procedure") {
  // k-th threshold is q*k/m; the largest k with p_(k) under threshold wins.
  auto r1 = stats::benjamini_hochberg({0.01, 0.02, 0.03, 0.2, 0.9}, 0.05);
  CHECK(r1 == std::vector<bool>{true, true, true, false, false});

  // A single p-value below q can still fail after correction.
  auto r2 = stats::benjamini_hochberg({0.04, 0.9}, 0.05);
  CHECK(r2 == std::vector<bool>{false, false});

  auto r3 = stats::benjamini_hochberg({}, 0.05);
  CHECK(r3.empty());

  // Order independence: rejection follows values, not positions.
  auto r4 = stats::benjamini_hochberg({0.9, 0.01, 0.2, 0.03, 0.02}, 0.05);
  CHECK(r4 == std::vector<bool>{false, true, false, true, true});
}
