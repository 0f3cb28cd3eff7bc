#pragma once

// Rank statistics, multiple-testing correction and group comparisons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "rumorlens/error.hpp"
#include "rumorlens/rng.hpp"

namespace rumorlens {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// 1-based ranks, ties receive the average of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

/// Σ (t³ - t) over tie groups.
inline double tie_term(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i + 1);
    sum += t * t * t - t;
    i = j + 1;
  }
  return sum;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

namespace stats_detail {

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

inline double normal_two_sided(double z) { return std::min(1.0, std::erfc(std::abs(z) / std::sqrt(2.0))); }
inline double normal_upper(double z) { return std::min(1.0, 0.5 * std::erfc(z / std::sqrt(2.0))); }

}  // namespace stats_detail

inline constexpr std::size_t kDefaultPermutations = 10000;

/// Spearman's rho with a two-sided permutation p-value. A constant input
/// yields rho = 0, p = 1.
inline TestResult spearman_rho(std::span<const double> a, std::span<const double> b,
                               std::size_t permutations = kDefaultPermutations,
                               std::uint64_t seed = 0) {
  if (a.size() != b.size()) throw InvalidArgument("spearman_rho: length mismatch");
  if (a.size() < 3) throw InvalidArgument("spearman_rho: need at least 3 pairs");
  const auto ra = average_ranks(a);
  auto rb = average_ranks(b);
  const double rho = stats_detail::pearson(ra, rb);
  TestResult out{rho, 1.0, a.size()};
  if (std::all_of(ra.begin(), ra.end(), [&](double r) { return r == ra[0]; }) ||
      std::all_of(rb.begin(), rb.end(), [&](double r) { return r == rb[0]; })) {
    return out;
  }
  Rng rng(seed);
  std::size_t extreme = 0;
  const double observed = std::abs(rho) - 1e-12;
  for (std::size_t p = 0; p < permutations; ++p) {
    rng.shuffle(rb);
    if (std::abs(stats_detail::pearson(ra, rb)) >= observed) ++extreme;
  }
  out.p_value = static_cast<double>(extreme + 1) / static_cast<double>(permutations + 1);
  return out;
}

inline constexpr std::size_t kWilcoxonExactLimit = 12;

/// Paired signed-rank test on x - y; zero differences are dropped. The
/// statistic is W+, the rank sum of positive differences. One-sided means
/// the alternative x > y.
inline TestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                       bool two_sided = true) {
  if (x.size() != y.size()) throw InvalidArgument("wilcoxon_signed_rank: length mismatch");
  std::vector<double> diff;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) diff.push_back(x[i] - y[i]);
  }
  const std::size_t n = diff.size();
  if (n == 0) return {0.0, 1.0, 0};
  if (n < 5) {
    throw InvalidArgument("wilcoxon_signed_rank: need at least 5 non-zero differences, got " +
                          std::to_string(n));
  }
  std::vector<double> magnitude(n);
  std::transform(diff.begin(), diff.end(), magnitude.begin(), [](double d) { return std::abs(d); });
  const auto ranks = average_ranks(magnitude);
  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diff[i] > 0) w_plus += ranks[i];
  }
  TestResult out{w_plus, 1.0, n};

  if (n <= kWilcoxonExactLimit) {
    // Exact null distribution of 2·W+ (average ranks are multiples of 1/2),
    // counted over all 2^n sign assignments.
    std::vector<std::int64_t> doubled(n);
    for (std::size_t i = 0; i < n; ++i) doubled[i] = std::llround(2.0 * ranks[i]);
    const std::int64_t total = std::accumulate(doubled.begin(), doubled.end(), std::int64_t{0});
    std::vector<double> ways(static_cast<std::size_t>(total) + 1, 0.0);
    ways[0] = 1.0;
    for (std::int64_t r : doubled) {
      for (std::int64_t s = total; s >= r; --s) ways[static_cast<std::size_t>(s)] += ways[static_cast<std::size_t>(s - r)];
    }
    const std::int64_t observed = std::llround(2.0 * w_plus);
    const double all = std::ldexp(1.0, static_cast<int>(n));
    double hits = 0.0;
    for (std::int64_t s = 0; s <= total; ++s) {
      const bool extreme = two_sided ? std::llabs(2 * s - total) >= std::llabs(2 * observed - total)
                                     : s >= observed;
      if (extreme) hits += ways[static_cast<std::size_t>(s)];
    }
    out.p_value = std::min(1.0, hits / all);
    return out;
  }

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(magnitude) / 48.0;
  if (var <= 0.0) return out;
  const double z = (w_plus - mean) / std::sqrt(var);
  out.p_value = two_sided ? stats_detail::normal_two_sided(z) : stats_detail::normal_upper(z);
  return out;
}

/// Two-sided Wilcoxon rank-sum (Mann-Whitney) test, normal approximation
/// with tie correction. The statistic is U of the first sample.
inline TestResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidArgument("rank_sum_test: both groups must be non-empty");
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto ranks = average_ranks(pooled);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ra = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(a.size()), 0.0);
  const double u = ra - na * (na + 1.0) / 2.0;
  TestResult out{u, 1.0, a.size() + b.size()};
  const double nn = na + nb;
  const double var = na * nb / 12.0 * ((nn + 1.0) - tie_term(pooled) / (nn * (nn - 1.0)));
  if (!(var > 0.0)) return out;
  out.p_value = stats_detail::normal_two_sided((u - na * nb / 2.0) / std::sqrt(var));
  return out;
}

enum class FdrMethod { BenjaminiHochberg, BenjaminiYekutieli };

/// Step-up FDR adjusted p-values, aligned with the input. Yekutieli's variant
/// inflates by the harmonic sum for arbitrary dependence.
inline std::vector<double> fdr_adjust(std::span<const double> p,
                                      FdrMethod method = FdrMethod::BenjaminiHochberg) {
  const std::size_t m = p.size();
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument("fdr_adjust: p-values must lie in [0, 1]");
  }
  std::vector<double> out(m);
  if (m == 0) return out;
  double scale = static_cast<double>(m);
  if (method == FdrMethod::BenjaminiYekutieli) {
    double harmonic = 0.0;
    for (std::size_t i = 1; i <= m; ++i) harmonic += 1.0 / static_cast<double>(i);
    scale *= harmonic;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    // factor >= 1 exactly, so rounding never pushes the result below p
    const double adjusted = p[order[k]] * (scale / static_cast<double>(k + 1));
    running = std::min(running, adjusted);
    out[order[k]] = std::min(1.0, running);
  }
  return out;
}

struct GroupDiffRow {
  std::string variable;
  double median_a = 0.0;
  double median_b = 0.0;
  double statistic = 0.0;
  double p_raw = 1.0;
  double p_fdr = 1.0;
};

/// Per-column rank-sum comparison of rows in group a versus group b, FDR
/// corrected across columns and sorted by adjusted p (then raw p).
inline std::vector<GroupDiffRow> group_diff_report(const std::vector<std::string>& names,
                                                   const std::vector<std::vector<double>>& rows,
                                                   const std::vector<bool>& in_a,
                                                   const std::vector<bool>& in_b,
                                                   FdrMethod method = FdrMethod::BenjaminiHochberg) {
  if (in_a.size() != rows.size() || in_b.size() != rows.size()) {
    throw InvalidArgument("group_diff_report: masks do not align with rows");
  }
  const auto count_a = std::count(in_a.begin(), in_a.end(), true);
  const auto count_b = std::count(in_b.begin(), in_b.end(), true);
  if (count_a == 0 || count_b == 0) throw InvalidArgument("group_diff_report: empty group");

  std::vector<GroupDiffRow> table;
  std::vector<double> raw;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::vector<double> a, b;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != names.size()) throw InvalidArgument("group_diff_report: ragged rows");
      if (in_a[r]) a.push_back(rows[r][c]);
      if (in_b[r]) b.push_back(rows[r][c]);
    }
    const auto test = rank_sum_test(a, b);
    table.push_back({names[c], median(a), median(b), test.statistic, test.p_value, 1.0});
    raw.push_back(test.p_value);
  }
  const auto adjusted = fdr_adjust(raw, method);
  for (std::size_t c = 0; c < table.size(); ++c) table[c].p_fdr = adjusted[c];
  std::stable_sort(table.begin(), table.end(), [](const GroupDiffRow& x, const GroupDiffRow& y) {
    if (x.p_fdr != y.p_fdr) return x.p_fdr < y.p_fdr;
    return x.p_raw < y.p_raw;
  });
  return table;
}

}  // namespace rumorlens
