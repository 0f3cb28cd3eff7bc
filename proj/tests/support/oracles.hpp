#pragma once

// Reference implementations used only by tests. Each one is written
// differently from the library code it checks.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

struct Fit {
  double slope = 0.0, intercept = 0.0;
  double at(double x) const { return intercept + slope * x; }
};

/// OLS by Cramer's rule on the raw normal equations, in long double.
inline std::optional<Fit> ols(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.empty()) return std::nullopt;
  long double n = static_cast<long double>(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += static_cast<long double>(xs[i]) * xs[i];
    sxy += static_cast<long double>(xs[i]) * ys[i];
  }
  const long double det = n * sxx - sx * sx;
  if (std::fabs(static_cast<double>(det)) < 1e-12) return Fit{0.0, static_cast<double>(sy / n)};
  return Fit{static_cast<double>((n * sxy - sx * sy) / det), static_cast<double>((sxx * sy - sx * sxy) / det)};
}

struct Disc {
  double delta = 0, reset = 0, rmsd_p = 0, rmsd_f = 0;
};

/// Discontinuities at 1-based rank i straight from the definitions.
inline Disc discontinuities(const std::vector<double>& y, std::size_t i) {
  const std::size_t n = y.size();
  auto fit = [&](std::size_t lo, std::size_t hi) -> std::optional<Fit> {
    if (lo > hi || lo < 1 || hi > n) return std::nullopt;
    std::vector<double> xs, ys;
    for (std::size_t r = lo; r <= hi; ++r) {
      xs.push_back(static_cast<double>(r));
      ys.push_back(y[r - 1]);
    }
    return ols(xs, ys);
  };
  auto rmsd = [](const Fit& a, const Fit& b, std::size_t lo, std::size_t hi) {
    double ss = 0;
    for (std::size_t r = lo; r <= hi; ++r) {
      const double d = a.at(static_cast<double>(r)) - b.at(static_cast<double>(r));
      ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(hi - lo + 1));
  };
  Disc d;
  d.delta = i > 1 ? y[i - 1] - y[i - 2] : 0.0;
  const auto all = *fit(1, n);
  const auto pre = i >= 2 ? fit(1, i - 1) : std::nullopt;
  const auto post = i + 1 <= n ? fit(i + 1, n) : std::nullopt;
  if (pre && post) d.reset = post->at(static_cast<double>(i + 1)) - pre->at(static_cast<double>(i - 1));
  if (pre) d.rmsd_p = rmsd(*pre, all, 1, i - 1);
  if (post) d.rmsd_f = rmsd(*post, all, i + 1, n);
  return d;
}

/// Average ranks by counting (O(n^2)).
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0, equal = 0;
    for (double u : v) {
      if (u < v[i]) ++less;
      if (u == v[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

/// Exact Wilcoxon signed-rank p by visiting all 2^n sign patterns.
inline double wilcoxon_enumerated(const std::vector<double>& x, const std::vector<double>& y, bool two_sided) {
  std::vector<double> d;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) d.push_back(x[i] - y[i]);
  }
  if (d.empty()) return 1.0;
  std::vector<double> mag;
  for (double v : d) mag.push_back(std::fabs(v));
  const auto r = ranks(mag);
  double observed = 0, total = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    total += r[i];
    if (d[i] > 0) observed += r[i];
  }
  const double centre = total / 2.0;
  const std::uint64_t patterns = std::uint64_t{1} << d.size();
  std::uint64_t hits = 0;
  for (std::uint64_t mask = 0; mask < patterns; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (mask >> i & 1U) w += r[i];
    }
    const bool extreme = two_sided ? std::fabs(w - centre) >= std::fabs(observed - centre) - 1e-9
                                   : w >= observed - 1e-9;
    if (extreme) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

/// Weighted binomial quasi-log-likelihood.
inline double quasi_ll(const std::array<double, 5>& beta, const std::vector<std::array<double, 4>>& X,
                       const std::vector<double>& y, const std::vector<double>& w) {
  double ll = 0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double eta = beta[0];
    for (std::size_t j = 0; j < 4; ++j) eta += beta[j + 1] * X[i][j];
    const double mu = 1.0 / (1.0 + std::exp(-eta));
    ll += w[i] * (y[i] * std::log(mu) + (1.0 - y[i]) * std::log1p(-mu));
  }
  return ll;
}

struct GridResult {
  std::array<double, 5> beta{};
  double ll = -std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

/// Maximises quasi_ll over the lattice {-5, -4.95, ..., 5}^5. A step-0.5
/// sublattice locates the basin, then a step-0.05 window of +-0.5 around the
/// best point is searched exhaustively and re-centred until its optimum is
/// interior. The log-likelihood is concave, so an interior window optimum is
/// the lattice optimum's neighbourhood.
inline GridResult glm_grid_search(const std::vector<std::array<double, 4>>& X, const std::vector<double>& y,
                                  const std::vector<double>& w) {
  constexpr int kFine = 200;       // lattice index 0..200 maps to -5 + 0.05 k
  constexpr int kCoarseStride = 10;
  constexpr int kHalfWindow = 10;  // +-0.5
  auto value = [](int k) { return -5.0 + 0.05 * k; };
  GridResult best;
  std::array<int, 5> best_idx{};

  auto scan = [&](std::array<int, 5> lo, std::array<int, 5> hi, int stride) {
    std::array<int, 5> k{};
    bool improved = false;
    for (k[0] = lo[0]; k[0] <= hi[0]; k[0] += stride)
      for (k[1] = lo[1]; k[1] <= hi[1]; k[1] += stride)
        for (k[2] = lo[2]; k[2] <= hi[2]; k[2] += stride)
          for (k[3] = lo[3]; k[3] <= hi[3]; k[3] += stride)
            for (k[4] = lo[4]; k[4] <= hi[4]; k[4] += stride) {
              const std::array<double, 5> beta{value(k[0]), value(k[1]), value(k[2]), value(k[3]), value(k[4])};
              const double ll = quasi_ll(beta, X, y, w);
              ++best.evaluations;
              if (ll > best.ll) {
                best.ll = ll;
                best.beta = beta;
                best_idx = k;
                improved = true;
              }
            }
    return improved;
  };

  scan({0, 0, 0, 0, 0}, {kFine, kFine, kFine, kFine, kFine}, kCoarseStride);
  for (int round = 0; round < 20; ++round) {
    std::array<int, 5> lo{}, hi{};
    for (int j = 0; j < 5; ++j) {
      lo[j] = std::max(0, best_idx[j] - kHalfWindow);
      hi[j] = std::min(kFine, best_idx[j] + kHalfWindow);
    }
    const auto centre = best_idx;
    scan(lo, hi, 1);
    bool on_edge = false;
    for (int j = 0; j < 5; ++j) {
      const bool at_lo = best_idx[j] == lo[j] && lo[j] > 0;
      const bool at_hi = best_idx[j] == hi[j] && hi[j] < kFine;
      on_edge = on_edge || at_lo || at_hi;
    }
    if (!on_edge || best_idx == centre) break;
  }
  return best;
}

}  // namespace oracle
