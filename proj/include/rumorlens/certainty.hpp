#pragma once

// Certainty scores from crowd labels and the weighted binomial-logit GLM that
// predicts them from cue ratios.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/features.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/stats.hpp"

namespace rumorlens {

/// Mean label value (uncertain 0, somewhat-certain 1, certain 2) over the
/// usable labels, divided by 2. Missing when no usable label exists.
inline std::optional<double> aggregate_certainty(std::span<const std::string> labels) {
  int sum = 0;
  int usable = 0;
  for (const auto& label : labels) {
    if (label == "uncertain") {
      ++usable;
    } else if (label == "somewhat-certain") {
      sum += 1;
      ++usable;
    } else if (label == "certain") {
      sum += 2;
      ++usable;
    } else if (label != "underspecified") {
      throw InvalidArgument("unknown certainty label '" + label + "'");
    }
  }
  if (usable == 0) return std::nullopt;
  return static_cast<double>(sum) / static_cast<double>(2 * usable);
}

/// Predictor row: kcr, rcr, bcr, dcr.
using Predictors = std::array<double, 4>;

inline Predictors predictors(const CueRatios& r) { return {r.kcr, r.rcr, r.bcr, r.dcr}; }

inline constexpr double kVarianceFloor = 1e-6;

/// Inverse-variance observation weights. For each predictor the samples are
/// grouped by value (rounded to 12 decimals); each group's response variance
/// is floored at kVarianceFloor, divided by the sum over that predictor's
/// groups and inverted. A sample's weight is the mean of its four group
/// weights, and the result is rescaled to mean 1.
inline std::vector<double> observation_weights(std::span<const Predictors> X,
                                               std::span<const double> y) {
  if (X.size() != y.size()) throw InvalidArgument("observation_weights: X and y differ in length");
  if (X.size() < 2) throw InvalidArgument("observation_weights: need at least 2 samples");
  const std::size_t n = X.size();
  std::vector<double> weights(n, 0.0);
  for (std::size_t j = 0; j < 4; ++j) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[std::round(X[i][j] * 1e12) / 1e12].push_back(i);

    std::vector<double> variance;
    variance.reserve(groups.size());
    for (const auto& [value, members] : groups) {
      double mean = 0.0;
      for (auto i : members) mean += y[i];
      mean /= static_cast<double>(members.size());
      double var = 0.0;
      for (auto i : members) var += (y[i] - mean) * (y[i] - mean);
      var /= static_cast<double>(members.size());
      variance.push_back(std::max(var, kVarianceFloor));
    }
    const double total = std::accumulate(variance.begin(), variance.end(), 0.0);
    std::size_t g = 0;
    for (const auto& [value, members] : groups) {
      const double group_weight = total / variance[g++];
      for (auto i : members) weights[i] += group_weight / 4.0;
    }
  }
  const double mean = std::accumulate(weights.begin(), weights.end(), 0.0) / static_cast<double>(n);
  for (double& w : weights) w /= mean;
  return weights;
}

struct GlmModel {
  double intercept = 0.0;
  std::array<double, 4> coef{};  // kcr, rcr, bcr, dcr
  bool converged = false;
  int iterations = 0;
  bool ridge = false;  // normal equations needed diagonal loading

  double linear_predictor(const Predictors& x) const {
    double eta = intercept;
    for (std::size_t j = 0; j < 4; ++j) eta += coef[j] * x[j];
    return eta;
  }
};

inline double logistic(double eta) {
  if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

/// Predicted certainty, kept strictly inside (0, 1).
inline double predict_certainty(const GlmModel& model, const Predictors& x) {
  return std::clamp(logistic(model.linear_predictor(x)), std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

inline double predict_certainty(const GlmModel& model, const CueRatios& ratios) {
  return predict_certainty(model, predictors(ratios));
}

/// Weighted binomial quasi-log-likelihood Σ w (y·η − log(1 + e^η)).
inline double quasi_log_likelihood(double intercept, const std::array<double, 4>& coef,
                                   std::span<const Predictors> X, std::span<const double> y,
                                   std::span<const double> w) {
  double ll = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    double eta = intercept;
    for (std::size_t j = 0; j < 4; ++j) eta += coef[j] * X[i][j];
    const double softplus = eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
    ll += w[i] * (y[i] * eta - softplus);
  }
  return ll;
}

struct GlmOptions {
  int max_iterations = 100;
  double tolerance = 1e-8;  // max absolute coefficient change
  double ridge = 1e-6;
};

namespace glm_detail {

constexpr std::size_t kParams = 5;
using Matrix = std::array<std::array<double, kParams>, kParams>;
using Vector = std::array<double, kParams>;

// Cholesky solve; nullopt when the matrix is not numerically positive definite.
inline std::optional<Vector> cholesky_solve(Matrix a, Vector b) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < kParams; ++i) max_diag = std::max(max_diag, std::abs(a[i][i]));
  const double tiny = 1e-10 * std::max(max_diag, 1e-300);
  for (std::size_t j = 0; j < kParams; ++j) {
    double d = a[j][j];
    for (std::size_t k = 0; k < j; ++k) d -= a[j][k] * a[j][k];
    if (!(d > tiny)) return std::nullopt;
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < kParams; ++i) {
      double s = a[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i][k] * a[j][k];
      a[i][j] = s / a[j][j];
    }
  }
  for (std::size_t i = 0; i < kParams; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i][k] * b[k];
    b[i] /= a[i][i];
  }
  for (std::size_t i = kParams; i-- > 0;) {
    for (std::size_t k = i + 1; k < kParams; ++k) b[i] -= a[k][i] * b[k];
    b[i] /= a[i][i];
  }
  return b;
}

}  // namespace glm_detail

/// Iteratively reweighted least squares for the logit-link binomial family
/// with prior weights and fractional responses.
inline GlmModel fit_glm(std::span<const Predictors> X, std::span<const double> y,
                        std::span<const double> w, const GlmOptions& options = {}) {
  using namespace glm_detail;
  const std::size_t n = X.size();
  if (y.size() != n || w.size() != n) throw InvalidArgument("fit_glm: X, y and w differ in length");
  if (n < 6) throw InvalidArgument("fit_glm: need at least 6 samples, got " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : X[i]) {
      if (!std::isfinite(v)) throw InvalidArgument("fit_glm: non-finite predictor");
    }
    if (!std::isfinite(y[i]) || y[i] < 0.0 || y[i] > 1.0) {
      throw InvalidArgument("fit_glm: responses must lie in [0, 1]");
    }
    if (!std::isfinite(w[i]) || w[i] <= 0.0) throw InvalidArgument("fit_glm: weights must be positive");
  }

  auto row = [&](std::size_t i) { return Vector{1.0, X[i][0], X[i][1], X[i][2], X[i][3]}; };
  constexpr double kMuEps = 1e-10;

  std::vector<double> eta(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = (w[i] * y[i] + 0.5) / (w[i] + 1.0);
    eta[i] = std::log(mu / (1.0 - mu));
  }

  GlmModel model;
  Vector beta{};
  bool have_beta = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    Matrix a{};
    Vector b{};
    for (std::size_t i = 0; i < n; ++i) {
      const double mu = std::clamp(logistic(eta[i]), kMuEps, 1.0 - kMuEps);
      const double var = mu * (1.0 - mu);
      const double z = eta[i] + (y[i] - mu) / var;
      const double wt = w[i] * var;
      const Vector x = row(i);
      for (std::size_t r = 0; r < kParams; ++r) {
        b[r] += wt * x[r] * z;
        for (std::size_t c = 0; c < kParams; ++c) a[r][c] += wt * x[r] * x[c];
      }
    }
    std::optional<Vector> next;
    if (!model.ridge) next = cholesky_solve(a, b);
    if (!next) {
      model.ridge = true;
      for (std::size_t r = 0; r < kParams; ++r) a[r][r] += options.ridge;
      next = cholesky_solve(a, b);
      if (!next) throw Error("fit_glm: working matrix is singular even after ridge loading");
    }
    double change = 0.0;
    for (std::size_t r = 0; r < kParams; ++r) change = std::max(change, std::abs((*next)[r] - beta[r]));
    beta = *next;
    model.iterations = iter;
    for (std::size_t i = 0; i < n; ++i) {
      const Vector x = row(i);
      eta[i] = 0.0;
      for (std::size_t r = 0; r < kParams; ++r) eta[i] += beta[r] * x[r];
    }
    if (have_beta && change < options.tolerance) {
      model.converged = true;
      break;
    }
    have_beta = true;
  }
  model.intercept = beta[0];
  for (std::size_t j = 0; j < 4; ++j) model.coef[j] = beta[j + 1];
  if (!std::isfinite(model.intercept) ||
      !std::all_of(model.coef.begin(), model.coef.end(), [](double c) { return std::isfinite(c); })) {
    model.converged = false;
  }
  return model;
}

/// Convenience: computes the observation weights and fits.
inline GlmModel fit_certainty_model(std::span<const Predictors> X, std::span<const double> y,
                                    const GlmOptions& options = {}) {
  const auto w = observation_weights(X, y);
  return fit_glm(X, y, w, options);
}

struct GlmCvReport {
  std::size_t folds = 0;
  double rmse_mean = 0.0;
  double rmse_max = 0.0;
  double baseline_rmse = 0.0;  // mean over folds
  std::vector<double> fold_rmse;
  std::vector<double> fold_baseline_rmse;
  std::optional<double> wilcoxon_p;  // model vs baseline fold errors, two-sided
};

/// k-fold CV of the GLM against a predictor of the training-fold mean.
/// Weights are recomputed on every training fold.
inline GlmCvReport evaluate_glm_cv(std::span<const Predictors> X, std::span<const double> y,
                                   std::size_t folds = 10, std::uint64_t seed = 0,
                                   const GlmOptions& options = {}) {
  const std::size_t n = X.size();
  if (y.size() != n) throw InvalidArgument("evaluate_glm_cv: X and y differ in length");
  if (folds < 2 || n < folds) {
    throw InvalidArgument("evaluate_glm_cv: need 2 <= folds <= n (n = " + std::to_string(n) + ")");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = k % folds;

  GlmCvReport report;
  report.folds = folds;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<Predictors> train_x;
    std::vector<double> train_y;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < n; ++i) {
      if (fold_of[i] == f) {
        test.push_back(i);
      } else {
        train_x.push_back(X[i]);
        train_y.push_back(y[i]);
      }
    }
    const GlmModel model = fit_certainty_model(train_x, train_y, options);
    const double mean =
        std::accumulate(train_y.begin(), train_y.end(), 0.0) / static_cast<double>(train_y.size());
    double se_model = 0.0, se_base = 0.0;
    for (auto i : test) {
      const double e = predict_certainty(model, X[i]) - y[i];
      se_model += e * e;
      se_base += (mean - y[i]) * (mean - y[i]);
    }
    const auto m = static_cast<double>(test.size());
    report.fold_rmse.push_back(std::sqrt(se_model / m));
    report.fold_baseline_rmse.push_back(std::sqrt(se_base / m));
  }
  report.rmse_mean = std::accumulate(report.fold_rmse.begin(), report.fold_rmse.end(), 0.0) /
                     static_cast<double>(folds);
  report.rmse_max = *std::max_element(report.fold_rmse.begin(), report.fold_rmse.end());
  report.baseline_rmse =
      std::accumulate(report.fold_baseline_rmse.begin(), report.fold_baseline_rmse.end(), 0.0) /
      static_cast<double>(folds);
  try {
    report.wilcoxon_p = wilcoxon_signed_rank(report.fold_rmse, report.fold_baseline_rmse).p_value;
  } catch (const InvalidArgument&) {
    // fewer than 5 informative folds
  }
  return report;
}

inline nlohmann::json to_json(const GlmModel& m) {
  return {{"intercept", m.intercept},
          {"coef", m.coef},
          {"converged", m.converged},
          {"iterations", m.iterations},
          {"ridge", m.ridge}};
}

inline GlmModel glm_from_json(const nlohmann::json& j) {
  try {
    GlmModel m;
    m.intercept = j.at("intercept").get<double>();
    const auto coef = j.at("coef").get<std::vector<double>>();
    if (coef.size() != 4) throw Error("model 'coef' must hold 4 values");
    std::copy(coef.begin(), coef.end(), m.coef.begin());
    m.converged = j.at("converged").get<bool>();
    m.iterations = j.at("iterations").get<int>();
    m.ridge = j.value("ridge", false);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed GLM model JSON: ") + e.what());
  }
}

}  // namespace rumorlens
