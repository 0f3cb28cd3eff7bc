#include <gtest/gtest.h>

#include <cmath>
#include <string>
#include <vector>

#include "rumorlens/certainty.hpp"
#include "rumorlens/pipeline.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/synth.hpp"

using namespace rumorlens;
using Labels = std::vector<std::string>;

TEST(AggregateCertainty, FourCertainOneSomewhat) {
  const Labels l = {"certain", "certain", "somewhat-certain", "certain", "certain"};
  EXPECT_EQ(aggregate_certainty(l), 0.9);
}

TEST(AggregateCertainty, UnderspecifiedIsIgnored) {
  EXPECT_EQ(aggregate_certainty(Labels{"underspecified", "underspecified"}), std::nullopt);
  EXPECT_EQ(aggregate_certainty(Labels{}), std::nullopt);
  EXPECT_EQ(aggregate_certainty(Labels{"uncertain", "certain", "underspecified"}), 0.5);
  EXPECT_EQ(aggregate_certainty(Labels{"uncertain"}), 0.0);
}

TEST(AggregateCertainty, UnknownLabelThrows) {
  EXPECT_THROW(aggregate_certainty(Labels{"certain", "very"}), InvalidArgument);
}

TEST(ObservationWeights, ConstantResponseGivesUnitWeights) {
  std::vector<Predictors> X = {{0, 0, 0, 1}, {0.5, 0.5, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}};
  std::vector<double> y(X.size(), 0.4);
  for (double w : observation_weights(X, y)) EXPECT_DOUBLE_EQ(w, 1.0);
}

TEST(ObservationWeights, InverseShareOfGroupVariance) {
  // Predictor 0 splits the samples into a group with variance 0.09 and one
  // with 0.01; the other predictors are constant (one group, raw weight 1).
  std::vector<Predictors> X = {{0, 0, 0, 0}, {0, 0, 0, 0}, {1, 0, 0, 0}, {1, 0, 0, 0}};
  std::vector<double> y = {0.2, 0.8, 0.4, 0.6};
  const auto w = observation_weights(X, y);
  const double noisy = (0.10 / 0.09 + 3.0) / 4.0;
  const double quiet = (0.10 / 0.01 + 3.0) / 4.0;
  const double mean = (noisy + quiet) / 2.0;
  EXPECT_NEAR(w[0], noisy / mean, 1e-9);
  EXPECT_NEAR(w[1], noisy / mean, 1e-9);
  EXPECT_NEAR(w[2], quiet / mean, 1e-9);
  EXPECT_NEAR(w[3], quiet / mean, 1e-9);
  EXPECT_NEAR((w[0] + w[2]) / 2.0, 1.0, 1e-12);
}

TEST(ObservationWeights, Errors) {
  std::vector<Predictors> X = {{0, 0, 0, 0}};
  std::vector<double> y = {0.5};
  EXPECT_THROW(observation_weights(X, y), InvalidArgument);
  std::vector<double> y2 = {0.5, 0.5};
  EXPECT_THROW(observation_weights(X, y2), InvalidArgument);
}

TEST(Logistic, Basics) {
  EXPECT_DOUBLE_EQ(logistic(0.0), 0.5);
  EXPECT_NEAR(logistic(std::log(3.0)), 0.75, 1e-15);
  EXPECT_GT(logistic(-800.0), -1.0);
  EXPECT_LT(logistic(800.0), 1.0 + 1e-15);
}

namespace {

struct Data {
  std::vector<Predictors> X;
  std::vector<double> y;
  std::vector<double> w;
};

Data glm_sample(std::uint64_t seed, std::size_t n, const std::array<double, 5>& beta) {
  Rng rng(seed);
  Data d;
  for (std::size_t i = 0; i < n; ++i) {
    Predictors x{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    double eta = beta[0];
    for (std::size_t j = 0; j < 4; ++j) eta += beta[j + 1] * x[j];
    const double mu = logistic(eta);
    double k = 0;
    for (int t = 0; t < 4; ++t) k += rng.bernoulli(mu) ? 1 : 0;
    d.X.push_back(x);
    d.y.push_back(k / 4.0);
    d.w.push_back(0.5 + rng.uniform());
  }
  return d;
}

}  // namespace

TEST(FitGlm, ConstantResponseIsInterceptOnly) {
  auto d = glm_sample(1, 40, {0, 0, 0, 0, 0});
  std::fill(d.y.begin(), d.y.end(), 0.7);
  const auto m = fit_glm(d.X, d.y, d.w);
  EXPECT_TRUE(m.converged);
  EXPECT_NEAR(m.intercept, std::log(0.7 / 0.3), 1e-6);
  for (double c : m.coef) EXPECT_NEAR(c, 0.0, 1e-6);
}

TEST(FitGlm, ScoreVanishesAtTheFit) {
  const auto d = glm_sample(2, 60, {-0.5, 1.5, 0.5, -0.5, -2.0});
  const auto m = fit_glm(d.X, d.y, d.w);
  ASSERT_TRUE(m.converged);
  const double h = 1e-6;
  for (std::size_t j = 0; j < 5; ++j) {
    double b0 = m.intercept;
    auto c = m.coef;
    auto ll = [&](double shift) {
      double i0 = b0;
      auto cc = c;
      if (j == 0) {
        i0 += shift;
      } else {
        cc[j - 1] += shift;
      }
      return quasi_log_likelihood(i0, cc, d.X, d.y, d.w);
    };
    const double grad = (ll(h) - ll(-h)) / (2 * h);
    EXPECT_NEAR(grad, 0.0, 1e-4) << "parameter " << j;
  }
}

TEST(FitGlm, FitBeatsPerturbations) {
  const auto d = glm_sample(3, 50, {0.3, -1.0, 2.0, 0.0, -1.0});
  const auto m = fit_glm(d.X, d.y, d.w);
  const double best = quasi_log_likelihood(m.intercept, m.coef, d.X, d.y, d.w);
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    auto c = m.coef;
    for (double& v : c) v += 0.1 * rng.normal();
    EXPECT_LE(quasi_log_likelihood(m.intercept + 0.1 * rng.normal(), c, d.X, d.y, d.w), best + 1e-9);
  }
}

TEST(FitGlm, CollinearPredictorsStillFit) {
  // Cue ratios sum to one whenever a tweet has a cue, so the design matrix is
  // singular on real data.
  Rng rng(5);
  std::vector<Predictors> X;
  std::vector<double> y, w;
  for (int i = 0; i < 30; ++i) {
    const double a = rng.uniform();
    X.push_back({a, 1 - a, 0, 0});
    y.push_back(std::clamp(a + 0.1 * rng.normal(), 0.0, 1.0));
    w.push_back(1.0);
  }
  const auto m = fit_glm(X, y, w);
  for (double c : m.coef) EXPECT_TRUE(std::isfinite(c));
  EXPECT_GT(predict_certainty(m, Predictors{1, 0, 0, 0}), predict_certainty(m, Predictors{0, 1, 0, 0}));
}

TEST(FitGlm, Errors) {
  const auto d = glm_sample(6, 10, {0, 0, 0, 0, 0});
  const std::vector<Predictors> few(d.X.begin(), d.X.begin() + 5);
  const std::vector<double> few_y(d.y.begin(), d.y.begin() + 5), few_w(5, 1.0);
  EXPECT_THROW(fit_glm(few, few_y, few_w), InvalidArgument);
  auto bad = d.y;
  bad[0] = 1.5;
  EXPECT_THROW(fit_glm(d.X, bad, d.w), InvalidArgument);
  auto zero_w = d.w;
  zero_w[1] = 0.0;
  EXPECT_THROW(fit_glm(d.X, d.y, zero_w), InvalidArgument);
  EXPECT_THROW(fit_glm(d.X, d.y, std::vector<double>(3, 1.0)), InvalidArgument);
}

TEST(PredictCertainty, StaysInsideTheUnitInterval) {
  GlmModel m;
  m.intercept = 50;
  m.coef = {100, 0, 0, 0};
  const double hi = predict_certainty(m, Predictors{1, 0, 0, 0});
  EXPECT_GT(hi, 0.0);
  EXPECT_LT(hi, 1.0);
  m.intercept = -800;
  const double lo = predict_certainty(m, Predictors{0, 0, 0, 0});
  EXPECT_GT(lo, 0.0);
  EXPECT_LT(lo, 1.0);
}

TEST(PredictCertainty, MonotoneInEachPredictorBySign) {
  GlmModel m;
  m.intercept = 0.1;
  m.coef = {1.2, 0.4, -0.3, -2.0};
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    Predictors x{rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()};
    for (std::size_t j = 0; j < 4; ++j) {
      auto up = x;
      up[j] += 0.1;
      const double before = predict_certainty(m, x), after = predict_certainty(m, up);
      if (m.coef[j] > 0) {
        EXPECT_GT(after, before);
      } else {
        EXPECT_LT(after, before);
      }
    }
  }
}

TEST(CertaintyModel, PlantedDirectionOnSyntheticCorpus) {
  SynthConfig cfg;
  cfg.seed = 21;
  const auto corpus = generate(cfg);
  const auto data = certainty_training_data(corpus, default_seed_lexicon());
  ASSERT_GT(data.y.size(), 50u);
  const auto m = fit_certainty_model(data.X, data.y);
  EXPECT_GT(predict_certainty(m, Predictors{1, 0, 0, 0}), predict_certainty(m, Predictors{0, 0, 0, 1}));
}

TEST(CertaintyCv, ConstantResponseHasZeroBaselineError) {
  auto d = glm_sample(8, 30, {0, 0, 0, 0, 0});
  std::fill(d.y.begin(), d.y.end(), 0.25);
  const auto r = evaluate_glm_cv(d.X, d.y, 5, 1);
  EXPECT_EQ(r.folds, 5u);
  EXPECT_NEAR(r.baseline_rmse, 0.0, 1e-12);
  EXPECT_NEAR(r.rmse_mean, 0.0, 1e-6);
}

TEST(CertaintyCv, SummaryIsConsistent) {
  const auto d = glm_sample(9, 80, {-1, 2, 1, 0, -2});
  const auto r = evaluate_glm_cv(d.X, d.y, 10, 3);
  ASSERT_EQ(r.fold_rmse.size(), 10u);
  EXPECT_LE(r.rmse_mean, r.rmse_max);
  EXPECT_EQ(r.rmse_max, *std::max_element(r.fold_rmse.begin(), r.fold_rmse.end()));
  EXPECT_TRUE(r.wilcoxon_p.has_value());
  const auto again = evaluate_glm_cv(d.X, d.y, 10, 3);
  EXPECT_EQ(again.fold_rmse, r.fold_rmse);
}

TEST(CertaintyCv, ModelBeatsMeanOnSyntheticCorpus) {
  SynthConfig cfg;
  cfg.seed = 22;
  const auto data = certainty_training_data(generate(cfg), default_seed_lexicon());
  const auto r = evaluate_glm_cv(data.X, data.y, 10, 22);
  EXPECT_LT(r.rmse_mean, r.baseline_rmse);
}

TEST(CertaintyCv, Errors) {
  const auto d = glm_sample(10, 8, {0, 0, 0, 0, 0});
  EXPECT_THROW(evaluate_glm_cv(d.X, d.y, 1), InvalidArgument);
  EXPECT_THROW(evaluate_glm_cv(d.X, d.y, 9), InvalidArgument);
}

TEST(GlmJson, RoundTrip) {
  GlmModel m;
  m.intercept = -0.123456789012345;
  m.coef = {1.0 / 3.0, -2.5, 0.0, 7e-12};
  m.converged = true;
  m.iterations = 7;
  const auto back = glm_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(back.intercept, m.intercept);
  EXPECT_EQ(back.coef, m.coef);
  EXPECT_EQ(back.iterations, 7);
  EXPECT_TRUE(back.converged);
  EXPECT_THROW(glm_from_json(nlohmann::json{{"intercept", 1}}), Error);
}
