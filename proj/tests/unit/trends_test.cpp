#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "rumorlens/pipeline.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/synth.hpp"
#include "rumorlens/trends.hpp"
#include "support/oracles.hpp"

using namespace rumorlens;
using Series = std::vector<double>;

namespace {

Series random_series(Rng& rng, std::size_t n) {
  Series s(n);
  for (double& v : s) v = rng.uniform() * 2.0 - 0.5;
  return s;
}

void expect_close(const DiscontinuitySet& a, const oracle::Disc& b, double tol, const std::string& where) {
  EXPECT_NEAR(a.delta, b.delta, tol) << where;
  EXPECT_NEAR(a.reset, b.reset, tol) << where;
  EXPECT_NEAR(a.rmsd_p, b.rmsd_p, tol) << where;
  EXPECT_NEAR(a.rmsd_f, b.rmsd_f, tol) << where;
}

}  // namespace

TEST(FitLine, ThreePointExample) {
  const Series xs = {1, 2, 3}, ys = {0, 1, 0};
  const auto l = fit_line(xs, ys);
  ASSERT_TRUE(l);
  EXPECT_NEAR(l->slope, 0.0, 1e-15);
  EXPECT_NEAR(l->intercept, 1.0 / 3.0, 1e-15);
}

TEST(FitLine, ExactLineAndDegenerateInputs) {
  const Series xs = {1, 2, 3, 4}, ys = {3, 5, 7, 9};
  const auto l = fit_line(xs, ys);
  EXPECT_NEAR(l->slope, 2.0, 1e-12);
  EXPECT_NEAR(l->intercept, 1.0, 1e-12);
  EXPECT_FALSE(fit_line(Series{}, Series{}));
  const auto single = fit_line(Series{4}, Series{7});
  EXPECT_EQ(single->slope, 0.0);
  EXPECT_EQ(single->intercept, 7.0);
  EXPECT_THROW(fit_line(Series{1, 2}, Series{1}), InvalidArgument);
}

TEST(Delta, FirstRankIsZero) {
  const Series s = {0.2, 0.5, 0.1};
  EXPECT_EQ(delta(s, 1), 0.0);
  EXPECT_DOUBLE_EQ(delta(s, 2), 0.3);
  EXPECT_DOUBLE_EQ(delta(s, 3), -0.4);
  EXPECT_THROW(delta(s, 0), InvalidArgument);
  EXPECT_THROW(delta(s, 4), InvalidArgument);
}

TEST(Discontinuities, ConstantSeriesIsFlat) {
  const Series s(9, 0.37);
  for (std::size_t i = 1; i <= s.size(); ++i) {
    const auto d = discontinuities(s, i);
    EXPECT_NEAR(d.delta, 0.0, 1e-12);
    EXPECT_NEAR(d.reset, 0.0, 1e-12);
    EXPECT_NEAR(d.rmsd_p, 0.0, 1e-12);
    EXPECT_NEAR(d.rmsd_f, 0.0, 1e-12);
  }
}

TEST(Discontinuities, CollinearSeries) {
  const Series s = {2, 4, 6, 8, 10, 12};
  const auto d = discontinuities(s, 3);
  EXPECT_NEAR(d.reset, 4.0, 1e-12);  // l_f(4) - l_p(2) = 8 - 4
  EXPECT_NEAR(d.rmsd_p, 0.0, 1e-12);
  EXPECT_NEAR(d.rmsd_f, 0.0, 1e-12);
  EXPECT_NEAR(d.delta, 2.0, 1e-12);
}

TEST(Discontinuities, StepAtTheSplit) {
  const Series s = {0, 0, 0, 1, 1, 1};
  const auto d = discontinuities(s, 4);
  EXPECT_DOUBLE_EQ(d.delta, 1.0);
  EXPECT_NEAR(d.reset, 1.0, 1e-12);
  EXPECT_GT(d.rmsd_p, 0.0);
  EXPECT_GT(d.rmsd_f, 0.0);
}

TEST(Discontinuities, EndpointsUseEmptySegments) {
  const Series s = {0.1, 0.9, 0.4, 0.6};
  const auto first = discontinuities(s, 1);
  EXPECT_EQ(first.delta, 0.0);
  EXPECT_EQ(first.reset, 0.0);
  EXPECT_EQ(first.rmsd_p, 0.0);
  EXPECT_GT(first.rmsd_f, 0.0);
  const auto last = discontinuities(s, 4);
  EXPECT_EQ(last.reset, 0.0);
  EXPECT_EQ(last.rmsd_f, 0.0);
  EXPECT_GT(last.rmsd_p, 0.0);
}

TEST(Discontinuities, TwoTweetClaim) {
  const Series s = {0.2, 0.8};
  const auto all = discontinuity_series(s);
  ASSERT_EQ(all.size(), 2u);
  for (const auto& d : all) {
    EXPECT_EQ(d.reset, 0.0);
    EXPECT_NEAR(d.rmsd_p, 0.0, 1e-12);
    EXPECT_NEAR(d.rmsd_f, 0.0, 1e-12);
  }
  EXPECT_DOUBLE_EQ(all[1].delta, 0.6);
}

TEST(Discontinuities, Errors) {
  EXPECT_THROW(discontinuities(Series{1.0}, 1), InvalidArgument);
  EXPECT_THROW(discontinuities(Series{1.0, 2.0}, 3), InvalidArgument);
  EXPECT_THROW(discontinuity_series(Series{1.0}), InvalidArgument);
}

TEST(Discontinuities, DirectPrefixSumAndOracleAgree) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(2, 40));
    const Series s = random_series(rng, n);
    const auto fast = discontinuity_series(s);
    for (std::size_t i = 1; i <= n; ++i) {
      const auto ref = oracle::discontinuities(s, i);
      const std::string where = "n=" + std::to_string(n) + " i=" + std::to_string(i);
      expect_close(discontinuities(s, i), ref, 1e-9, where);
      expect_close(fast[i - 1], ref, 1e-9, where);
    }
  }
}

TEST(Discontinuities, ShiftInvariantAndScaleCovariant) {
  Rng rng(18);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(rng.between(2, 30));
    const Series s = random_series(rng, n);
    const double shift = rng.uniform() * 10 - 5;
    const double scale = rng.uniform() * 6 - 3;
    Series shifted(s), scaled(s);
    for (double& v : shifted) v += shift;
    for (double& v : scaled) v *= scale;
    const auto base = discontinuity_series(s), a = discontinuity_series(shifted), b = discontinuity_series(scaled);
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_NEAR(a[k].delta, base[k].delta, 1e-9);
      EXPECT_NEAR(a[k].reset, base[k].reset, 1e-9);
      EXPECT_NEAR(a[k].rmsd_p, base[k].rmsd_p, 1e-9);
      EXPECT_NEAR(a[k].rmsd_f, base[k].rmsd_f, 1e-9);
      EXPECT_NEAR(b[k].delta, scale * base[k].delta, 1e-9);
      EXPECT_NEAR(b[k].reset, scale * base[k].reset, 1e-9);
      EXPECT_NEAR(b[k].rmsd_p, std::abs(scale) * base[k].rmsd_p, 1e-9);
      EXPECT_NEAR(b[k].rmsd_f, std::abs(scale) * base[k].rmsd_f, 1e-9);
    }
  }
}

TEST(FeatureLayout, NamesAndProjections) {
  const auto names = feature_names();
  ASSERT_EQ(names.size(), kFeatureCount);
  EXPECT_EQ(names.size(), 30u);
  EXPECT_EQ(std::set<std::string>(names.begin(), names.end()).size(), 30u);
  EXPECT_EQ(names[0], "KCR");
  EXPECT_EQ(names[2], "KCR_Reset");
  EXPECT_EQ(names[29], "DENSITY_RMSD_f");
  EXPECT_EQ(projection_columns(FeatureSet::CueSet).size(), 25u);
  EXPECT_EQ(projection_columns(FeatureSet::CertSet).size(), 10u);
  for (auto c : projection_columns(FeatureSet::CertSet)) {
    EXPECT_TRUE(names[c].starts_with("CRT") || names[c].starts_with("DENSITY")) << names[c];
  }
  for (auto c : projection_columns(FeatureSet::CueSet)) EXPECT_FALSE(names[c].starts_with("CRT")) << names[c];
  Series flat(30);
  for (std::size_t i = 0; i < 30; ++i) flat[i] = static_cast<double>(i);
  EXPECT_EQ(project(flat, FeatureSet::CertSet), (Series{20, 21, 22, 23, 24, 25, 26, 27, 28, 29}));
  EXPECT_THROW(project(Series(29), FeatureSet::CueSet), InvalidArgument);
}

namespace {

Claim knowledge_step_claim() {
  // KCR: 0 0 0 | 0.5 | 1 1 1
  const std::vector<std::string> texts = {"hello world", "the crowd", "a street", "confirm say",
                                          "confirm",     "confirmed", "confirm confirm"};
  Claim c;
  c.id = "c1";
  c.event = "e1";
  c.resolution = Veracity::True;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    Tweet t;
    t.id = "t" + std::to_string(i + 1);
    t.claim_id = c.id;
    t.text = texts[i];
    t.timestamp = static_cast<std::int64_t>(100 * i);
    t.is_resolving = i == 3;
    c.tweets.push_back(t);
  }
  return c;
}

}  // namespace

TEST(FeatureVectors, ResolvingTweetMaximisesKnowledgeReset) {
  const Claim c = knowledge_step_claim();
  const auto rows = build_feature_vectors(c, GlmModel{}, default_seed_lexicon());
  ASSERT_EQ(rows.size(), 7u);
  std::size_t argmax = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].rank, k + 1);
    if (rows[k][Variable::KCR].disc.reset > rows[argmax][Variable::KCR].disc.reset) argmax = k;
  }
  EXPECT_TRUE(rows[argmax].is_resolving);
  EXPECT_NEAR(rows[3][Variable::KCR].disc.reset, 1.0, 1e-12);
  EXPECT_NEAR(rows[2][Variable::KCR].disc.reset, 0.65, 1e-12);
  EXPECT_NEAR(rows[4][Variable::KCR].disc.reset, 0.65, 1e-12);
  for (const auto& r : rows) EXPECT_DOUBLE_EQ(r[Variable::CRT].value, 0.5);  // zero model
}

TEST(FeatureVectors, DensityColumnMatchesDirectCount) {
  const Claim c = knowledge_step_claim();
  const auto rows = build_feature_vectors(c, GlmModel{}, default_seed_lexicon(), 200);
  // 100 s spacing, window +-100 s: neighbours on both sides except at the ends.
  EXPECT_DOUBLE_EQ(rows[0][Variable::DENSITY].value, 2.0 / (200.0 / 60.0));
  EXPECT_DOUBLE_EQ(rows[3][Variable::DENSITY].value, 3.0 / (200.0 / 60.0));
}

TEST(FeatureMatrixCsv, RoundTripIsExact) {
  SynthConfig cfg;
  cfg.seed = 9;
  cfg.n_claims = 4;
  const auto corpus = generate(cfg);
  GlmModel model;
  model.intercept = 0.2;
  model.coef = {1.1, 0.3, -0.4, -1.7};
  const auto rows = corpus_features(corpus, model, default_seed_lexicon());
  std::stringstream buf;
  write_feature_matrix(buf, rows);
  const auto back = read_feature_matrix(buf);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(back[k].claim_id, rows[k].claim_id);
    EXPECT_EQ(back[k].tweet_id, rows[k].tweet_id);
    EXPECT_EQ(back[k].event, rows[k].event);
    EXPECT_EQ(back[k].rank, rows[k].rank);
    EXPECT_EQ(back[k].is_resolving, rows[k].is_resolving);
    EXPECT_EQ(back[k].resolution, rows[k].resolution);
    EXPECT_EQ(back[k].flatten(), rows[k].flatten());
  }
}

TEST(FeatureMatrixCsv, RejectsBadInput) {
  std::istringstream empty("");
  EXPECT_THROW(read_feature_matrix(empty), ParseError);
  std::istringstream header("claim_id,tweet_id\n");
  EXPECT_THROW(read_feature_matrix(header), ParseError);
}
