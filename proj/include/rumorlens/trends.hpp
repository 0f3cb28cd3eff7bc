#pragma once

// Trend-discontinuity features over a claim's rank-ordered tweet sequence.
//
// For tweet i of n, three OLS lines are fitted against tweet rank: l_p over
// ranks 1..i-1, l_f over i+1..n and l_a over 1..n. Reset is the onset of l_f
// (rank i+1) minus the offset of l_p (rank i-1); RMSD_p / RMSD_f are the
// root mean squared gaps between l_p / l_f and l_a over their own ranks.
// Features touching an empty segment are 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "rumorlens/certainty.hpp"
#include "rumorlens/corpus.hpp"
#include "rumorlens/csv.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/features.hpp"
#include "rumorlens/lexicon.hpp"

namespace rumorlens {

struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t n = 0;

  double at(double x) const { return intercept + slope * x; }
};

/// OLS line; a single point gives a horizontal line through it, no points
/// give nullopt.
inline std::optional<Line> fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("fit_line: xs and ys differ in length");
  const std::size_t n = xs.size();
  if (n == 0) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
  return Line{slope, my - slope * mx, n};
}

/// series[i] - series[i-1] for 1-based i; 0 at i = 1.
inline double delta(std::span<const double> series, std::size_t i) {
  if (i < 1 || i > series.size()) throw InvalidArgument("delta: rank out of range");
  return i == 1 ? 0.0 : series[i - 1] - series[i - 2];
}

struct DiscontinuitySet {
  double delta = 0.0;
  double reset = 0.0;
  double rmsd_p = 0.0;
  double rmsd_f = 0.0;
};

namespace trends_detail {

inline std::optional<Line> fit_ranks(std::span<const double> series, std::size_t first,
                                     std::size_t last) {
  if (first > last) return std::nullopt;
  std::vector<double> xs, ys;
  for (std::size_t r = first; r <= last; ++r) {
    xs.push_back(static_cast<double>(r));
    ys.push_back(series[r - 1]);
  }
  return fit_line(xs, ys);
}

inline double rmsd_between(const Line& a, const Line& b, std::size_t first, std::size_t last) {
  double ss = 0.0;
  for (std::size_t r = first; r <= last; ++r) {
    const double d = a.at(static_cast<double>(r)) - b.at(static_cast<double>(r));
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(last - first + 1));
}

}  // namespace trends_detail

/// Discontinuity features at 1-based rank i, fitting each line directly.
inline DiscontinuitySet discontinuities(std::span<const double> series, std::size_t i) {
  using namespace trends_detail;
  const std::size_t n = series.size();
  if (n < 2) throw InvalidArgument("discontinuities: need at least 2 values");
  if (i < 1 || i > n) throw InvalidArgument("discontinuities: rank out of range");
  DiscontinuitySet out;
  out.delta = delta(series, i);
  const auto all = fit_ranks(series, 1, n);
  const auto pre = fit_ranks(series, 1, i - 1);
  const auto post = fit_ranks(series, i + 1, n);
  if (pre && post) out.reset = post->at(static_cast<double>(i + 1)) - pre->at(static_cast<double>(i - 1));
  if (pre) out.rmsd_p = rmsd_between(*pre, *all, 1, i - 1);
  if (post) out.rmsd_f = rmsd_between(*post, *all, i + 1, n);
  return out;
}

/// Discontinuity features for every rank in O(n) via prefix sums.
inline std::vector<DiscontinuitySet> discontinuity_series(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw InvalidArgument("discontinuity_series: need at least 2 values");
  // prefix_y[k] = Σ_{r<=k} y_r, prefix_ry[k] = Σ_{r<=k} r·y_r
  std::vector<double> prefix_y(n + 1, 0.0), prefix_ry(n + 1, 0.0);
  for (std::size_t r = 1; r <= n; ++r) {
    prefix_y[r] = prefix_y[r - 1] + series[r - 1];
    prefix_ry[r] = prefix_ry[r - 1] + static_cast<double>(r) * series[r - 1];
  }
  // Line over ranks [lo, hi] expressed around its centre: value(c) and slope.
  struct Centered {
    double centre, level, slope;
    double at(double x) const { return level + slope * (x - centre); }
  };
  auto segment = [&](std::size_t lo, std::size_t hi) {
    const double m = static_cast<double>(hi - lo + 1);
    const double centre = (static_cast<double>(lo) + static_cast<double>(hi)) / 2.0;
    const double sum_y = prefix_y[hi] - prefix_y[lo - 1];
    const double sum_ry = prefix_ry[hi] - prefix_ry[lo - 1];
    const double sxx = m * (m * m - 1.0) / 12.0;
    const double sxy = sum_ry - centre * sum_y;
    return Centered{centre, sum_y / m, sxx > 0.0 ? sxy / sxx : 0.0};
  };
  const Centered all = segment(1, n);
  std::vector<DiscontinuitySet> out(n);
  for (std::size_t i = 1; i <= n; ++i) {
    DiscontinuitySet& d = out[i - 1];
    d.delta = i == 1 ? 0.0 : series[i - 1] - series[i - 2];
    std::optional<Centered> pre, post;
    if (i > 1) pre = segment(1, i - 1);
    if (i < n) post = segment(i + 1, n);
    if (pre && post) d.reset = post->at(static_cast<double>(i + 1)) - pre->at(static_cast<double>(i - 1));
    // The gap between two lines is linear in rank, so its mean square over a
    // segment is gap(centre)^2 + gap_slope^2 * (m^2 - 1) / 12.
    auto rmsd = [&](const Centered& seg, std::size_t lo, std::size_t hi) {
      const double m = static_cast<double>(hi - lo + 1);
      const double dslope = seg.slope - all.slope;
      const double dlevel = seg.level - all.at(seg.centre);
      return std::sqrt(std::max(0.0, dlevel * dlevel + dslope * dslope * (m * m - 1.0) / 12.0));
    };
    if (pre) d.rmsd_p = rmsd(*pre, 1, i - 1);
    if (post) d.rmsd_f = rmsd(*post, i + 1, n);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Per-tweet feature vectors

enum class Variable : std::size_t { KCR = 0, RCR, BCR, DCR, CRT, DENSITY };

inline constexpr std::array<Variable, 6> kVariables = {Variable::KCR, Variable::RCR, Variable::BCR,
                                                       Variable::DCR, Variable::CRT, Variable::DENSITY};

inline std::string_view to_string(Variable v) {
  static constexpr std::array<std::string_view, 6> kNames = {"KCR", "RCR", "BCR", "DCR", "CRT", "DENSITY"};
  return kNames[static_cast<std::size_t>(v)];
}

inline constexpr std::array<std::string_view, 5> kFeatureKinds = {"", "_Delta", "_Reset", "_RMSD_p",
                                                                  "_RMSD_f"};
inline constexpr std::size_t kFeaturesPerVariable = kFeatureKinds.size();
inline constexpr std::size_t kFeatureCount = kVariables.size() * kFeaturesPerVariable;  // 30

struct VariableFeatures {
  double value = 0.0;
  DiscontinuitySet disc;
};

struct FeatureVector {
  std::string claim_id;
  std::string tweet_id;
  std::string event;
  std::size_t rank = 0;
  bool is_resolving = false;
  std::optional<Veracity> resolution;
  std::array<VariableFeatures, kVariables.size()> vars{};

  const VariableFeatures& operator[](Variable v) const { return vars[static_cast<std::size_t>(v)]; }

  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(kFeatureCount);
    for (const auto& v : vars) {
      out.insert(out.end(), {v.value, v.disc.delta, v.disc.reset, v.disc.rmsd_p, v.disc.rmsd_f});
    }
    return out;
  }
};

/// Column names of the flattened 30-entry vector, e.g. "KCR", "KCR_Delta".
inline std::vector<std::string> feature_names() {
  std::vector<std::string> names;
  for (Variable v : kVariables) {
    for (auto kind : kFeatureKinds) names.push_back(std::string(to_string(v)) + std::string(kind));
  }
  return names;
}

enum class FeatureSet { CueSet, CertSet };

/// Flattened-column indices of a feature set: CueSet = four cue ratios plus
/// density (25), CertSet = predicted certainty plus density (10).
inline std::vector<std::size_t> projection_columns(FeatureSet set) {
  std::vector<Variable> vars = set == FeatureSet::CueSet
                                   ? std::vector<Variable>{Variable::KCR, Variable::RCR, Variable::BCR,
                                                           Variable::DCR, Variable::DENSITY}
                                   : std::vector<Variable>{Variable::CRT, Variable::DENSITY};
  std::vector<std::size_t> cols;
  for (Variable v : vars) {
    for (std::size_t k = 0; k < kFeaturesPerVariable; ++k) {
      cols.push_back(static_cast<std::size_t>(v) * kFeaturesPerVariable + k);
    }
  }
  return cols;
}

inline std::vector<double> project(std::span<const double> flat, FeatureSet set) {
  if (flat.size() != kFeatureCount) throw InvalidArgument("project: expected 30 features");
  std::vector<double> out;
  for (auto c : projection_columns(set)) out.push_back(flat[c]);
  return out;
}

struct TweetIntrinsics {
  CueCounts counts;
  CueRatios ratios;
  double certainty = 0.0;  // GLM prediction
  double density = 0.0;
};

/// Cue ratios, predicted certainty and density per tweet, in claim order.
inline std::vector<TweetIntrinsics> claim_intrinsics(const Claim& claim, const GlmModel& model,
                                                     const Lexicon& lexicon,
                                                     std::int64_t density_window = kDefaultDensityWindow) {
  std::vector<TweetIntrinsics> out;
  out.reserve(claim.tweets.size());
  for (const auto& t : claim.tweets) {
    TweetIntrinsics ti;
    ti.counts = match_cues(t.text, lexicon);
    ti.ratios = cue_ratios(ti.counts);
    ti.certainty = predict_certainty(model, ti.ratios);
    ti.density = tweet_density(claim, t, density_window);
    out.push_back(std::move(ti));
  }
  return out;
}

inline std::vector<FeatureVector> build_feature_vectors(const Claim& claim, const GlmModel& model,
                                                        const Lexicon& lexicon,
                                                        std::int64_t density_window = kDefaultDensityWindow) {
  const auto ranked = index_tweets(claim);
  const std::size_t n = ranked.size();
  if (n < 2) throw InvalidArgument("claim '" + claim.id + "' needs at least 2 tweets");

  std::vector<const Tweet*> ordered;
  for (const auto& r : ranked) ordered.push_back(&r.tweet.get());

  std::array<std::vector<double>, kVariables.size()> series;
  for (auto& s : series) s.reserve(n);
  for (const Tweet* t : ordered) {
    const CueRatios r = cue_ratios(match_cues(t->text, lexicon));
    series[0].push_back(r.kcr);
    series[1].push_back(r.rcr);
    series[2].push_back(r.bcr);
    series[3].push_back(r.dcr);
    series[4].push_back(predict_certainty(model, r));
    series[5].push_back(tweet_density(claim, *t, density_window));
  }

  std::vector<FeatureVector> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k].claim_id = claim.id;
    out[k].tweet_id = ordered[k]->id;
    out[k].event = claim.event;
    out[k].rank = k + 1;
    out[k].is_resolving = ordered[k]->is_resolving;
    out[k].resolution = claim.resolution;
  }
  for (std::size_t v = 0; v < series.size(); ++v) {
    const auto disc = discontinuity_series(series[v]);
    for (std::size_t k = 0; k < n; ++k) out[k].vars[v] = {series[v][k], disc[k]};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature matrix CSV: ids, labels, then the 30 feature columns.

inline void write_feature_matrix(std::ostream& out, const std::vector<FeatureVector>& rows) {
  std::vector<std::string> header = {"claim_id", "tweet_id", "event", "rank", "is_resolving",
                                     "resolution_value"};
  for (auto& name : feature_names()) header.push_back(name);
  write_csv_row(out, header);
  for (const auto& fv : rows) {
    std::vector<std::string> fields = {fv.claim_id, fv.tweet_id, fv.event, std::to_string(fv.rank),
                                       fv.is_resolving ? "1" : "0",
                                       fv.resolution ? std::string(to_string(*fv.resolution)) : ""};
    for (double v : fv.flatten()) fields.push_back(format_double(v));
    write_csv_row(out, fields);
  }
}

inline std::vector<FeatureVector> read_feature_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty feature matrix");
  const auto header = split_csv_line(line, line_no);
  if (header.size() != 6 + kFeatureCount || header[0] != "claim_id" || header[5] != "resolution_value") {
    throw ParseError(1, "unexpected feature matrix header");
  }
  const auto names = feature_names();
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    if (header[6 + c] != names[c]) throw ParseError(1, "unexpected column '" + header[6 + c] + "'");
  }
  std::vector<FeatureVector> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line, line_no);
    if (f.size() != header.size()) throw ParseError(line_no, "wrong number of fields");
    FeatureVector fv;
    fv.claim_id = f[0];
    fv.tweet_id = f[1];
    fv.event = f[2];
    fv.rank = static_cast<std::size_t>(parse_double(f[3], line_no));
    if (f[4] != "0" && f[4] != "1") throw ParseError(line_no, "is_resolving must be 0 or 1");
    fv.is_resolving = f[4] == "1";
    if (f[5] == "true") {
      fv.resolution = Veracity::True;
    } else if (f[5] == "false") {
      fv.resolution = Veracity::False;
    } else if (!f[5].empty()) {
      throw ParseError(line_no, "resolution_value must be true, false or empty");
    }
    for (std::size_t v = 0; v < kVariables.size(); ++v) {
      const std::size_t base = 6 + v * kFeaturesPerVariable;
      fv.vars[v].value = parse_double(f[base], line_no);
      fv.vars[v].disc = {parse_double(f[base + 1], line_no), parse_double(f[base + 2], line_no),
                         parse_double(f[base + 3], line_no), parse_double(f[base + 4], line_no)};
    }
    rows.push_back(std::move(fv));
  }
  return rows;
}

}  // namespace rumorlens
