#pragma once

// AdaBoost.M1 over weighted-Gini decision trees, skew-capping resampling and
// stratified cross-validation for the resolving-tweet (RES) and
// resolution-value (VAL) tasks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/trends.hpp"

namespace rumorlens {

/// Binary labels are -1 / +1 throughout.
using Matrix = std::vector<std::vector<double>>;

struct EnsembleConfig {
  int rounds = 40;
  std::size_t min_leaf = 2;    // items per leaf
  std::size_t min_parent = 3;  // items needed to split a node
  std::uint64_t seed = 0;
};

namespace classify_detail {

inline void check_labels(std::span<const int> y) {
  for (int v : y) {
    if (v != 1 && v != -1) throw InvalidArgument("labels must be -1 or +1");
  }
}

inline void check_matrix(const Matrix& X, std::size_t n) {
  if (X.size() != n) throw InvalidArgument("feature matrix and labels differ in length");
  if (X.empty()) return;
  const std::size_t d = X.front().size();
  for (const auto& row : X) {
    if (row.size() != d) throw InvalidArgument("ragged feature matrix");
  }
}

inline bool both_classes(std::span<const int> y) {
  return std::find(y.begin(), y.end(), 1) != y.end() && std::find(y.begin(), y.end(), -1) != y.end();
}

}  // namespace classify_detail

class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;     // x[feature] <= threshold
    int right = -1;
    int label = 1;
  };

  /// Weighted-Gini CART. A node is split only when it holds at least
  /// min_parent items, is impure, and a split leaves min_leaf items per side.
  static DecisionTree train(const Matrix& X, std::span<const int> y, std::span<const double> w,
                            std::size_t min_leaf, std::size_t min_parent, int tie_label) {
    DecisionTree tree;
    tree.dim_ = X.empty() ? 0 : X.front().size();
    std::vector<std::size_t> items(X.size());
    std::iota(items.begin(), items.end(), std::size_t{0});
    tree.grow(X, y, w, items, min_leaf, std::max<std::size_t>(min_parent, 2 * min_leaf), tie_label);
    return tree;
  }

  int predict(std::span<const double> x) const {
    int at = 0;
    while (nodes_[static_cast<std::size_t>(at)].feature >= 0) {
      const Node& node = nodes_[static_cast<std::size_t>(at)];
      at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes_[static_cast<std::size_t>(at)].label;
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t dim() const { return dim_; }

  static DecisionTree stump(std::size_t dim, int feature, double threshold, int left_label, int right_label) {
    DecisionTree t;
    t.dim_ = dim;
    t.nodes_ = {Node{feature, threshold, 1, 2, left_label}, Node{-1, 0.0, -1, -1, left_label},
                Node{-1, 0.0, -1, -1, right_label}};
    return t;
  }

  static DecisionTree constant(std::size_t dim, int label) {
    DecisionTree t;
    t.dim_ = dim;
    t.nodes_ = {Node{-1, 0.0, -1, -1, label}};
    return t;
  }

 private:
  static double gini(double pos, double neg) {
    const double total = pos + neg;
    if (total <= 0.0) return 0.0;
    const double p = pos / total, q = neg / total;
    return 1.0 - p * p - q * q;
  }

  int grow(const Matrix& X, std::span<const int> y, std::span<const double> w,
           std::vector<std::size_t>& items, std::size_t min_leaf, std::size_t min_parent, int tie_label) {
    double pos = 0.0, neg = 0.0;
    for (auto i : items) (y[i] > 0 ? pos : neg) += w[i];
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{-1, 0.0, -1, -1, pos > neg ? 1 : (neg > pos ? -1 : tie_label)});
    if (items.size() < min_parent || pos == 0.0 || neg == 0.0) return index;

    const double total = pos + neg;
    const double parent_impurity = total * gini(pos, neg);
    double best_impurity = parent_impurity;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::size_t> sorted = items;
    for (std::size_t f = 0; f < dim_; ++f) {
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](std::size_t a, std::size_t b) { return X[a][f] < X[b][f]; });
      double lpos = 0.0, lneg = 0.0;
      for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
        (y[sorted[k]] > 0 ? lpos : lneg) += w[sorted[k]];
        const std::size_t left_n = k + 1;
        if (left_n < min_leaf) continue;
        if (sorted.size() - left_n < min_leaf) break;
        const double lo = X[sorted[k]][f], hi = X[sorted[k + 1]][f];
        if (!(lo < hi)) continue;
        const double impurity = (lpos + lneg) * gini(lpos, lneg) +
                                (total - lpos - lneg) * gini(pos - lpos, neg - lneg);
        if (impurity < best_impurity - 1e-12 * total) {
          best_impurity = impurity;
          best_feature = static_cast<int>(f);
          best_threshold = lo + (hi - lo) / 2.0;
          if (!(best_threshold < hi)) best_threshold = lo;  // adjacent doubles
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left, right;
    for (auto i : items) {
      (X[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
    }
    if (left.empty() || right.empty()) return index;
    nodes_[static_cast<std::size_t>(index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(index)].threshold = best_threshold;
    const int l = grow(X, y, w, left, min_leaf, min_parent, tie_label);
    nodes_[static_cast<std::size_t>(index)].left = l;
    const int r = grow(X, y, w, right, min_leaf, min_parent, tie_label);
    nodes_[static_cast<std::size_t>(index)].right = r;
    return index;
  }

  std::vector<Node> nodes_;
  std::size_t dim_ = 0;
};

struct RoundStats {
  double learner_error = 0.0;   // weighted error of the round's tree
  double training_error = 0.0;  // 0-1 error of the ensemble so far
  double exp_loss = 0.0;        // mean exp(-y F(x)), the boosting bound on training error
};

struct Ensemble {
  std::vector<DecisionTree> learners;
  std::vector<double> learner_weights;
  EnsembleConfig config;
  int majority_label = 1;
  std::size_t dim = 0;
  std::vector<RoundStats> history;  // one entry per kept round

  double score(std::span<const double> x) const {
    if (x.size() != dim) {
      throw InvalidArgument("predict: expected " + std::to_string(dim) + " features, got " +
                            std::to_string(x.size()));
    }
    double s = 0.0;
    for (std::size_t t = 0; t < learners.size(); ++t) s += learner_weights[t] * learners[t].predict(x);
    return s;
  }
};

/// Sign of the weighted vote; exact ties go to the training majority class.
inline int predict(const Ensemble& ensemble, std::span<const double> x) {
  const double s = ensemble.score(x);
  if (s > 0) return 1;
  if (s < 0) return -1;
  return ensemble.majority_label;
}

inline constexpr double kZeroErrorEpsilon = 1e-10;

/// AdaBoost.M1. Stops early when a round's weighted error reaches 0.5 (round
/// discarded) or 0 (round kept with a capped weight).
inline Ensemble train_adaboost(const Matrix& X, std::span<const int> y, const EnsembleConfig& config = {}) {
  using namespace classify_detail;
  check_labels(y);
  check_matrix(X, y.size());
  if (y.size() < 4) throw InvalidArgument("train_adaboost: need at least 4 items");
  if (!both_classes(y)) throw InvalidArgument("train_adaboost: both classes must be present");
  if (config.rounds < 1) throw InvalidArgument("train_adaboost: rounds must be positive");

  const std::size_t n = y.size();
  Ensemble ens;
  ens.config = config;
  ens.dim = X.front().size();
  const auto positives = std::count(y.begin(), y.end(), 1);
  ens.majority_label = 2 * static_cast<std::size_t>(positives) >= n ? 1 : -1;

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  std::vector<double> scores(n, 0.0);
  std::vector<int> h(n);
  for (int round = 0; round < config.rounds; ++round) {
    auto tree = DecisionTree::train(X, y, w, config.min_leaf, config.min_parent, ens.majority_label);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = tree.predict(X[i]);
      if (h[i] != y[i]) err += w[i];
    }
    if (err >= 0.5) break;
    const bool perfect = err <= 0.0;
    const double e = perfect ? kZeroErrorEpsilon : err;
    const double alpha = 0.5 * std::log((1.0 - e) / e);
    ens.learners.push_back(std::move(tree));
    ens.learner_weights.push_back(alpha);

    RoundStats stats{err, 0.0, 0.0};
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] += alpha * h[i];
      const int vote = scores[i] > 0 ? 1 : (scores[i] < 0 ? -1 : ens.majority_label);
      if (vote != y[i]) stats.training_error += 1.0;
      stats.exp_loss += std::exp(-y[i] * scores[i]);
      w[i] *= std::exp(-alpha * y[i] * h[i]);
      norm += w[i];
    }
    stats.training_error /= static_cast<double>(n);
    stats.exp_loss /= static_cast<double>(n);
    ens.history.push_back(stats);
    if (perfect) break;
    for (double& wi : w) wi /= norm;
  }
  if (ens.learners.empty()) {
    // Even the first tree was no better than chance; fall back to the majority vote.
    ens.learners.push_back(DecisionTree::constant(ens.dim, ens.majority_label));
    ens.learner_weights.push_back(1.0);
    double wrong = 0.0;
    for (int v : y) wrong += v != ens.majority_label ? 1.0 : 0.0;
    ens.history.push_back({wrong / static_cast<double>(n), wrong / static_cast<double>(n), std::exp(-1.0)});
  }
  return ens;
}

// ---------------------------------------------------------------------------
// Resampling and folds

/// Keeps the minority class whole and draws the majority class without
/// replacement down to at most twice the minority size. Returns shuffled
/// item indices.
inline std::vector<std::size_t> resample_indices(std::span<const int> y, std::uint64_t seed) {
  classify_detail::check_labels(y);
  if (!classify_detail::both_classes(y)) throw InvalidArgument("resample: both classes must be present");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(i);
  auto& minority = pos.size() <= neg.size() ? pos : neg;
  auto& majority = pos.size() <= neg.size() ? neg : pos;
  Rng rng(seed);
  const std::size_t cap = std::min(majority.size(), 2 * minority.size());
  if (cap < majority.size()) {
    rng.shuffle(majority);
    majority.resize(cap);
  }
  std::vector<std::size_t> out = minority;
  out.insert(out.end(), majority.begin(), majority.end());
  std::sort(out.begin(), out.end());
  rng.shuffle(out);
  return out;
}

struct LabeledData {
  Matrix X;
  std::vector<int> y;
};

inline LabeledData resample(const LabeledData& data, std::uint64_t seed) {
  LabeledData out;
  for (auto i : resample_indices(data.y, seed)) {
    out.X.push_back(data.X[i]);
    out.y.push_back(data.y[i]);
  }
  return out;
}

/// Fold index per item. Each class is shuffled and dealt round-robin, with
/// the dealing position carried across classes so fold sizes stay balanced.
inline std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds,
                                                 std::uint64_t seed) {
  if (folds < 2) throw InvalidArgument("stratified_folds: need at least 2 folds");
  Rng rng(seed);
  std::vector<std::size_t> fold_of(y.size());
  std::size_t deal = 0;
  for (int label : {-1, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == label) members.push_back(i);
    }
    rng.shuffle(members);
    for (auto i : members) fold_of[i] = deal++ % folds;
  }
  return fold_of;
}

// ---------------------------------------------------------------------------
// Evaluation

struct Confusion {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;  // positive class = +1

  std::size_t total() const { return tp + fn + fp + tn; }
  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fn += o.fn;
    fp += o.fp;
    tn += o.tn;
    return *this;
  }
};

struct Metrics {
  double accuracy = 0.0;
  double weighted_precision = 0.0;
  double weighted_recall = 0.0;
  double weighted_f1 = 0.0;
  std::size_t n = 0;
};

/// Support-weighted one-vs-rest precision/recall/F1; undefined ratios are 0.
inline Metrics metrics_from_confusion(const Confusion& c) {
  Metrics m;
  m.n = c.total();
  if (m.n == 0) return m;
  const double n = static_cast<double>(m.n);
  auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
  struct PerClass {
    double support, precision, recall;
  };
  const PerClass classes[2] = {
      {static_cast<double>(c.tp + c.fn), ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fp)),
       ratio(static_cast<double>(c.tp), static_cast<double>(c.tp + c.fn))},
      {static_cast<double>(c.tn + c.fp), ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fn)),
       ratio(static_cast<double>(c.tn), static_cast<double>(c.tn + c.fp))},
  };
  m.accuracy = static_cast<double>(c.tp + c.tn) / n;
  for (const auto& k : classes) {
    const double f1 = ratio(2.0 * k.precision * k.recall, k.precision + k.recall);
    m.weighted_precision += k.support / n * k.precision;
    m.weighted_recall += k.support / n * k.recall;
    m.weighted_f1 += k.support / n * f1;
  }
  return m;
}

struct EvalReport {
  double weighted_f1 = 0.0;
  double weighted_recall = 0.0;
  double weighted_precision = 0.0;
  double accuracy = 0.0;
  double baseline_accuracy = 0.0;  // majority-class share of the evaluated items
  std::size_t folds = 0;
  std::size_t n_items = 0;
  std::size_t n_positive = 0;
  std::size_t n_negative = 0;
  Confusion totals;
  std::vector<Metrics> per_fold;
  std::vector<std::string> warnings;
};

/// Stratified k-fold CV. Reported metrics are fold means weighted by fold
/// size, so accuracy equals the pooled accuracy of the confusion totals.
template <typename Trainer, typename Predictor>
EvalReport cross_validate_with(const Matrix& X, std::span<const int> y, std::size_t folds,
                               std::uint64_t seed, Trainer&& train, Predictor&& predict_fn) {
  using namespace classify_detail;
  check_labels(y);
  check_matrix(X, y.size());
  if (!both_classes(y)) throw InvalidArgument("cross_validate: both classes must be present");
  if (y.size() < folds) throw InvalidArgument("cross_validate: fewer items than folds");

  EvalReport report;
  report.n_items = y.size();
  report.n_positive = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  report.n_negative = report.n_items - report.n_positive;
  const std::size_t smallest = std::min(report.n_positive, report.n_negative);
  if (smallest < 2) throw InvalidArgument("cross_validate: each class needs at least 2 items");
  if (smallest < folds) {
    report.warnings.push_back("reducing folds from " + std::to_string(folds) + " to " +
                              std::to_string(smallest) + " (smallest class size)");
    folds = smallest;
  }
  report.folds = folds;
  report.baseline_accuracy = static_cast<double>(std::max(report.n_positive, report.n_negative)) /
                             static_cast<double>(report.n_items);

  const auto fold_of = stratified_folds(y, folds, seed);
  for (std::size_t f = 0; f < folds; ++f) {
    Matrix train_x, test_x;
    std::vector<int> train_y, test_y;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (fold_of[i] == f) {
        test_x.push_back(X[i]);
        test_y.push_back(y[i]);
      } else {
        train_x.push_back(X[i]);
        train_y.push_back(y[i]);
      }
    }
    const auto model = train(train_x, std::span<const int>(train_y));
    Confusion c;
    for (std::size_t i = 0; i < test_y.size(); ++i) {
      const int p = predict_fn(model, std::span<const double>(test_x[i]));
      if (test_y[i] > 0) {
        (p > 0 ? c.tp : c.fn)++;
      } else {
        (p > 0 ? c.fp : c.tn)++;
      }
    }
    report.totals += c;
    report.per_fold.push_back(metrics_from_confusion(c));
  }
  for (const auto& m : report.per_fold) {
    const double share = static_cast<double>(m.n) / static_cast<double>(report.n_items);
    report.accuracy += share * m.accuracy;
    report.weighted_precision += share * m.weighted_precision;
    report.weighted_recall += share * m.weighted_recall;
    report.weighted_f1 += share * m.weighted_f1;
  }
  return report;
}

inline EvalReport cross_validate(const Matrix& X, std::span<const int> y, const EnsembleConfig& config,
                                 std::size_t folds = 10, std::uint64_t seed = 0) {
  return cross_validate_with(
      X, y, folds, seed,
      [&](const Matrix& tx, std::span<const int> ty) { return train_adaboost(tx, ty, config); },
      [](const Ensemble& e, std::span<const double> x) { return predict(e, x); });
}

// ---------------------------------------------------------------------------
// Tasks

enum class Task { RES, VAL };

inline std::string_view to_string(Task t) { return t == Task::RES ? "RES" : "VAL"; }
inline std::string_view to_string(FeatureSet s) { return s == FeatureSet::CueSet ? "CueSet" : "CertSet"; }

/// RES: every tweet of a resolved claim, +1 = resolving. VAL: resolving
/// tweets only, +1 = claim resolved true.
inline LabeledData task_items(const std::vector<FeatureVector>& rows, Task task, FeatureSet set) {
  LabeledData out;
  for (const auto& fv : rows) {
    if (!fv.resolution) continue;
    if (task == Task::VAL && !fv.is_resolving) continue;
    out.X.push_back(project(fv.flatten(), set));
    const bool positive = task == Task::RES ? fv.is_resolving : *fv.resolution == Veracity::True;
    out.y.push_back(positive ? 1 : -1);
  }
  return out;
}

struct TaskResult {
  Task task;
  FeatureSet feature_set;
  std::size_t available_items = 0;
  std::size_t feature_count = 0;
  EvalReport report;
};

/// Resample, then cross-validate, on the task's projection of the features.
inline TaskResult run_task(const std::vector<FeatureVector>& rows, Task task, FeatureSet set,
                           const EnsembleConfig& config, std::size_t folds = 10) {
  const LabeledData items = task_items(rows, task, set);
  if (items.y.empty()) throw InvalidArgument(std::string(to_string(task)) + ": no labelled items");
  const LabeledData sampled = resample(items, config.seed);
  TaskResult result{task, set, items.y.size(), projection_columns(set).size(), {}};
  result.report = cross_validate(sampled.X, sampled.y, config, folds, config.seed);
  return result;
}

inline nlohmann::json to_json(const TaskResult& r) {
  const auto& e = r.report;
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& m : e.per_fold) {
    folds.push_back({{"n", m.n},
                     {"accuracy", m.accuracy},
                     {"wgt_precision", m.weighted_precision},
                     {"wgt_recall", m.weighted_recall},
                     {"wgt_f1", m.weighted_f1}});
  }
  return {{"task", to_string(r.task)},
          {"feature_set", to_string(r.feature_set)},
          {"feature_count", r.feature_count},
          {"available_items", r.available_items},
          {"items", e.n_items},
          {"positive", e.n_positive},
          {"negative", e.n_negative},
          {"folds", e.folds},
          {"wgt_f1", e.weighted_f1},
          {"wgt_recall", e.weighted_recall},
          {"wgt_precision", e.weighted_precision},
          {"accuracy", e.accuracy},
          {"bl_accuracy", e.baseline_accuracy},
          {"confusion", {{"tp", e.totals.tp}, {"fn", e.totals.fn}, {"fp", e.totals.fp}, {"tn", e.totals.tn}}},
          {"per_fold", folds},
          {"warnings", e.warnings}};
}

}  // namespace rumorlens
