#pragma once

// Stage helpers shared by the CLI and the end-to-end pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rumorlens/certainty.hpp"
#include "rumorlens/classify.hpp"
#include "rumorlens/corpus.hpp"
#include "rumorlens/csv.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/features.hpp"
#include "rumorlens/lexicon.hpp"
#include "rumorlens/plot.hpp"
#include "rumorlens/stats.hpp"
#include "rumorlens/trends.hpp"

namespace rumorlens {

/// A pipeline stage failed; what() is prefixed with the stage name.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// ---------------------------------------------------------------------------
// Certainty training data

struct CertaintyData {
  std::vector<Predictors> X;
  std::vector<double> y;
  std::vector<std::string> tweet_ids;
};

/// Tweets with at least one usable certainty label, with their cue ratios.
inline CertaintyData certainty_training_data(const Corpus& corpus, const Lexicon& lexicon) {
  CertaintyData d;
  for (const auto& claim : corpus.claims) {
    for (const auto& t : claim.tweets) {
      if (!t.certainty_labels) continue;
      const auto score = aggregate_certainty(*t.certainty_labels);
      if (!score) continue;
      d.X.push_back(predictors(cue_ratios(match_cues(t.text, lexicon))));
      d.y.push_back(*score);
      d.tweet_ids.push_back(t.id);
    }
  }
  return d;
}

inline std::vector<FeatureVector> corpus_features(const Corpus& corpus, const GlmModel& model,
                                                  const Lexicon& lexicon,
                                                  std::int64_t density_window = kDefaultDensityWindow) {
  std::vector<FeatureVector> rows;
  for (const auto& claim : corpus.claims) {
    auto part = build_feature_vectors(claim, model, lexicon, density_window);
    rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return rows;
}

/// Per-tweet cue counts and ratios.
inline void write_cue_table(std::ostream& out, const Corpus& corpus, const Lexicon& lexicon) {
  write_csv_row(out, {"claim_id", "tweet_id", "knowledge", "report", "belief", "doubt", "KCR", "RCR", "BCR",
                      "DCR", "FCR"});
  for (const auto& claim : corpus.claims) {
    for (const auto& t : claim.tweets) {
      const auto counts = match_cues(t.text, lexicon);
      const auto r = cue_ratios(counts);
      write_csv_row(out, {claim.id, t.id, std::to_string(counts.counts[0]), std::to_string(counts.counts[1]),
                          std::to_string(counts.counts[2]), std::to_string(counts.counts[3]),
                          format_double(r.kcr), format_double(r.rcr), format_double(r.bcr),
                          format_double(r.dcr), format_double(r.fcr)});
    }
  }
}

// ---------------------------------------------------------------------------
// Group comparisons

enum class Comparison {
  RES,  // resolving vs other tweets of resolved claims
  VAL,  // resolving tweets of falsified vs verified claims, one per claim
};

inline std::vector<GroupDiffRow> compare_groups(const std::vector<FeatureVector>& rows, Comparison which,
                                                FdrMethod method = FdrMethod::BenjaminiHochberg) {
  std::vector<std::vector<double>> matrix;
  std::vector<bool> in_a, in_b;
  for (const auto& fv : rows) {
    if (!fv.resolution) continue;
    if (which == Comparison::VAL && !fv.is_resolving) continue;
    matrix.push_back(fv.flatten());
    const bool a = which == Comparison::RES ? fv.is_resolving : *fv.resolution == Veracity::False;
    in_a.push_back(a);
    in_b.push_back(!a);
  }
  return group_diff_report(feature_names(), matrix, in_a, in_b, method);
}

inline void write_group_diff_csv(std::ostream& out, const std::vector<GroupDiffRow>& table) {
  write_csv_row(out, {"variable", "median_a", "median_b", "statistic", "p_raw", "p_fdr"});
  for (const auto& r : table) {
    write_csv_row(out, {r.variable, format_double(r.median_a), format_double(r.median_b),
                        format_double(r.statistic), format_double(r.p_raw), format_double(r.p_fdr)});
  }
}

inline void write_group_diff_text(std::ostream& out, const std::vector<GroupDiffRow>& table,
                                  const std::string& title) {
  out << title << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %10s %10s %12s %10s %10s\n", "variable", "median_a", "median_b",
                "U", "p_raw", "p_fdr");
  out << line;
  for (const auto& r : table) {
    std::snprintf(line, sizeof line, "%-16s %10.4f %10.4f %12.1f %10.3g %10.3g\n", r.variable.c_str(),
                  r.median_a, r.median_b, r.statistic, r.p_raw, r.p_fdr);
    out << line;
  }
}

// ---------------------------------------------------------------------------
// Timeline plot data for one claim

inline std::optional<Variable> parse_variable(std::string_view name) {
  for (Variable v : kVariables) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

inline std::vector<PlotPoint> claim_plot_points(const Claim& claim, const std::vector<FeatureVector>& rows,
                                                Variable variable, std::int64_t bin_seconds = kDefaultBinWidth) {
  std::map<std::string, const FeatureVector*> by_id;
  for (const auto& fv : rows) {
    if (fv.claim_id == claim.id) by_id[fv.tweet_id] = &fv;
  }
  std::vector<double> values, fcr;
  for (const auto& t : claim.tweets) {
    auto it = by_id.find(t.id);
    if (it == by_id.end()) throw InvalidArgument("no features for tweet '" + t.id + "'");
    values.push_back((*it->second)[variable].value);
    fcr.push_back(std::clamp((*it->second)[Variable::KCR].value + (*it->second)[Variable::RCR].value, 0.0, 1.0));
  }
  return timeline_points(claim, values, fcr, bin_seconds);
}

// ---------------------------------------------------------------------------
// End to end

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path lexicon;     // empty: built-in seed lexicon
  std::filesystem::path embeddings;  // required when extend is set
  std::filesystem::path out_dir = "out";
  bool extend = false;
  std::size_t neighbours = 3;
  bool classify = true;
  bool stats = true;
  bool plot = true;
  std::vector<std::string> plot_claims;  // empty: every resolved claim
  std::string plot_variable = "CRT";
  std::optional<std::uint64_t> seed;
  std::size_t folds = 10;
  int rounds = 40;
  std::int64_t bin_width = kDefaultBinWidth;
  std::int64_t density_window = kDefaultDensityWindow;
  FdrMethod fdr = FdrMethod::BenjaminiHochberg;
};

struct PipelineResult {
  std::vector<std::filesystem::path> artifacts;
  std::vector<std::string> warnings;
};

namespace pipeline_detail {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace pipeline_detail

inline nlohmann::json classification_report(const std::vector<FeatureVector>& rows, const EnsembleConfig& config,
                                             std::size_t folds) {
  nlohmann::json tasks = nlohmann::json::array();
  for (Task task : {Task::RES, Task::VAL}) {
    for (FeatureSet set : {FeatureSet::CueSet, FeatureSet::CertSet}) {
      tasks.push_back(to_json(run_task(rows, task, set, config, folds)));
    }
  }
  return {{"seed", config.seed}, {"rounds", config.rounds}, {"requested_folds", folds}, {"tasks", tasks}};
}

/// parse -> (extend-lexicon) -> match -> certainty fit/eval/predict -> trend
/// features -> classify -> stats -> plot, writing each stage's artifact.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr) {
  using pipeline_detail::stage;
  namespace fs = std::filesystem;
  PipelineResult result;
  auto note = [&](const std::string& msg) {
    if (log) *log << msg << '\n';
  };
  auto emit = [&](const fs::path& path, auto&& writer) {
    write_file_atomic(path, writer);
    result.artifacts.push_back(path);
    note("wrote " + path.string());
  };
  if (!cfg.seed && (cfg.classify || cfg.stats)) throw StageError("config", "a seed is required");
  const std::uint64_t seed = cfg.seed.value_or(0);

  const Corpus corpus = stage("parse", [&] {
    if (!fs::exists(cfg.corpus)) throw Error("corpus file '" + cfg.corpus.string() + "' does not exist");
    auto parsed = parse_corpus_file(cfg.corpus);
    for (auto& w : parsed.warnings) result.warnings.push_back(w);
    return parsed.corpus;
  });
  emit(cfg.out_dir / "corpus.jsonl", [&](std::ostream& o) { write_corpus(o, corpus); });

  Lexicon lexicon = stage("lexicon", [&] {
    return cfg.lexicon.empty() ? default_seed_lexicon() : read_lexicon_file(cfg.lexicon);
  });
  if (cfg.extend) {
    lexicon = stage("extend-lexicon", [&] {
      if (cfg.embeddings.empty()) throw Error("lexicon extension requested but no embeddings file given");
      if (!fs::exists(cfg.embeddings)) {
        throw Error("embeddings file '" + cfg.embeddings.string() + "' does not exist");
      }
      auto ext = extend_lexicon(lexicon, read_embeddings_file(cfg.embeddings), cfg.neighbours);
      for (auto& s : ext.skipped_cues) result.warnings.push_back("cue not in embeddings: " + s);
      return ext.lexicon;
    });
  }
  emit(cfg.out_dir / "lexicon.txt", [&](std::ostream& o) { write_lexicon(o, lexicon); });
  emit(cfg.out_dir / "cues.csv", [&](std::ostream& o) { write_cue_table(o, corpus, lexicon); });

  const CertaintyData cert = certainty_training_data(corpus, lexicon);
  const GlmModel model = stage("certainty-fit", [&] { return fit_certainty_model(cert.X, cert.y); });
  emit(cfg.out_dir / "certainty_model.json", [&](std::ostream& o) { o << to_json(model).dump(2) << '\n'; });
  if (cfg.classify || cfg.stats) {
    const auto cv = stage("certainty-eval", [&] {
      return evaluate_glm_cv(cert.X, cert.y, std::min<std::size_t>(cfg.folds, cert.y.size()), seed);
    });
    nlohmann::json j = {{"folds", cv.folds},
                        {"rmse_mean", cv.rmse_mean},
                        {"rmse_max", cv.rmse_max},
                        {"baseline_rmse", cv.baseline_rmse},
                        {"fold_rmse", cv.fold_rmse},
                        {"fold_baseline_rmse", cv.fold_baseline_rmse},
                        {"wilcoxon_p", cv.wilcoxon_p ? nlohmann::json(*cv.wilcoxon_p) : nlohmann::json()}};
    emit(cfg.out_dir / "certainty_eval.json", [&](std::ostream& o) { o << j.dump(2) << '\n'; });
  }

  const auto rows = stage("features", [&] { return corpus_features(corpus, model, lexicon, cfg.density_window); });
  emit(cfg.out_dir / "features.csv", [&](std::ostream& o) { write_feature_matrix(o, rows); });

  if (cfg.classify) {
    const EnsembleConfig ec{cfg.rounds, 2, 3, seed};
    const auto report = stage("classify", [&] { return classification_report(rows, ec, cfg.folds); });
    emit(cfg.out_dir / "report.json", [&](std::ostream& o) { o << report.dump(2) << '\n'; });
  }

  if (cfg.stats) {
    for (auto [which, name] : {std::pair{Comparison::RES, "res"}, std::pair{Comparison::VAL, "val"}}) {
      const auto table = stage("stats", [&] { return compare_groups(rows, which, cfg.fdr); });
      emit(cfg.out_dir / ("stats_" + std::string(name) + ".csv"),
           [&](std::ostream& o) { write_group_diff_csv(o, table); });
      const std::string title = which == Comparison::RES ? "resolving (a) vs other tweets (b)"
                                                         : "resolving tweets: falsified (a) vs verified (b) claims";
      emit(cfg.out_dir / ("stats_" + std::string(name) + ".txt"),
           [&](std::ostream& o) { write_group_diff_text(o, table, title); });
    }
  }

  if (cfg.plot) {
    stage("plot", [&] {
      const auto variable = parse_variable(cfg.plot_variable);
      if (!variable) throw Error("unknown variable '" + cfg.plot_variable + "'");
      std::vector<const Claim*> claims;
      if (cfg.plot_claims.empty()) {
        for (const auto& c : corpus.claims) {
          if (c.resolved()) claims.push_back(&c);
        }
      } else {
        for (const auto& id : cfg.plot_claims) {
          const Claim* c = corpus.find(id);
          if (!c) throw Error("unknown claim '" + id + "'");
          claims.push_back(c);
        }
      }
      for (const Claim* c : claims) {
        const auto points = claim_plot_points(*c, rows, *variable, cfg.bin_width);
        const auto base = cfg.out_dir / "plots" / (c->id + "_" + cfg.plot_variable);
        emit(fs::path(base.string() + ".svg"),
             [&](std::ostream& o) { o << render_timeline_svg(points, c->id, cfg.plot_variable); });
        emit(fs::path(base.string() + ".csv"), [&](std::ostream& o) { write_plot_csv(o, points); });
      }
      return 0;
    });
  }
  return result;
}

}  // namespace rumorlens
