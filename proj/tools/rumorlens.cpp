// rumorlens command-line interface.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rumorlens/certainty.hpp"
#include "rumorlens/classify.hpp"
#include "rumorlens/corpus.hpp"
#include "rumorlens/csv.hpp"
#include "rumorlens/lexicon.hpp"
#include "rumorlens/pipeline.hpp"
#include "rumorlens/plot.hpp"
#include "rumorlens/stats.hpp"
#include "rumorlens/synth.hpp"
#include "rumorlens/trends.hpp"

namespace fs = std::filesystem;
using namespace rumorlens;

namespace {

Corpus load_corpus(const fs::path& path, bool keep_unresolved = false) {
  auto parsed = parse_corpus_file(path, ParseOptions{keep_unresolved});
  for (const auto& w : parsed.warnings) std::cerr << "warning: " << w << '\n';
  return std::move(parsed.corpus);
}

Lexicon load_lexicon(const std::string& path) {
  return path.empty() ? default_seed_lexicon() : read_lexicon_file(path);
}

GlmModel load_model(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("model file '" + path.string() + "': " + e.what());
  }
  return glm_from_json(j);
}

std::vector<FeatureVector> load_features(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open feature file '" + path.string() + "'");
  return read_feature_matrix(in);
}

/// Writes to `path`, or stdout when it is empty or "-".
template <typename Writer>
void emit(const std::string& path, Writer&& writer) {
  if (path.empty() || path == "-") {
    writer(std::cout);
  } else {
    write_file_atomic(path, writer);
  }
}

void write_json(const std::string& path, const nlohmann::json& j) {
  emit(path, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Factuality-cue and certainty analysis of rumour timelines"};
  app.set_config("--config", "", "TOML file of option values; command-line flags take precedence");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // synth ------------------------------------------------------------------
  SynthConfig synth;
  std::uint64_t synth_seed = 0;
  std::string synth_out;
  auto* cmd_synth = app.add_subcommand("synth", "Generate a synthetic corpus with planted effects");
  cmd_synth->add_option("--seed", synth_seed, "Random seed")->required();
  cmd_synth->add_option("--out", synth_out, "Output JSONL (default stdout)");
  cmd_synth->add_option("--n-claims", synth.n_claims)->capture_default_str();
  cmd_synth->add_option("--tweets-min", synth.tweets_min)->capture_default_str();
  cmd_synth->add_option("--tweets-max", synth.tweets_max)->capture_default_str();
  cmd_synth->add_option("--frac-false-claims", synth.frac_false_claims)->capture_default_str();
  cmd_synth->add_option("--fcr-jump", synth.fcr_jump)->capture_default_str();
  cmd_synth->add_option("--dcr-boost-false", synth.dcr_boost_false)->capture_default_str();
  cmd_synth->add_option("--post-doubt-factor", synth.post_doubt_factor)->capture_default_str();
  cmd_synth->add_option("--certainty-link", synth.certainty_link)->capture_default_str();
  cmd_synth->add_option("--noise", synth.noise)->capture_default_str();
  cmd_synth->add_option("--base-cue-rate", synth.base_cue_rate)->capture_default_str();
  cmd_synth->add_option("--tokens-min", synth.tokens_min)->capture_default_str();
  cmd_synth->add_option("--tokens-max", synth.tokens_max)->capture_default_str();
  cmd_synth->add_option("--mean-gap-seconds", synth.mean_gap_seconds)->capture_default_str();
  cmd_synth->add_option("--frac-annotated", synth.frac_annotated)->capture_default_str();
  cmd_synth->add_option("--annotators", synth.annotators)->capture_default_str();
  cmd_synth->add_option("--underspecified-rate", synth.underspecified_rate)->capture_default_str();
  cmd_synth->add_option("--events", synth.events)->capture_default_str();
  cmd_synth->callback([&] {
    synth.seed = synth_seed;
    const Corpus corpus = generate(synth);
    emit(synth_out, [&](std::ostream& o) { write_corpus(o, corpus); });
  });

  // parse ------------------------------------------------------------------
  std::string parse_in, parse_out;
  bool keep_unresolved = false;
  auto* cmd_parse = app.add_subcommand("parse", "Validate a corpus and write it in canonical order");
  cmd_parse->add_option("--in", parse_in, "Corpus JSONL")->required()->check(CLI::ExistingFile);
  cmd_parse->add_option("--out", parse_out, "Canonical JSONL (default stdout)");
  cmd_parse->add_flag("--keep-unresolved", keep_unresolved, "Retain claims without a resolving tweet");
  cmd_parse->callback([&] {
    const Corpus corpus = load_corpus(parse_in, keep_unresolved);
    emit(parse_out, [&](std::ostream& o) { write_corpus(o, corpus); });
    std::cerr << corpus.claims.size() << " claims, " << corpus.tweet_count() << " tweets, "
              << corpus.events.size() << " events\n";
  });

  // extend-lexicon ---------------------------------------------------------
  std::string ext_seed, ext_embeddings, ext_out;
  std::size_t ext_k = 3;
  auto* cmd_ext = app.add_subcommand("extend-lexicon", "Add nearest embedding neighbours of each seed cue");
  cmd_ext->add_option("--lexicon", ext_seed, "Seed lexicon (default: built-in seeds)");
  cmd_ext->add_option("--embeddings", ext_embeddings, "Word vectors, one 'token v1 v2 ...' per line")->required();
  cmd_ext->add_option("-k,--neighbours", ext_k, "Neighbours per cue")->capture_default_str();
  cmd_ext->add_option("--out", ext_out, "Extended lexicon (default stdout)");
  cmd_ext->callback([&] {
    if (!fs::exists(ext_embeddings)) throw Error("embeddings file '" + ext_embeddings + "' does not exist");
    const auto ext = extend_lexicon(load_lexicon(ext_seed), read_embeddings_file(ext_embeddings), ext_k);
    for (const auto& s : ext.skipped_cues) std::cerr << "warning: cue not in embeddings: " << s << '\n';
    emit(ext_out, [&](std::ostream& o) { write_lexicon(o, ext.lexicon); });
    std::cerr << "added " << ext.added << " cues\n";
  });

  // match ------------------------------------------------------------------
  std::string match_corpus, match_lexicon, match_out;
  auto* cmd_match = app.add_subcommand("match", "Per-tweet cue counts and cue ratios");
  cmd_match->add_option("--corpus", match_corpus)->required()->check(CLI::ExistingFile);
  cmd_match->add_option("--lexicon", match_lexicon, "Lexicon file (default: built-in seeds)");
  cmd_match->add_option("--out", match_out, "CSV (default stdout)");
  cmd_match->callback([&] {
    const Corpus corpus = load_corpus(match_corpus, true);
    const Lexicon lexicon = load_lexicon(match_lexicon);
    emit(match_out, [&](std::ostream& o) { write_cue_table(o, corpus, lexicon); });
  });

  // certainty --------------------------------------------------------------
  auto* cmd_cert = app.add_subcommand("certainty", "Certainty model: fit, predict, eval");
  cmd_cert->require_subcommand(1);
  std::string cert_corpus, cert_lexicon, cert_model, cert_out;
  std::size_t cert_folds = 10;
  std::uint64_t cert_seed = 0;
  auto* cert_fit = cmd_cert->add_subcommand("fit", "Fit the weighted logit GLM on labelled tweets");
  auto* cert_predict = cmd_cert->add_subcommand("predict", "Predict certainty for every tweet");
  auto* cert_eval = cmd_cert->add_subcommand("eval", "k-fold CV against the mean baseline");
  for (auto* sub : {cert_fit, cert_predict, cert_eval}) {
    sub->add_option("--corpus", cert_corpus)->required()->check(CLI::ExistingFile);
    sub->add_option("--lexicon", cert_lexicon, "Lexicon file (default: built-in seeds)");
    sub->add_option("--out", cert_out, "Output (default stdout)");
  }
  cert_predict->add_option("--model", cert_model)->required()->check(CLI::ExistingFile);
  cert_eval->add_option("--folds", cert_folds)->capture_default_str();
  cert_eval->add_option("--seed", cert_seed)->required();
  cert_fit->callback([&] {
    const Corpus corpus = load_corpus(cert_corpus, true);
    const auto data = certainty_training_data(corpus, load_lexicon(cert_lexicon));
    const GlmModel model = fit_certainty_model(data.X, data.y);
    if (!model.converged) std::cerr << "warning: IRLS did not converge\n";
    if (model.ridge) std::cerr << "warning: near-singular design, ridge applied\n";
    write_json(cert_out, to_json(model));
  });
  cert_predict->callback([&] {
    const Corpus corpus = load_corpus(cert_corpus, true);
    const Lexicon lexicon = load_lexicon(cert_lexicon);
    const GlmModel model = load_model(cert_model);
    emit(cert_out, [&](std::ostream& o) {
      write_csv_row(o, {"claim_id", "tweet_id", "predicted", "observed"});
      for (const auto& claim : corpus.claims) {
        for (const auto& t : claim.tweets) {
          std::optional<double> observed;
          if (t.certainty_labels) observed = aggregate_certainty(*t.certainty_labels);
          write_csv_row(o, {claim.id, t.id,
                            format_double(predict_certainty(model, cue_ratios(match_cues(t.text, lexicon)))),
                            observed ? format_double(*observed) : ""});
        }
      }
    });
  });
  cert_eval->callback([&] {
    const Corpus corpus = load_corpus(cert_corpus, true);
    const auto data = certainty_training_data(corpus, load_lexicon(cert_lexicon));
    const auto cv = evaluate_glm_cv(data.X, data.y, cert_folds, cert_seed);
    write_json(cert_out, {{"folds", cv.folds},
                          {"samples", data.y.size()},
                          {"rmse_mean", cv.rmse_mean},
                          {"rmse_max", cv.rmse_max},
                          {"baseline_rmse", cv.baseline_rmse},
                          {"fold_rmse", cv.fold_rmse},
                          {"fold_baseline_rmse", cv.fold_baseline_rmse},
                          {"wilcoxon_p", cv.wilcoxon_p ? nlohmann::json(*cv.wilcoxon_p) : nlohmann::json()}});
  });

  // features ---------------------------------------------------------------
  std::string feat_corpus, feat_lexicon, feat_model, feat_out;
  std::int64_t feat_window = kDefaultDensityWindow;
  auto* cmd_feat = app.add_subcommand("features", "Intrinsic variables and trend discontinuities per tweet");
  cmd_feat->add_option("--corpus", feat_corpus)->required()->check(CLI::ExistingFile);
  cmd_feat->add_option("--lexicon", feat_lexicon, "Lexicon file (default: built-in seeds)");
  cmd_feat->add_option("--model", feat_model, "Certainty model JSON")->required()->check(CLI::ExistingFile);
  cmd_feat->add_option("--density-window", feat_window, "Seconds")->capture_default_str();
  cmd_feat->add_option("--out", feat_out, "Feature CSV (default stdout)");
  cmd_feat->callback([&] {
    const Corpus corpus = load_corpus(feat_corpus, true);
    const auto rows = corpus_features(corpus, load_model(feat_model), load_lexicon(feat_lexicon), feat_window);
    emit(feat_out, [&](std::ostream& o) { write_feature_matrix(o, rows); });
  });

  // trends -----------------------------------------------------------------
  std::string trends_in, trends_claim, trends_variable = "CRT", trends_out;
  auto* cmd_trends = app.add_subcommand("trends", "Discontinuity series of one variable in one claim");
  cmd_trends->add_option("--in", trends_in, "Feature CSV")->required()->check(CLI::ExistingFile);
  cmd_trends->add_option("--claim", trends_claim)->required();
  cmd_trends->add_option("--variable", trends_variable)
      ->check(CLI::IsMember({"KCR", "RCR", "BCR", "DCR", "CRT", "DENSITY"}))
      ->capture_default_str();
  cmd_trends->add_option("--out", trends_out, "CSV (default stdout)");
  cmd_trends->callback([&] {
    const auto rows = load_features(trends_in);
    const Variable v = *parse_variable(trends_variable);
    std::vector<const FeatureVector*> claim_rows;
    for (const auto& fv : rows) {
      if (fv.claim_id == trends_claim) claim_rows.push_back(&fv);
    }
    if (claim_rows.empty()) throw Error("unknown claim '" + trends_claim + "'");
    std::sort(claim_rows.begin(), claim_rows.end(),
              [](const FeatureVector* a, const FeatureVector* b) { return a->rank < b->rank; });
    emit(trends_out, [&](std::ostream& o) {
      write_csv_row(o, {"rank", "tweet_id", "value", "delta", "reset", "rmsd_p", "rmsd_f"});
      for (const auto* fv : claim_rows) {
        const auto& f = (*fv)[v];
        write_csv_row(o, {std::to_string(fv->rank), fv->tweet_id, format_double(f.value),
                          format_double(f.disc.delta), format_double(f.disc.reset),
                          format_double(f.disc.rmsd_p), format_double(f.disc.rmsd_f)});
      }
    });
  });

  // classify ---------------------------------------------------------------
  std::string cls_in, cls_task = "res", cls_set = "cue", cls_report;
  std::size_t cls_folds = 10;
  std::uint64_t cls_seed = 0;
  int cls_rounds = 40;
  auto* cmd_cls = app.add_subcommand("classify", "Resample, boost and cross-validate one task");
  cmd_cls->add_option("--in", cls_in, "Feature CSV")->required()->check(CLI::ExistingFile);
  cmd_cls->add_option("--task", cls_task)->check(CLI::IsMember({"res", "val"}))->capture_default_str();
  cmd_cls->add_option("--features", cls_set, "Feature set")->check(CLI::IsMember({"cue", "cert"}))->capture_default_str();
  cmd_cls->add_option("--folds", cls_folds)->capture_default_str();
  cmd_cls->add_option("--rounds", cls_rounds)->capture_default_str();
  cmd_cls->add_option("--seed", cls_seed)->required();
  cmd_cls->add_option("--report", cls_report, "Report JSON (default stdout)");
  cmd_cls->callback([&] {
    const auto rows = load_features(cls_in);
    const EnsembleConfig config{cls_rounds, 2, 3, cls_seed};
    const auto result = run_task(rows, cls_task == "res" ? Task::RES : Task::VAL,
                                 cls_set == "cue" ? FeatureSet::CueSet : FeatureSet::CertSet, config, cls_folds);
    for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
    write_json(cls_report, to_json(result));
  });

  // stats ------------------------------------------------------------------
  std::string stats_in, stats_compare = "res", stats_out, stats_text;
  bool stats_by = false;
  auto* cmd_stats = app.add_subcommand("stats", "Rank-sum comparison of every feature between two groups");
  cmd_stats->add_option("--in", stats_in, "Feature CSV")->required()->check(CLI::ExistingFile);
  cmd_stats->add_option("--compare", stats_compare, "res: resolving vs other tweets; val: resolving tweets of falsified vs verified claims")
      ->check(CLI::IsMember({"res", "val"}))
      ->capture_default_str();
  cmd_stats->add_flag("--by", stats_by, "Benjamini-Yekutieli instead of Benjamini-Hochberg");
  cmd_stats->add_option("--out", stats_out, "CSV table (default stdout)");
  cmd_stats->add_option("--text", stats_text, "Also write a human-readable table here");
  cmd_stats->callback([&] {
    const auto rows = load_features(stats_in);
    const auto which = stats_compare == "res" ? Comparison::RES : Comparison::VAL;
    const auto table =
        compare_groups(rows, which, stats_by ? FdrMethod::BenjaminiYekutieli : FdrMethod::BenjaminiHochberg);
    emit(stats_out, [&](std::ostream& o) { write_group_diff_csv(o, table); });
    if (!stats_text.empty()) {
      emit(stats_text, [&](std::ostream& o) {
        write_group_diff_text(o, table, which == Comparison::RES ? "resolving (a) vs other tweets (b)"
                                                                 : "resolving tweets: falsified (a) vs verified (b) claims");
      });
    }
  });

  // plot -------------------------------------------------------------------
  std::string plot_corpus, plot_features, plot_claim, plot_variable = "CRT", plot_out;
  std::int64_t plot_bin = kDefaultBinWidth;
  auto* cmd_plot = app.add_subcommand("plot", "Binned claim timeline as SVG plus companion CSV");
  cmd_plot->add_option("--corpus", plot_corpus)->required()->check(CLI::ExistingFile);
  cmd_plot->add_option("--features", plot_features, "Feature CSV")->required()->check(CLI::ExistingFile);
  cmd_plot->add_option("--claim", plot_claim)->required();
  cmd_plot->add_option("--variable", plot_variable)
      ->check(CLI::IsMember({"KCR", "RCR", "BCR", "DCR", "CRT", "DENSITY"}))
      ->capture_default_str();
  cmd_plot->add_option("--bin-width", plot_bin, "Seconds")->capture_default_str();
  cmd_plot->add_option("--out", plot_out, "SVG path; the CSV goes next to it")->required();
  cmd_plot->callback([&] {
    const Corpus corpus = load_corpus(plot_corpus, true);
    const Claim* claim = corpus.find(plot_claim);
    if (!claim) throw Error("unknown claim '" + plot_claim + "'");
    const auto points = claim_plot_points(*claim, load_features(plot_features), *parse_variable(plot_variable), plot_bin);
    write_file_atomic(plot_out, [&](std::ostream& o) { o << render_timeline_svg(points, claim->id, plot_variable); });
    fs::path csv = plot_out;
    csv.replace_extension(".csv");
    write_file_atomic(csv, [&](std::ostream& o) { write_plot_csv(o, points); });
  });

  // pipeline ---------------------------------------------------------------
  PipelineConfig pc;
  std::string pc_corpus, pc_lexicon, pc_embeddings, pc_out = "out";
  std::uint64_t pc_seed = 0;
  bool pc_by = false, no_classify = false, no_stats = false, no_plot = false;
  auto* cmd_pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  cmd_pipe->add_option("--corpus", pc_corpus)->required();
  cmd_pipe->add_option("--lexicon", pc_lexicon, "Lexicon file (default: built-in seeds)");
  cmd_pipe->add_option("--embeddings", pc_embeddings, "Word vectors for --extend");
  cmd_pipe->add_flag("--extend", pc.extend, "Extend the lexicon from embeddings");
  cmd_pipe->add_option("-k,--neighbours", pc.neighbours)->capture_default_str();
  cmd_pipe->add_option("--out-dir", pc_out)->capture_default_str();
  cmd_pipe->add_option("--seed", pc_seed)->required();
  cmd_pipe->add_option("--folds", pc.folds)->capture_default_str();
  cmd_pipe->add_option("--rounds", pc.rounds)->capture_default_str();
  cmd_pipe->add_option("--bin-width", pc.bin_width)->capture_default_str();
  cmd_pipe->add_option("--density-window", pc.density_window)->capture_default_str();
  cmd_pipe->add_option("--plot-claim", pc.plot_claims, "Claims to plot (default: all resolved)");
  cmd_pipe->add_option("--plot-variable", pc.plot_variable)
      ->check(CLI::IsMember({"KCR", "RCR", "BCR", "DCR", "CRT", "DENSITY"}))
      ->capture_default_str();
  cmd_pipe->add_flag("--by", pc_by, "Benjamini-Yekutieli FDR");
  cmd_pipe->add_flag("--no-classify", no_classify);
  cmd_pipe->add_flag("--no-stats", no_stats);
  cmd_pipe->add_flag("--no-plot", no_plot);
  cmd_pipe->callback([&] {
    pc.corpus = pc_corpus;
    pc.lexicon = pc_lexicon;
    pc.embeddings = pc_embeddings;
    pc.out_dir = pc_out;
    pc.seed = pc_seed;
    pc.fdr = pc_by ? FdrMethod::BenjaminiYekutieli : FdrMethod::BenjaminiHochberg;
    pc.classify = !no_classify;
    pc.stats = !no_stats;
    pc.plot = !no_plot;
    const auto result = run_pipeline(pc, &std::cerr);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
