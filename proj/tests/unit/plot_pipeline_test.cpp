#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "rumorlens/pipeline.hpp"
#include "rumorlens/plot.hpp"
#include "rumorlens/synth.hpp"

using namespace rumorlens;
namespace fs = std::filesystem;

namespace {

Claim claim_at(const std::vector<std::int64_t>& stamps, std::size_t resolving) {
  Claim c;
  c.id = "c";
  c.event = "e";
  c.resolution = Veracity::True;
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    Tweet t;
    t.id = "t" + std::to_string(i);
    t.claim_id = "c";
    t.timestamp = stamps[i];
    t.is_resolving = i == resolving;
    c.tweets.push_back(t);
  }
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("rumorlens_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(FcrColor, EndpointsMidpointAndClamp) {
  EXPECT_EQ(fcr_color(0.0), "#2c7bb6");
  EXPECT_EQ(fcr_color(1.0), "#d7191c");
  EXPECT_EQ(fcr_color(0.5), "#824a69");
  EXPECT_EQ(fcr_color(-3.0), fcr_color(0.0));
  EXPECT_EQ(fcr_color(7.0), fcr_color(1.0));
}

TEST(TimelinePoints, SingleBinClaimIsOneTriangle) {
  const auto c = claim_at({120, 130, 140}, 0);
  const std::vector<double> v = {0.2, 0.4, 0.6}, fcr = {0, 0, 0};
  const auto pts = timeline_points(c, v, fcr);
  ASSERT_EQ(pts.size(), 1u);
  EXPECT_EQ(pts[0].bin, 0);
  EXPECT_TRUE(pts[0].resolving);
  EXPECT_NEAR(pts[0].mean_value, 0.4, 1e-15);
  const auto svg = render_timeline_svg(pts, "c", "CRT");
  EXPECT_EQ(svg.find("<circle"), std::string::npos);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
}

TEST(TimelinePoints, AreaProportionalToCount) {
  const auto c = claim_at({0, 700, 800, 900, 1000}, 0);
  const std::vector<double> v(5, 0.5), fcr = {1, 0, 0, 1, 1};
  const auto pts = timeline_points(c, v, fcr);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].count, 1u);
  EXPECT_EQ(pts[1].count, 4u);
  EXPECT_DOUBLE_EQ(pts[1].area / pts[0].area, 4.0);
  EXPECT_DOUBLE_EQ(pts[0].area, kUnitMarkerArea);
  EXPECT_EQ(pts[0].color, fcr_color(1.0));
  EXPECT_EQ(pts[1].color, fcr_color(0.5));
  EXPECT_FALSE(pts[1].resolving);
}

TEST(TimelineSvg, MarkersAgreeWithCsv) {
  const auto c = claim_at({0, 650, 700, 1900, -5, -900}, 0);
  const std::vector<double> v = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6}, fcr = {0, 0.2, 0.4, 0.6, 0.8, 1};
  const auto pts = timeline_points(c, v, fcr);
  std::ostringstream csv;
  write_plot_csv(csv, pts);
  const auto svg = render_timeline_svg(pts, "c", "CRT");

  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "bin,count,mean_value,mean_fcr,area,color,marker");
  const std::regex marker(R"re(<g class="marker" data-bin="(-?\d+)" data-count="(\d+)" data-mean="([^"]+)" data-fcr="([^"]+)" data-area="([^"]+)">(<polygon|<circle)[^>]*fill="(#[0-9a-f]{6})")re");
  auto it = std::sregex_iterator(svg.begin(), svg.end(), marker);
  std::size_t k = 0;
  for (; it != std::sregex_iterator(); ++it, ++k) {
    ASSERT_TRUE(std::getline(lines, line));
    const auto& m = *it;
    const std::string shape = m[6] == "<polygon" ? "triangle" : "circle";
    const std::string expected = m[1].str() + "," + m[2].str() + "," + m[3].str() + "," + m[4].str() + "," +
                                 m[5].str() + "," + m[7].str() + "," + shape;
    EXPECT_EQ(line, expected);
  }
  EXPECT_EQ(k, pts.size());
  EXPECT_EQ(k, 5u);  // bins -2, -1, 0, 1, 3
}

TEST(TimelineSvg, CircleRadiusEncodesArea) {
  const auto c = claim_at({0, 700, 701, 702}, 0);
  const std::vector<double> v(4, 0.5), fcr(4, 0.0);
  const auto svg = render_timeline_svg(timeline_points(c, v, fcr), "c", "KCR");
  const std::regex radius(R"re( r="([0-9.]+)")re");
  std::smatch m;
  ASSERT_TRUE(std::regex_search(svg, m, radius));
  EXPECT_NEAR(std::stod(m[1]), std::sqrt(3 * kUnitMarkerArea / std::numbers::pi), 1e-3);
}

TEST(TimelinePoints, SyntheticFactualityRisesAfterResolution) {
  SynthConfig cfg;
  cfg.seed = 12;
  cfg.fcr_jump = 0.4;
  const auto corpus = generate(cfg);
  const auto rows = corpus_features(corpus, GlmModel{}, default_seed_lexicon());
  double before = 0, after = 0, nb = 0, na = 0;
  for (const auto& c : corpus.claims) {
    for (const auto& p : claim_plot_points(c, rows, Variable::KCR)) {
      if (p.bin < 0) {
        before += p.mean_fcr * static_cast<double>(p.count);
        nb += static_cast<double>(p.count);
      } else if (p.bin > 0) {
        after += p.mean_fcr * static_cast<double>(p.count);
        na += static_cast<double>(p.count);
      }
    }
  }
  EXPECT_GT(after / na, before / nb);
}

TEST(ParseVariable, KnownNames) {
  EXPECT_EQ(parse_variable("CRT"), Variable::CRT);
  EXPECT_EQ(parse_variable("DENSITY"), Variable::DENSITY);
  EXPECT_FALSE(parse_variable("crt"));
}

namespace {

fs::path write_synth(const fs::path& dir, std::size_t claims) {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.n_claims = claims;
  const auto path = dir / "corpus.jsonl";
  std::ofstream(path) << serialize_corpus(generate(cfg));
  return path;
}

PipelineConfig small_run(const fs::path& corpus, const fs::path& out) {
  PipelineConfig cfg;
  cfg.corpus = corpus;
  cfg.out_dir = out;
  cfg.seed = 5;
  cfg.rounds = 10;
  cfg.plot_claims = {"claim-002", "claim-005"};
  return cfg;
}

}  // namespace

TEST(Pipeline, WritesEveryArtifactDeterministically) {
  TempDir tmp("pipeline_artifacts");
  const auto corpus = write_synth(tmp.path, 15);
  const auto first = run_pipeline(small_run(corpus, tmp.path / "a"));
  const auto second = run_pipeline(small_run(corpus, tmp.path / "b"));
  for (const char* name : {"corpus.jsonl", "lexicon.txt", "cues.csv", "certainty_model.json", "certainty_eval.json",
                           "features.csv", "report.json", "stats_res.csv", "stats_res.txt", "stats_val.csv",
                           "stats_val.txt", "plots/claim-002_CRT.svg", "plots/claim-002_CRT.csv",
                           "plots/claim-005_CRT.csv"}) {
    ASSERT_TRUE(fs::exists(tmp.path / "a" / name)) << name;
    EXPECT_EQ(slurp(tmp.path / "a" / name), slurp(tmp.path / "b" / name)) << name;
  }
  EXPECT_EQ(first.artifacts.size(), second.artifacts.size());
  const auto report = nlohmann::json::parse(slurp(tmp.path / "a" / "report.json"));
  EXPECT_EQ(report["tasks"].size(), 4u);
  EXPECT_EQ(slurp(tmp.path / "a" / "corpus.jsonl"), slurp(corpus));
  EXPECT_EQ(slurp(tmp.path / "a" / "cues.csv").substr(0, 60),
            std::string("claim_id,tweet_id,knowledge,report,belief,doubt,KCR,RCR,BCR,DCR,FCR\n").substr(0, 60));
}

TEST(Pipeline, StageErrorsNameTheStage) {
  TempDir tmp("pipeline_errors");
  const auto corpus = write_synth(tmp.path, 8);
  auto cfg = small_run(corpus, tmp.path / "out");
  cfg.classify = cfg.stats = false;

  auto missing_embeddings = cfg;
  missing_embeddings.extend = true;
  missing_embeddings.embeddings = tmp.path / "nope.vec";
  try {
    run_pipeline(missing_embeddings);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "extend-lexicon");
  }

  auto unknown_claim = cfg;
  unknown_claim.plot_claims = {"claim-999"};
  try {
    run_pipeline(unknown_claim);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "plot");
    EXPECT_NE(std::string(e.what()).find("claim-999"), std::string::npos);
  }

  auto no_corpus = cfg;
  no_corpus.corpus = tmp.path / "missing.jsonl";
  try {
    run_pipeline(no_corpus);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), "parse");
  }

  auto unseeded = small_run(corpus, tmp.path / "out");
  unseeded.seed.reset();
  EXPECT_THROW(run_pipeline(unseeded), StageError);
}

TEST(Pipeline, ExtensionWithEmbeddings) {
  TempDir tmp("pipeline_extend");
  const auto corpus = write_synth(tmp.path, 8);
  std::ofstream(tmp.path / "emb.txt") << "confirm 1 0\nverify 0.95 0.05\nnot 0 1\nnever 0.05 0.95\n";
  auto cfg = small_run(corpus, tmp.path / "out");
  cfg.classify = cfg.stats = cfg.plot = false;
  cfg.extend = true;
  cfg.neighbours = 1;
  cfg.embeddings = tmp.path / "emb.txt";
  const auto result = run_pipeline(cfg);
  const auto lex = read_lexicon_file(tmp.path / "out" / "lexicon.txt");
  EXPECT_TRUE(lex.cues(CueGroup::Knowledge).contains("verify"));
  EXPECT_TRUE(lex.cues(CueGroup::Doubt).contains("never"));
  EXPECT_FALSE(result.warnings.empty());  // most seeds are absent from the toy table
}
