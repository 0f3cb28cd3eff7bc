#pragma once

// Synthetic rumour corpora with planted cue and certainty effects.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "rumorlens/corpus.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/lexicon.hpp"
#include "rumorlens/rng.hpp"
#include "rumorlens/stemmer.hpp"

namespace rumorlens {

struct SynthConfig {
  std::size_t n_claims = 40;
  std::size_t tweets_min = 10;
  std::size_t tweets_max = 60;
  double frac_false_claims = 1.0 / 3.0;
  double fcr_jump = 0.3;          // added to the knowledge+report token rate from the resolving tweet on
  double dcr_boost_false = 0.3;   // added to the doubt token rate in falsified claims
  double post_doubt_factor = 1.5; // falsified claims: doubt boost multiplier after resolution
  double certainty_link = 0.8;    // 0 = labels independent of cues
  double noise = 0.2;             // sd of the per-tweet log-normal jitter on group rates
  double base_cue_rate = 0.05;    // per group, per token
  std::size_t tokens_min = 16;
  std::size_t tokens_max = 30;
  double mean_gap_seconds = 240.0;
  double frac_annotated = 0.25;
  std::size_t annotators = 5;
  double underspecified_rate = 0.1;
  std::size_t events = 5;
  std::optional<std::uint64_t> seed;  // required
};

namespace synth_detail {

inline void require_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(name) + " must lie in [0, 1]");
}

inline void require_nonnegative(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be >= 0");
}

inline constexpr std::string_view kFiller[] = {
    "the",    "a",      "in",     "on",     "at",      "city",    "people",  "police",  "street",
    "today",  "now",    "breaking", "news", "crowd",   "near",    "station", "building", "update",
    "video",  "minute", "hour",   "after",  "before",  "we",      "they",    "this",    "that",
    "there",  "here",   "still",  "more",   "many",    "group",   "area",    "road",    "north",
    "south",  "train",  "car",    "bridge", "square",  "morning", "night",   "everyone", "wait",
};

inline constexpr std::string_view kInflections[] = {
    "confirmed", "confirms",  "clarified", "discovered", "explained", "captured", "claimed",  "claims",
    "observed",  "reported",  "reports",   "says",       "shows",     "showing",  "sources",  "photos",
    "believed",  "assumed",   "suspected", "considered", "presumed",  "accused",  "alleged",  "denied",
    "denies",    "misstated",
};

/// The cue itself plus any listed inflection that stems to the same form.
inline std::vector<std::string> surface_forms(const std::string& cue) {
  std::vector<std::string> out{cue};
  const std::string target = stem(cue);
  for (auto form : kInflections) {
    if (stem(form) == target) out.emplace_back(form);
  }
  return out;
}

struct Vocabulary {
  PerGroup<std::vector<std::string>> cues;
  std::vector<std::string> filler;
};

inline Vocabulary build_vocabulary(const Lexicon& lexicon) {
  Vocabulary v;
  for (auto g : kCueGroups) {
    for (const auto& cue : lexicon.cues(g)) {
      for (auto& form : surface_forms(cue)) v.cues[slot(g)].push_back(std::move(form));
    }
    if (v.cues[slot(g)].empty()) throw InvalidArgument("synth: lexicon group '" + std::string(to_string(g)) + "' is empty");
  }
  for (auto word : kFiller) {
    const std::string s = stem(word);
    bool clash = false;
    for (auto g : kCueGroups) clash = clash || lexicon.stems(g).count(s) > 0;
    if (!clash) v.filler.emplace_back(word);
  }
  return v;
}

inline std::string zero_pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

inline std::string render(const std::vector<std::string>& words) {
  std::string text;
  for (const auto& w : words) {
    if (w == "?") {
      text += '?';
      continue;
    }
    if (!text.empty()) text += ' ';
    text += w;
  }
  return text;
}

}  // namespace synth_detail

inline void validate(const SynthConfig& c) {
  using namespace synth_detail;
  if (!c.seed) throw InvalidArgument("synth: a seed is required");
  if (c.n_claims == 0) throw InvalidArgument("synth: n_claims must be positive");
  if (c.tweets_min < 2 || c.tweets_max < c.tweets_min) {
    throw InvalidArgument("synth: tweets_per_claim needs 2 <= min <= max");
  }
  if (c.tokens_min < 1 || c.tokens_max < c.tokens_min) throw InvalidArgument("synth: tokens needs 1 <= min <= max");
  if (c.annotators == 0) throw InvalidArgument("synth: annotators must be positive");
  if (c.events == 0) throw InvalidArgument("synth: events must be positive");
  require_probability(c.frac_false_claims, "frac_false_claims");
  require_probability(c.frac_annotated, "frac_annotated");
  require_probability(c.underspecified_rate, "underspecified_rate");
  require_probability(c.base_cue_rate * 4.0, "4 * base_cue_rate");
  require_probability(c.certainty_link, "certainty_link");
  require_nonnegative(c.fcr_jump, "fcr_jump");
  require_nonnegative(c.dcr_boost_false, "dcr_boost_false");
  require_nonnegative(c.post_doubt_factor, "post_doubt_factor");
  require_nonnegative(c.noise, "noise");
  if (!(c.mean_gap_seconds > 0.0)) throw InvalidArgument("synth: mean_gap_seconds must be positive");
}

/// Latent certainty mean of a tweet given its planted group rates.
inline double planted_certainty(const PerGroup<double>& rates, double link) {
  const double total = rates[0] + rates[1] + rates[2] + rates[3];
  if (total <= 0.0) return 0.5;
  const double k = rates[0] / total, r = rates[1] / total, b = rates[2] / total, d = rates[3] / total;
  return std::clamp(0.5 + link * 0.45 * (k + 0.5 * r - d - 0.5 * b), 0.02, 0.98);
}

inline Corpus generate(const SynthConfig& config, const Lexicon& lexicon = default_seed_lexicon()) {
  using namespace synth_detail;
  validate(config);
  const Vocabulary vocab = build_vocabulary(lexicon);
  Rng rng(*config.seed);

  const auto n_false = static_cast<std::size_t>(
      std::llround(config.frac_false_claims * static_cast<double>(config.n_claims)));
  std::vector<bool> falsified(config.n_claims, false);
  std::fill(falsified.begin(), falsified.begin() + static_cast<std::ptrdiff_t>(n_false), true);
  rng.shuffle(falsified);

  Corpus corpus;
  const std::int64_t epoch = 1'420'070'400;  // 2015-01-01
  for (std::size_t c = 0; c < config.n_claims; ++c) {
    Claim claim;
    claim.id = "claim-" + zero_pad(c + 1, 3);
    claim.event = "event-" + zero_pad(c % config.events + 1, 2);
    claim.resolution = falsified[c] ? Veracity::False : Veracity::True;
    corpus.events.insert(claim.event);

    const auto n = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(config.tweets_min),
                                                        static_cast<std::int64_t>(config.tweets_max)));
    // Resolving tweet somewhere in the middle half of the timeline.
    const auto lo = static_cast<std::int64_t>(n / 4);
    const auto hi = std::max(lo, static_cast<std::int64_t>((3 * n) / 4) - 1);
    const auto resolving = static_cast<std::size_t>(rng.between(lo, hi));

    double clock = static_cast<double>(epoch + static_cast<std::int64_t>(c) * 86'400);
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) clock += rng.exponential(config.mean_gap_seconds);
      const bool post = i >= resolving;

      PerGroup<double> rates{config.base_cue_rate, config.base_cue_rate, config.base_cue_rate,
                             config.base_cue_rate};
      if (post) {
        rates[slot(CueGroup::Knowledge)] += config.fcr_jump / 2.0;
        rates[slot(CueGroup::Report)] += config.fcr_jump / 2.0;
      }
      if (falsified[c]) {
        rates[slot(CueGroup::Doubt)] += config.dcr_boost_false * (post ? config.post_doubt_factor : 1.0);
      }
      for (double& r : rates) r *= std::exp(config.noise * rng.normal());
      const double total = rates[0] + rates[1] + rates[2] + rates[3];
      if (total > 0.95) {
        for (double& r : rates) r *= 0.95 / total;
      }

      const auto tokens = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(config.tokens_min),
                                                              static_cast<std::int64_t>(config.tokens_max)));
      std::vector<std::string> words;
      for (std::size_t k = 0; k < tokens; ++k) {
        double u = rng.uniform();
        const std::vector<std::string>* pool = &vocab.filler;
        for (auto g : kCueGroups) {
          if (u < rates[slot(g)]) {
            pool = &vocab.cues[slot(g)];
            break;
          }
          u -= rates[slot(g)];
        }
        words.push_back((*pool)[rng.index(pool->size())]);
      }
      if (!words.empty() && words.front() == "?") words.front() = vocab.filler.front();

      Tweet t;
      t.id = claim.id + "-t" + zero_pad(i + 1, 3);
      t.claim_id = claim.id;
      t.text = render(words);
      t.timestamp = static_cast<std::int64_t>(std::floor(clock));
      t.is_resolving = i == resolving;
      if (rng.bernoulli(config.frac_annotated)) {
        const double mean = planted_certainty(rates, config.certainty_link);
        std::vector<std::string> labels;
        for (std::size_t a = 0; a < config.annotators; ++a) {
          int level = 0;
          for (int trial = 0; trial < 2; ++trial) level += rng.bernoulli(mean) ? 1 : 0;
          const bool underspecified = rng.bernoulli(config.underspecified_rate);
          labels.emplace_back(underspecified ? kCertaintyLabels[3] : kCertaintyLabels[level]);
        }
        t.certainty_labels = std::move(labels);
      }
      claim.tweets.push_back(std::move(t));
    }
    normalize_claim(claim);
    corpus.claims.push_back(std::move(claim));
  }
  validate_corpus(corpus);
  return corpus;
}

}  // namespace rumorlens
