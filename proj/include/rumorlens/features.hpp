#pragma once

// Tweet-intrinsic variables: cue ratios, tweet density and timeline binning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "rumorlens/corpus.hpp"
#include "rumorlens/error.hpp"
#include "rumorlens/lexicon.hpp"

namespace rumorlens {

struct CueRatios {
  double kcr = 0.0;
  double rcr = 0.0;
  double bcr = 0.0;
  double dcr = 0.0;
  double fcr = 0.0;  // kcr + rcr

  bool operator==(const CueRatios&) const = default;
};

/// Share of each group among all matched cues; all zero for cue-free tweets.
inline CueRatios cue_ratios(const CueCounts& counts) {
  CueRatios r;
  const auto total = static_cast<double>(counts.total());
  if (total == 0.0) return r;
  r.kcr = static_cast<double>(counts.count(CueGroup::Knowledge)) / total;
  r.rcr = static_cast<double>(counts.count(CueGroup::Report)) / total;
  r.bcr = static_cast<double>(counts.count(CueGroup::Belief)) / total;
  r.dcr = static_cast<double>(counts.count(CueGroup::Doubt)) / total;
  r.fcr = std::clamp(r.kcr + r.rcr, 0.0, 1.0);
  return r;
}

inline constexpr std::int64_t kDefaultDensityWindow = 600;  // seconds
inline constexpr std::int64_t kDefaultBinWidth = 600;       // seconds

/// Tweets per minute in a window centred on `timestamp` (boundaries
/// inclusive). The window always contains the tweet itself.
inline double tweet_density(const Claim& claim, std::int64_t timestamp,
                            std::int64_t window_seconds = kDefaultDensityWindow) {
  if (window_seconds <= 0) throw InvalidArgument("density window must be positive");
  const double half = static_cast<double>(window_seconds) / 2.0;
  std::size_t in_window = 0;
  for (const auto& t : claim.tweets) {
    if (std::abs(static_cast<double>(t.timestamp - timestamp)) <= half) ++in_window;
  }
  return static_cast<double>(in_window) / (static_cast<double>(window_seconds) / 60.0);
}

inline double tweet_density(const Claim& claim, const Tweet& tweet,
                            std::int64_t window_seconds = kDefaultDensityWindow) {
  return tweet_density(claim, tweet.timestamp, window_seconds);
}

/// Densities of every claim tweet in one sweep, aligned with claim.tweets.
inline std::vector<double> claim_densities(const Claim& claim,
                                           std::int64_t window_seconds = kDefaultDensityWindow) {
  std::vector<double> out;
  out.reserve(claim.tweets.size());
  for (const auto& t : claim.tweets) out.push_back(tweet_density(claim, t, window_seconds));
  return out;
}

struct TimelineBin {
  std::int64_t bin = 0;  // 0 holds the resolving tweet
  double mean = 0.0;
  std::size_t count = 0;

  bool operator==(const TimelineBin&) const = default;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Groups per-tweet values into fixed-width bins anchored at the resolving
/// tweet's timestamp. `values` is aligned with claim.tweets.
inline std::vector<TimelineBin> bin_timeline(const Claim& claim, std::span<const double> values,
                                             std::int64_t bin_seconds = kDefaultBinWidth) {
  if (values.size() != claim.tweets.size()) {
    throw InvalidArgument("bin_timeline: values do not align with the claim's tweets");
  }
  if (bin_seconds <= 0) throw InvalidArgument("bin width must be positive");
  const auto resolving = claim.resolving_index();
  if (!resolving) throw InvalidArgument("claim '" + claim.id + "' has no resolving tweet");
  const std::int64_t origin = claim.tweets[*resolving].timestamp;

  std::map<std::int64_t, std::pair<double, std::size_t>> acc;
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto& [sum, n] = acc[floor_div(claim.tweets[i].timestamp - origin, bin_seconds)];
    sum += values[i];
    ++n;
  }
  std::vector<TimelineBin> bins;
  bins.reserve(acc.size());
  for (const auto& [bin, sn] : acc) {
    bins.push_back({bin, sn.first / static_cast<double>(sn.second), sn.second});
  }
  return bins;
}

}  // namespace rumorlens
