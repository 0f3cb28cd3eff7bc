#pragma once

// Event -> claim -> tweet data model and its JSON-lines codec.
//
// Input is one tweet per line:
//   {"id", "claim_id", "event", "text", "timestamp", "resolving",
//    "resolution": "true"|"false", "certainty_labels": [...]?, "stance"?}
// Claim-level fields (event, resolution) are repeated on every tweet and must
// agree within a claim.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "rumorlens/error.hpp"

namespace rumorlens {

enum class Stance { Supporting, Denying, Questioning, Commenting };

/// Resolution value of a claim.
enum class Veracity { False, True };

inline constexpr std::string_view kCertaintyLabels[] = {"uncertain", "somewhat-certain", "certain",
                                                         "underspecified"};

inline bool is_certainty_label(std::string_view label) {
  return std::find(std::begin(kCertaintyLabels), std::end(kCertaintyLabels), label) !=
         std::end(kCertaintyLabels);
}

inline std::string_view to_string(Stance s) {
  switch (s) {
    case Stance::Supporting: return "supporting";
    case Stance::Denying: return "denying";
    case Stance::Questioning: return "questioning";
    case Stance::Commenting: return "commenting";
  }
  return "commenting";
}

inline std::optional<Stance> parse_stance(std::string_view s) {
  for (Stance v : {Stance::Supporting, Stance::Denying, Stance::Questioning, Stance::Commenting}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline std::string_view to_string(Veracity v) { return v == Veracity::True ? "true" : "false"; }

struct Tweet {
  std::string id;
  std::string claim_id;
  std::string text;
  std::int64_t timestamp = 0;  // UTC epoch seconds
  std::optional<std::vector<std::string>> certainty_labels;
  bool is_resolving = false;
  std::optional<Stance> stance;

  bool operator==(const Tweet&) const = default;
};

struct Claim {
  std::string id;
  std::string event;
  std::vector<Tweet> tweets;            // ascending (timestamp, id)
  std::optional<Veracity> resolution;   // empty only for retained unresolved claims

  bool resolved() const {
    return std::any_of(tweets.begin(), tweets.end(), [](const Tweet& t) { return t.is_resolving; });
  }

  /// Position of the resolving tweet in `tweets`.
  std::optional<std::size_t> resolving_index() const {
    for (std::size_t i = 0; i < tweets.size(); ++i) {
      if (tweets[i].is_resolving) return i;
    }
    return std::nullopt;
  }

  bool operator==(const Claim&) const = default;
};

struct Corpus {
  std::vector<Claim> claims;
  std::set<std::string> events;

  const Claim* find(std::string_view claim_id) const {
    for (const auto& c : claims) {
      if (c.id == claim_id) return &c;
    }
    return nullptr;
  }

  std::size_t tweet_count() const {
    std::size_t n = 0;
    for (const auto& c : claims) n += c.tweets.size();
    return n;
  }

  bool operator==(const Corpus&) const = default;
};

struct ParseOptions {
  /// Retain claims without a resolving tweet (feature extraction only).
  bool keep_unresolved = false;
};

struct ParseResult {
  Corpus corpus;
  std::vector<std::string> warnings;
};

struct RankedTweet {
  std::size_t rank;  // 1-based
  std::reference_wrapper<const Tweet> tweet;
};

inline bool tweet_order(const Tweet& a, const Tweet& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  return a.id < b.id;
}

/// Ranks 1..n in (timestamp, id) order; the rank is the x-axis for trend fits.
inline std::vector<RankedTweet> index_tweets(const Claim& claim) {
  std::vector<const Tweet*> order;
  order.reserve(claim.tweets.size());
  for (const auto& t : claim.tweets) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(),
                   [](const Tweet* a, const Tweet* b) { return tweet_order(*a, *b); });
  std::vector<RankedTweet> ranked;
  ranked.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) ranked.push_back({i + 1, std::cref(*order[i])});
  return ranked;
}

/// Sorts tweets and checks the claim invariants. Throws ValidationError.
inline void normalize_claim(Claim& claim) {
  std::stable_sort(claim.tweets.begin(), claim.tweets.end(), tweet_order);
  if (claim.tweets.size() < 2) {
    throw ValidationError("claim '" + claim.id + "' has " + std::to_string(claim.tweets.size()) +
                          " tweet(s); at least 2 are required");
  }
  const auto resolving = std::count_if(claim.tweets.begin(), claim.tweets.end(),
                                       [](const Tweet& t) { return t.is_resolving; });
  if (resolving > 1) {
    throw ValidationError("claim '" + claim.id + "' has " + std::to_string(resolving) +
                          " resolving tweets; exactly one is allowed");
  }
  if (resolving == 1 && !claim.resolution) {
    throw ValidationError("claim '" + claim.id + "' is resolved but has no resolution value");
  }
  for (const auto& t : claim.tweets) {
    if (t.claim_id != claim.id) {
      throw ValidationError("tweet '" + t.id + "' does not belong to claim '" + claim.id + "'");
    }
    if (t.timestamp < 0) throw ValidationError("tweet '" + t.id + "' has a negative timestamp");
    if (t.certainty_labels) {
      for (const auto& label : *t.certainty_labels) {
        if (!is_certainty_label(label)) {
          throw ValidationError("tweet '" + t.id + "' has unknown certainty label '" + label + "'");
        }
      }
    }
  }
}

/// Checks corpus-wide invariants (unique ids, event membership) and claim invariants.
inline void validate_corpus(Corpus& corpus) {
  std::unordered_set<std::string> tweet_ids;
  std::unordered_set<std::string> claim_ids;
  for (auto& claim : corpus.claims) {
    if (!claim_ids.insert(claim.id).second) {
      throw ValidationError("duplicate claim id '" + claim.id + "'");
    }
    if (!corpus.events.contains(claim.event)) {
      throw ValidationError("claim '" + claim.id + "' references unknown event '" + claim.event + "'");
    }
    normalize_claim(claim);
    for (const auto& t : claim.tweets) {
      if (!tweet_ids.insert(t.id).second) throw ValidationError("duplicate tweet id '" + t.id + "'");
    }
  }
}

namespace corpus_detail {

struct ClaimFields {
  std::string event;
  std::optional<Veracity> resolution;
  std::size_t first_line;
};

template <typename T>
T required(const nlohmann::json& j, const char* key, std::size_t line) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(line, std::string("field '") + key + "' has the wrong type");
  }
}

inline Tweet parse_tweet(const nlohmann::json& j, std::size_t line, ClaimFields& fields) {
  if (!j.is_object()) throw ParseError(line, "expected a JSON object");
  Tweet t;
  t.id = required<std::string>(j, "id", line);
  t.claim_id = required<std::string>(j, "claim_id", line);
  t.text = required<std::string>(j, "text", line);
  const auto& ts = j.find("timestamp");
  if (ts == j.end() || !ts->is_number_integer()) {
    throw ParseError(line, "field 'timestamp' must be an integer");
  }
  t.timestamp = ts->get<std::int64_t>();
  t.is_resolving = required<bool>(j, "resolving", line);
  fields.event = required<std::string>(j, "event", line);
  if (auto it = j.find("resolution"); it != j.end() && !it->is_null()) {
    if (!it->is_string() || (*it != "true" && *it != "false")) {
      throw ParseError(line, "field 'resolution' must be \"true\" or \"false\"");
    }
    fields.resolution = (*it == "true") ? Veracity::True : Veracity::False;
  }
  if (auto it = j.find("certainty_labels"); it != j.end() && !it->is_null()) {
    try {
      t.certainty_labels = it->get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      throw ParseError(line, "field 'certainty_labels' must be a list of strings");
    }
  }
  if (auto it = j.find("stance"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(line, "field 'stance' must be a string");
    t.stance = parse_stance(it->get<std::string>());
    if (!t.stance) {
      throw ValidationError("tweet '" + t.id + "' has unknown stance '" + it->get<std::string>() + "'");
    }
  }
  return t;
}

}  // namespace corpus_detail

inline ParseResult parse_corpus(std::istream& in, const ParseOptions& options = {}) {
  using corpus_detail::ClaimFields;
  std::vector<std::string> claim_order;
  std::map<std::string, Claim> claims;
  std::map<std::string, ClaimFields> fields;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    }
    ClaimFields f{{}, std::nullopt, line_no};
    Tweet t = corpus_detail::parse_tweet(j, line_no, f);

    auto [it, inserted] = fields.try_emplace(t.claim_id, f);
    if (inserted) {
      claim_order.push_back(t.claim_id);
      Claim c;
      c.id = t.claim_id;
      c.event = f.event;
      c.resolution = f.resolution;
      claims.emplace(t.claim_id, std::move(c));
    } else if (it->second.event != f.event || it->second.resolution != f.resolution) {
      throw ValidationError("claim '" + t.claim_id + "' has inconsistent claim-level fields (line " +
                            std::to_string(line_no) + " vs line " +
                            std::to_string(it->second.first_line) + ")");
    }
    claims[t.claim_id].tweets.push_back(std::move(t));
  }

  ParseResult result;
  for (const auto& id : claim_order) {
    Claim& c = claims[id];
    if (!c.resolved()) {
      if (!options.keep_unresolved) {
        result.warnings.push_back("dropping unresolved claim '" + id + "'");
        continue;
      }
      result.warnings.push_back("keeping unresolved claim '" + id + "' (excluded from training)");
    }
    result.corpus.events.insert(c.event);
    result.corpus.claims.push_back(std::move(c));
  }
  validate_corpus(result.corpus);
  return result;
}

inline ParseResult parse_corpus_file(const std::filesystem::path& path,
                                     const ParseOptions& options = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path.string() + "'");
  return parse_corpus(in, options);
}

inline nlohmann::json to_json(const Tweet& t, const Claim& claim) {
  nlohmann::json j;
  j["id"] = t.id;
  j["claim_id"] = t.claim_id;
  j["event"] = claim.event;
  j["text"] = t.text;
  j["timestamp"] = t.timestamp;
  j["resolving"] = t.is_resolving;
  if (claim.resolution) j["resolution"] = std::string(to_string(*claim.resolution));
  if (t.certainty_labels) j["certainty_labels"] = *t.certainty_labels;
  if (t.stance) j["stance"] = std::string(to_string(*t.stance));
  return j;
}

/// One JSON object per tweet, claims in corpus order, tweets in rank order.
inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& claim : corpus.claims) {
    for (const auto& t : claim.tweets) out << to_json(t, claim).dump() << '\n';
  }
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

}  // namespace rumorlens
