#pragma once

// Factuality cue lexica: tokenization, stemmed lookup and embedding-based
// extension of the four cue groups.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumorlens/error.hpp"
#include "rumorlens/stemmer.hpp"

namespace rumorlens {

enum class CueGroup : std::size_t { Knowledge = 0, Report = 1, Belief = 2, Doubt = 3 };

inline constexpr std::array<CueGroup, 4> kCueGroups = {CueGroup::Knowledge, CueGroup::Report,
                                                       CueGroup::Belief, CueGroup::Doubt};

inline std::string_view to_string(CueGroup g) {
  switch (g) {
    case CueGroup::Knowledge: return "knowledge";
    case CueGroup::Report: return "report";
    case CueGroup::Belief: return "belief";
    case CueGroup::Doubt: return "doubt";
  }
  return "knowledge";
}

inline std::optional<CueGroup> parse_cue_group(std::string_view name) {
  for (CueGroup g : kCueGroups) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

template <typename T>
using PerGroup = std::array<T, kCueGroups.size()>;

inline std::size_t slot(CueGroup g) { return static_cast<std::size_t>(g); }

// ---------------------------------------------------------------------------
// Tokenizer

namespace token_detail {

inline char32_t decode_utf8(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> char32_t {
    return i + k < s.size() ? static_cast<unsigned char>(s[i + k]) & 0x3F : 0;
  };
  char32_t cp;
  std::size_t len;
  if (b0 < 0x80) {
    cp = b0;
    len = 1;
  } else if ((b0 >> 5) == 0x6) {
    cp = ((b0 & 0x1F) << 6) | cont(1);
    len = 2;
  } else if ((b0 >> 4) == 0xE) {
    cp = ((b0 & 0x0F) << 12) | (cont(1) << 6) | cont(2);
    len = 3;
  } else if ((b0 >> 3) == 0x1E) {
    cp = ((b0 & 0x07) << 18) | (cont(1) << 12) | (cont(2) << 6) | cont(3);
    len = 4;
  } else {
    cp = 0xFFFD;
    len = 1;
  }
  i += std::min(len, s.size() - i);
  return cp;
}

// Non-ASCII code points that separate words like ASCII punctuation does.
inline bool is_unicode_separator(char32_t cp) {
  return (cp >= 0x00A0 && cp <= 0x00BF) || cp == 0x00D7 || cp == 0x00F7 ||
         (cp >= 0x2000 && cp <= 0x206F) || (cp >= 0x3000 && cp <= 0x303F) || cp == 0xFEFF;
}

inline bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019 || cp == 0x2018; }

inline bool is_url(std::string_view chunk) {
  auto lower = std::string(chunk);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower.starts_with("http://") || lower.starts_with("https://") ||
         lower.starts_with("www.");
}

}  // namespace token_detail

/// Lowercased word tokens. Hashtag and mention markers are dropped with the
/// rest of the punctuation, URLs are skipped, and every `?` is its own token.
inline std::vector<std::string> tokenize(std::string_view text) {
  using namespace token_detail;
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    const std::string_view chunk = text.substr(pos, end - pos);
    pos = end;
    if (chunk.empty() || is_url(chunk)) continue;

    std::string current;
    auto flush = [&] {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    };
    for (std::size_t i = 0; i < chunk.size();) {
      const std::size_t start = i;
      const char32_t cp = decode_utf8(chunk, i);
      if (cp == '?' || cp == 0xFF1F) {
        flush();
        tokens.emplace_back("?");
      } else if (is_apostrophe(cp)) {
        // joined: "don't" -> "dont"
      } else if (cp < 0x80) {
        if (std::isalnum(static_cast<int>(cp))) {
          current.push_back(static_cast<char>(std::tolower(static_cast<int>(cp))));
        } else {
          flush();
        }
      } else if (is_unicode_separator(cp)) {
        flush();
      } else {
        current.append(chunk.substr(start, i - start));
      }
    }
    flush();
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// Lexicon

class Lexicon {
 public:
  Lexicon() = default;

  /// Adds a single-token cue (lowercased). Throws InvalidArgument for empty or
  /// whitespace-bearing cues.
  void add(CueGroup group, std::string_view cue) {
    std::string c(cue);
    if (c.empty()) throw InvalidArgument("empty cue in group " + std::string(to_string(group)));
    for (char& ch : c) {
      if (std::isspace(static_cast<unsigned char>(ch))) {
        throw InvalidArgument("cue '" + std::string(cue) + "' is not a single token");
      }
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    stems_[slot(group)].insert(stem(c));
    cues_[slot(group)].insert(std::move(c));
  }

  const std::set<std::string>& cues(CueGroup g) const { return cues_[slot(g)]; }
  const std::set<std::string>& stems(CueGroup g) const { return stems_[slot(g)]; }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& s : cues_) n += s.size();
    return n;
  }

  bool operator==(const Lexicon&) const = default;

 private:
  PerGroup<std::set<std::string>> cues_;
  PerGroup<std::set<std::string>> stems_;
};

struct CueCounts {
  PerGroup<std::size_t> counts{};
  PerGroup<std::vector<std::string>> matched;

  std::size_t count(CueGroup g) const { return counts[slot(g)]; }
  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

/// A token hits group g when its stem is one of g's cue stems. Groups are
/// counted independently and every occurrence counts.
inline CueCounts match_tokens(const std::vector<std::string>& tokens, const Lexicon& lexicon) {
  CueCounts out;
  for (const auto& token : tokens) {
    const std::string s = stem(token);
    for (CueGroup g : kCueGroups) {
      if (lexicon.stems(g).contains(s)) {
        ++out.counts[slot(g)];
        out.matched[slot(g)].push_back(token);
      }
    }
  }
  return out;
}

inline CueCounts match_cues(std::string_view text, const Lexicon& lexicon) {
  return match_tokens(tokenize(text), lexicon);
}

// Lexicon file: `[group]` sections, one cue per line, `#` comments.

inline Lexicon read_lexicon(std::istream& in) {
  Lexicon lex;
  std::optional<CueGroup> section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '#' && (i == 0 || std::isspace(static_cast<unsigned char>(line[i - 1])))) {
        line.resize(i);
        break;
      }
    }
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    const std::string body = line.substr(first, last - first + 1);
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(line_no, "unterminated section header");
      std::string name = body.substr(1, body.size() - 2);
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      section = parse_cue_group(name);
      if (!section) throw ParseError(line_no, "unknown cue group '" + name + "'");
      continue;
    }
    if (!section) throw ParseError(line_no, "cue outside of a [group] section");
    if (body.find_first_of(" \t") != std::string::npos) {
      throw ParseError(line_no, "cue '" + body + "' is not a single token");
    }
    lex.add(*section, body);
  }
  return lex;
}

inline Lexicon read_lexicon_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file '" + path.string() + "'");
  return read_lexicon(in);
}

inline void write_lexicon(std::ostream& out, const Lexicon& lex) {
  bool first = true;
  for (CueGroup g : kCueGroups) {
    if (!first) out << '\n';
    first = false;
    out << '[' << to_string(g) << "]\n";
    for (const auto& cue : lex.cues(g)) out << cue << '\n';
  }
}

/// Built-in seed cues, a small hand-picked list per group.
inline constexpr std::string_view kDefaultSeedLexicon = R"(# built-in factuality cue seeds
[knowledge]
clarify
confirm
definitely
discover
evidence
explain
official

[report]
according
capture
claim
footage
observe
photo
report
say
show
source

[belief]
apparent
assume
believe
consider
perhaps
potential
presume
suspect

[doubt]
?
accuse
allege
contrary
deny
incorrect
misstate
not
unsure
why
wrong
)";

inline Lexicon default_seed_lexicon() {
  std::istringstream in{std::string(kDefaultSeedLexicon)};
  return read_lexicon(in);
}

// ---------------------------------------------------------------------------
// Embeddings

class EmbeddingTable {
 public:
  EmbeddingTable() = default;

  void add(std::string token, std::vector<double> vec) {
    if (vec.empty()) throw InvalidArgument("embedding for '" + token + "' is empty");
    if (dim_ == 0) dim_ = vec.size();
    if (vec.size() != dim_) {
      throw InvalidArgument("embedding for '" + token + "' has dimension " +
                            std::to_string(vec.size()) + ", expected " + std::to_string(dim_));
    }
    if (index_.contains(token)) throw InvalidArgument("duplicate embedding token '" + token + "'");
    double norm = 0.0;
    for (double v : vec) norm += v * v;
    index_.emplace(token, tokens_.size());
    tokens_.push_back(std::move(token));
    norms_.push_back(std::sqrt(norm));
    values_.insert(values_.end(), vec.begin(), vec.end());
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return tokens_.empty(); }
  const std::string& token(std::size_t i) const { return tokens_[i]; }

  std::optional<std::size_t> find(std::string_view token) const {
    auto it = index_.find(std::string(token));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Cosine similarity; 0 when either vector has zero norm.
  double cosine(std::size_t a, std::size_t b) const {
    if (norms_[a] == 0.0 || norms_[b] == 0.0) return 0.0;
    double dot = 0.0;
    const double* va = &values_[a * dim_];
    const double* vb = &values_[b * dim_];
    for (std::size_t k = 0; k < dim_; ++k) dot += va[k] * vb[k];
    return dot / (norms_[a] * norms_[b]);
  }

  /// The k most similar other tokens, ties broken by vocabulary order.
  std::vector<std::size_t> nearest(std::size_t query, std::size_t k) const {
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) {
      if (i != query) scored.emplace_back(cosine(query, i), i);
    }
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                      scored.end(), [](const auto& x, const auto& y) {
                        return x.first != y.first ? x.first > y.first : x.second < y.second;
                      });
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < take; ++i) out.push_back(scored[i].second);
    return out;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> values_;
  std::vector<double> norms_;
  std::size_t dim_ = 0;
};

/// Text embeddings: "token v1 ... vd" per line, optional leading "count dim".
inline EmbeddingTable read_embeddings(std::istream& in) {
  EmbeddingTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(std::move(f));
    if (parts.empty()) continue;
    auto digits = [](const std::string& f) {
      return std::all_of(f.begin(), f.end(), [](unsigned char c) { return std::isdigit(c) != 0; });
    };
    if (line_no == 1 && parts.size() == 2 && digits(parts[0]) && digits(parts[1])) {
      continue;  // "count dim" header
    }
    if (parts.size() < 2) throw ParseError(line_no, "embedding line needs a token and values");
    std::vector<double> vec;
    vec.reserve(parts.size() - 1);
    for (std::size_t i = 1; i < parts.size(); ++i) {
      try {
        std::size_t used = 0;
        vec.push_back(std::stod(parts[i], &used));
        if (used != parts[i].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw ParseError(line_no, "bad embedding value '" + parts[i] + "'");
      }
    }
    try {
      table.add(parts[0], std::move(vec));
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

inline EmbeddingTable read_embeddings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embeddings file '" + path.string() + "'");
  return read_embeddings(in);
}

struct LexiconExtension {
  Lexicon lexicon;
  std::size_t added = 0;                  // new (group, cue) pairs
  std::vector<std::string> skipped_cues;  // seeds absent from the vocabulary
};

/// Adds the k nearest embedding neighbours of every seed cue to the cue's
/// group, keeping only purely alphabetic single tokens (lowercased).
inline LexiconExtension extend_lexicon(const Lexicon& seed, const EmbeddingTable& embeddings,
                                       std::size_t k = 3) {
  if (k < 1) throw InvalidArgument("neighbour count k must be at least 1");
  if (embeddings.empty()) throw InvalidArgument("embedding table is empty");
  LexiconExtension out{seed, 0, {}};
  for (CueGroup g : kCueGroups) {
    for (const auto& cue : seed.cues(g)) {
      const auto query = embeddings.find(cue);
      if (!query) {
        out.skipped_cues.push_back(std::string(to_string(g)) + ":" + cue);
        continue;
      }
      for (std::size_t n : embeddings.nearest(*query, k)) {
        std::string candidate = embeddings.token(n);
        const bool alphabetic =
            !candidate.empty() && std::all_of(candidate.begin(), candidate.end(), [](char c) {
              return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
            });
        if (!alphabetic) continue;
        std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (!out.lexicon.cues(g).contains(candidate)) {
          out.lexicon.add(g, candidate);
          ++out.added;
        }
      }
    }
  }
  return out;
}

}  // namespace rumorlens
