#pragma once

// English Porter2 ("Snowball English") suffix stripping.
//
// The region bookkeeping follows the widely deployed string-region variant
// (R1/R2 carried as suffix strings and trimmed in lockstep with the word), so
// stems agree token-for-token with the common Python implementation.

#include <algorithm>
#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <utility>

namespace rumorlens {

namespace porter2_detail {

inline bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Python-style s[:-k]; empty when k exceeds the length.
inline std::string chop(const std::string& s, std::size_t k) {
  return s.size() >= k ? s.substr(0, s.size() - k) : std::string{};
}

inline std::string replace_suffix(const std::string& s, std::size_t k, std::string_view repl) {
  return chop(s, k) + std::string(repl);
}

// Region update used by most replacement rules: keep the region aligned when
// it covers the suffix, otherwise collapse it to `fallback`.
inline std::string region_replace(const std::string& region, std::string_view suffix,
                                  std::string_view repl, std::string_view fallback = {}) {
  if (region.size() >= suffix.size()) return replace_suffix(region, suffix.size(), repl);
  return std::string(fallback);
}

inline std::size_t codepoint_count(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

inline std::string normalize_apostrophes(std::string word) {
  static constexpr std::array<std::string_view, 3> kQuotes = {"\xE2\x80\x99", "\xE2\x80\x98",
                                                              "\xE2\x80\x9B"};
  for (auto q : kQuotes) {
    for (std::size_t pos = word.find(q); pos != std::string::npos; pos = word.find(q, pos)) {
      word.replace(pos, q.size(), "'");
    }
  }
  return word;
}

inline std::pair<std::string, std::string> standard_regions(const std::string& word) {
  std::string r1, r2;
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (!is_vowel(word[i]) && is_vowel(word[i - 1])) {
      r1 = word.substr(i + 1);
      break;
    }
  }
  for (std::size_t i = 1; i < r1.size(); ++i) {
    if (!is_vowel(r1[i]) && is_vowel(r1[i - 1])) {
      r2 = r1.substr(i + 1);
      break;
    }
  }
  return {r1, r2};
}

inline const std::string* special_word(std::string_view word) {
  static const std::array<std::pair<std::string_view, std::string>, 39> kSpecial = {{
      {"skis", "ski"},         {"skies", "sky"},        {"dying", "die"},
      {"lying", "lie"},        {"tying", "tie"},        {"idly", "idl"},
      {"gently", "gentl"},     {"ugly", "ugli"},        {"early", "earli"},
      {"only", "onli"},        {"singly", "singl"},     {"sky", "sky"},
      {"news", "news"},        {"howe", "howe"},        {"atlas", "atlas"},
      {"cosmos", "cosmos"},    {"bias", "bias"},        {"andes", "andes"},
      {"inning", "inning"},    {"innings", "inning"},   {"outing", "outing"},
      {"outings", "outing"},   {"canning", "canning"},  {"cannings", "canning"},
      {"herring", "herring"},  {"herrings", "herring"}, {"earring", "earring"},
      {"earrings", "earring"}, {"proceed", "proceed"},  {"proceeds", "proceed"},
      {"proceeded", "proceed"}, {"proceeding", "proceed"}, {"exceed", "exceed"},
      {"exceeds", "exceed"},   {"exceeded", "exceed"},  {"exceeding", "exceed"},
      {"succeed", "succeed"},  {"succeeds", "succeed"}, {"succeeded", "succeed"},
  }};
  static const std::string kSucceeding = "succeed";
  if (word == "succeeding") return &kSucceeding;
  for (const auto& [from, to] : kSpecial) {
    if (from == word) return &to;
  }
  return nullptr;
}

inline bool contains_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_vowel);
}

}  // namespace porter2_detail

/// Porter2 stem of a lowercase token. Tokens of one or two characters and
/// tokens without letters (e.g. "?") come back unchanged.
inline std::string stem(std::string_view token) {
  using namespace porter2_detail;

  std::string word(token);
  if (codepoint_count(word) <= 2) return word;
  if (const auto* special = special_word(word)) return *special;

  word = normalize_apostrophes(std::move(word));
  if (!word.empty() && word.front() == '\'') word.erase(0, 1);
  if (!word.empty() && word.front() == 'y') word.front() = 'Y';
  for (std::size_t i = 1; i < word.size(); ++i) {
    if (is_vowel(word[i - 1]) && word[i] == 'y') word[i] = 'Y';
  }

  std::string r1, r2;
  if (word.starts_with("gener") || word.starts_with("commun") || word.starts_with("arsen")) {
    r1 = word.substr(word.starts_with("commun") ? 6 : 5);
    for (std::size_t i = 1; i < r1.size(); ++i) {
      if (!is_vowel(r1[i]) && is_vowel(r1[i - 1])) {
        r2 = r1.substr(i + 1);
        break;
      }
    }
  } else {
    std::tie(r1, r2) = standard_regions(word);
  }

  auto drop = [&](std::size_t k) {
    word = chop(word, k);
    r1 = chop(r1, k);
    r2 = chop(r2, k);
  };

  // Step 0: possessives.
  for (std::string_view suffix : {"'s'", "'s", "'"}) {
    if (ends_with(word, suffix)) {
      drop(suffix.size());
      break;
    }
  }

  // Step 1a: plurals.
  for (std::string_view suffix : {"sses", "ied", "ies", "us", "ss", "s"}) {
    if (!ends_with(word, suffix)) continue;
    if (suffix == "sses") {
      drop(2);
    } else if (suffix == "ied" || suffix == "ies") {
      drop(word.size() - suffix.size() > 1 ? 2 : 1);
    } else if (suffix == "s") {
      if (contains_vowel(std::string_view(word).substr(0, word.size() >= 2 ? word.size() - 2 : 0))) {
        drop(1);
      }
    }
    break;
  }

  // Step 1b: -ed, -ing and friends.
  for (std::string_view suffix : {"eedly", "ingly", "edly", "eed", "ing", "ed"}) {
    if (!ends_with(word, suffix)) continue;
    if (suffix == "eed" || suffix == "eedly") {
      if (ends_with(r1, suffix)) {
        word = replace_suffix(word, suffix.size(), "ee");
        r1 = region_replace(r1, suffix, "ee");
        r2 = region_replace(r2, suffix, "ee");
      }
    } else if (contains_vowel(std::string_view(word).substr(0, word.size() - suffix.size()))) {
      drop(suffix.size());
      if (ends_with(word, "at") || ends_with(word, "bl") || ends_with(word, "iz")) {
        word += 'e';
        r1 += 'e';
        if (word.size() > 5 || r1.size() >= 3) r2 += 'e';
      } else if (word.size() >= 2 && word[word.size() - 1] == word[word.size() - 2] &&
                 std::string_view("bdfgmnprt").find(word.back()) != std::string_view::npos) {
        drop(1);
      } else if (r1.empty() &&
                 ((word.size() >= 3 && !is_vowel(word[word.size() - 1]) &&
                   std::string_view("wxY").find(word.back()) == std::string_view::npos &&
                   is_vowel(word[word.size() - 2]) && !is_vowel(word[word.size() - 3])) ||
                  (word.size() == 2 && is_vowel(word[0]) && !is_vowel(word[1])))) {
        word += 'e';
        if (!r1.empty()) r1 += 'e';
        if (!r2.empty()) r2 += 'e';
      }
    }
    break;
  }

  // Step 1c: terminal y.
  if (word.size() > 2 && (word.back() == 'y' || word.back() == 'Y') &&
      !is_vowel(word[word.size() - 2])) {
    word.back() = 'i';
    r1 = r1.empty() ? std::string{} : chop(r1, 1) + "i";
    r2 = r2.empty() ? std::string{} : chop(r2, 1) + "i";
  }

  // Step 2.
  static constexpr std::array<std::string_view, 24> kStep2 = {
      "ization", "ational", "fulness", "ousness", "iveness", "tional", "biliti", "lessli",
      "entli",   "ation",   "alism",   "aliti",   "ousli",   "iviti",  "fulli",  "enci",
      "anci",    "abli",    "izer",    "ator",    "alli",    "bli",    "ogi",    "li"};
  for (std::string_view suffix : kStep2) {
    if (!ends_with(word, suffix)) continue;
    if (ends_with(r1, suffix)) {
      if (suffix == "tional" || suffix == "entli" || suffix == "fulli" || suffix == "lessli") {
        drop(2);
      } else if (suffix == "enci" || suffix == "anci" || suffix == "abli") {
        word = chop(word, 1) + "e";
        r1 = r1.empty() ? std::string{} : chop(r1, 1) + "e";
        r2 = r2.empty() ? std::string{} : chop(r2, 1) + "e";
      } else if (suffix == "izer" || suffix == "ization") {
        word = replace_suffix(word, suffix.size(), "ize");
        r1 = region_replace(r1, suffix, "ize");
        r2 = region_replace(r2, suffix, "ize");
      } else if (suffix == "ational" || suffix == "ation" || suffix == "ator") {
        word = replace_suffix(word, suffix.size(), "ate");
        r1 = region_replace(r1, suffix, "ate");
        r2 = region_replace(r2, suffix, "ate", "e");
      } else if (suffix == "alism" || suffix == "aliti" || suffix == "alli") {
        word = replace_suffix(word, suffix.size(), "al");
        r1 = region_replace(r1, suffix, "al");
        r2 = region_replace(r2, suffix, "al");
      } else if (suffix == "fulness") {
        drop(4);
      } else if (suffix == "ousli" || suffix == "ousness") {
        word = replace_suffix(word, suffix.size(), "ous");
        r1 = region_replace(r1, suffix, "ous");
        r2 = region_replace(r2, suffix, "ous");
      } else if (suffix == "iveness" || suffix == "iviti") {
        word = replace_suffix(word, suffix.size(), "ive");
        r1 = region_replace(r1, suffix, "ive");
        r2 = region_replace(r2, suffix, "ive", "e");
      } else if (suffix == "biliti" || suffix == "bli") {
        word = replace_suffix(word, suffix.size(), "ble");
        r1 = region_replace(r1, suffix, "ble");
        r2 = region_replace(r2, suffix, "ble");
      } else if (suffix == "ogi" && word.size() >= 4 && word[word.size() - 4] == 'l') {
        drop(1);
      } else if (suffix == "li" && word.size() >= 3 &&
                 std::string_view("cdeghkmnrt").find(word[word.size() - 3]) !=
                     std::string_view::npos) {
        drop(2);
      }
    }
    break;
  }

  // Step 3.
  static constexpr std::array<std::string_view, 9> kStep3 = {
      "ational", "tional", "alize", "icate", "iciti", "ative", "ical", "ness", "ful"};
  for (std::string_view suffix : kStep3) {
    if (!ends_with(word, suffix)) continue;
    if (ends_with(r1, suffix)) {
      if (suffix == "tional") {
        drop(2);
      } else if (suffix == "ational") {
        word = replace_suffix(word, suffix.size(), "ate");
        r1 = region_replace(r1, suffix, "ate");
        r2 = region_replace(r2, suffix, "ate");
      } else if (suffix == "alize") {
        drop(3);
      } else if (suffix == "icate" || suffix == "iciti" || suffix == "ical") {
        word = replace_suffix(word, suffix.size(), "ic");
        r1 = region_replace(r1, suffix, "ic");
        r2 = region_replace(r2, suffix, "ic");
      } else if (suffix == "ful" || suffix == "ness") {
        drop(suffix.size());
      } else if (suffix == "ative" && ends_with(r2, suffix)) {
        drop(5);
      }
    }
    break;
  }

  // Step 4.
  static constexpr std::array<std::string_view, 18> kStep4 = {
      "ement", "ance", "ence", "able", "ible", "ment", "ant", "ent", "ism",
      "ate",   "iti",  "ous",  "ive",  "ize",  "ion",  "al",  "er",  "ic"};
  for (std::string_view suffix : kStep4) {
    if (!ends_with(word, suffix)) continue;
    if (ends_with(r2, suffix)) {
      if (suffix == "ion") {
        if (word.size() >= 4 && (word[word.size() - 4] == 's' || word[word.size() - 4] == 't')) {
          drop(3);
        }
      } else {
        drop(suffix.size());
      }
    }
    break;
  }

  // Step 5.
  if (ends_with(r2, "l") && word.size() >= 2 && word[word.size() - 2] == 'l') {
    word.pop_back();
  } else if (ends_with(r2, "e")) {
    word.pop_back();
  } else if (ends_with(r1, "e")) {
    const std::size_t n = word.size();
    if (n >= 4 && (is_vowel(word[n - 2]) ||
                   std::string_view("wxY").find(word[n - 2]) != std::string_view::npos ||
                   !is_vowel(word[n - 3]) || is_vowel(word[n - 4]))) {
      word.pop_back();
    }
  }

  std::replace(word.begin(), word.end(), 'Y', 'y');
  return word;
}

}  // namespace rumorlens
