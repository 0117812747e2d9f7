#pragma once

// Rule-based style metrics: moving-average type-token ratio, word repetition
// against a reference poem, and corpus frequency profiles compared by cosine
// similarity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "poemetric/error.hpp"
#include "poemetric/text.hpp"

namespace poemetric {

inline constexpr std::size_t kDefaultMattrWindow = 50;

class StopwordList {
 public:
  StopwordList(std::string version, std::unordered_set<std::string> words)
      : version_(std::move(version)), words_(std::move(words)) {}

  // Newline-delimited word file; blank lines and '#' comments skipped.
  static StopwordList load(std::istream& in, std::string version) {
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
      auto w = text::trim(line);
      if (w.empty() || w.front() == '#') continue;
      words.insert(text::to_lower(w));
    }
    return StopwordList(std::move(version), std::move(words));
  }

  // The list shipped as data/stopwords_en_v1.txt.
  static const StopwordList& builtin() {
    static const StopwordList list = [] {
      static constexpr std::string_view kWords =
          "a about above after again against all am an and any are as at be because "
          "been before being below between both but by can could did do does doing "
          "down during each even ever every few for from further had has have "
          "having he her here hers herself him himself his how i if in into is it "
          "its itself just let like may me might more most much must my myself no "
          "nor not now o of off on once only or other our ours ourselves out over "
          "own same shall she should so some such than that the thee their theirs "
          "them themselves then there these they thine this those thou though thus "
          "thy till to too under until up upon us very was we were what when where "
          "which while who whom whose why will with would ye yet you your yours "
          "yourself yourselves";
      std::unordered_set<std::string> words;
      std::size_t start = 0;
      while (start < kWords.size()) {
        auto end = kWords.find(' ', start);
        if (end == std::string_view::npos) end = kWords.size();
        if (end > start) words.emplace(kWords.substr(start, end - start));
        start = end + 1;
      }
      return StopwordList("en-v1", std::move(words));
    }();
    return list;
  }

  bool contains(const std::string& lower_word) const { return words_.count(lower_word) > 0; }
  const std::string& version() const noexcept { return version_; }
  std::size_t size() const noexcept { return words_.size(); }
  const std::unordered_set<std::string>& words() const noexcept { return words_; }

 private:
  std::string version_;
  std::unordered_set<std::string> words_;
};

// Word tokens of a poem, case-folded with punctuation stripped, and the
// subsequence that is not a stopword.
struct TokenStream {
  std::vector<std::string> tokens;
  std::vector<std::string> content_tokens;
};

inline TokenStream make_token_stream(std::string_view poem,
                                     const StopwordList& stopwords = StopwordList::builtin()) {
  TokenStream s;
  for (const auto& line : text::split_lines(poem))
    for (auto& t : text::word_tokens(line)) s.tokens.push_back(text::to_lower(t));
  for (const auto& t : s.tokens)
    if (!stopwords.contains(t)) s.content_tokens.push_back(t);
  return s;
}

// Mean type-token ratio over every contiguous window of `window` tokens;
// plain TTR when the stream is no longer than the window.
inline double mattr(std::span<const std::string> tokens, std::size_t window) {
  if (tokens.empty()) throw InvalidArgument("mattr: empty token stream");
  if (window < 1) throw InvalidArgument("mattr: window must be at least 1");
  if (tokens.size() <= window) {
    std::unordered_set<std::string_view> types(tokens.begin(), tokens.end());
    return static_cast<double>(types.size()) / static_cast<double>(tokens.size());
  }
  // Sliding window with running type counts.
  std::unordered_map<std::string_view, std::size_t> counts;
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < window; ++i)
    if (counts[tokens[i]]++ == 0) ++distinct;
  double sum = static_cast<double>(distinct);
  const std::size_t windows = tokens.size() - window + 1;
  for (std::size_t start = 1; start < windows; ++start) {
    if (--counts[tokens[start - 1]] == 0) --distinct;
    if (counts[tokens[start + window - 1]]++ == 0) ++distinct;
    sum += static_cast<double>(distinct);
  }
  return sum / (static_cast<double>(windows) * static_cast<double>(window));
}

inline double mattr(const TokenStream& stream, std::size_t window = kDefaultMattrWindow) {
  return mattr(stream.tokens, window);
}

// Share of the candidate's distinct content words that also occur in the
// reference.
inline double repetition_rate(const TokenStream& candidate, const TokenStream& reference) {
  const std::unordered_set<std::string> cand(candidate.content_tokens.begin(),
                                             candidate.content_tokens.end());
  if (cand.empty()) throw InvalidArgument("repetition_rate: candidate has no content words");
  const std::unordered_set<std::string> ref(reference.content_tokens.begin(),
                                            reference.content_tokens.end());
  std::size_t shared = 0;
  for (const auto& w : cand) shared += ref.count(w);
  return static_cast<double>(shared) / static_cast<double>(cand.size());
}

enum class ProfileBasis { all, content, opening, imagery };

inline std::string_view to_string(ProfileBasis b) {
  switch (b) {
    case ProfileBasis::all: return "all";
    case ProfileBasis::content: return "content";
    case ProfileBasis::opening: return "opening-words";
    case ProfileBasis::imagery: return "imagery";
  }
  return "unknown";
}

struct FrequencyProfile {
  std::map<std::string, std::size_t> counts;
  ProfileBasis basis = ProfileBasis::all;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [_, c] : counts) t += c;
    return t;
  }

  bool empty() const noexcept { return counts.empty(); }

  // Count merging is associative, so per-poem profiles can be built in
  // parallel and folded in any order.
  void merge(const FrequencyProfile& other) {
    for (const auto& [w, c] : other.counts) counts[w] += c;
  }

  // Most frequent words, ties broken alphabetically.
  std::vector<std::pair<std::string, std::size_t>> top(std::size_t n) const {
    std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
    std::stable_sort(v.begin(), v.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (v.size() > n) v.resize(n);
    return v;
  }
};

inline FrequencyProfile frequency_profile(std::span<const TokenStream> poems, ProfileBasis basis,
                                          const std::unordered_set<std::string>* imagery = nullptr) {
  if (poems.empty()) throw InvalidArgument("frequency_profile: no poems");
  if (basis == ProfileBasis::imagery && imagery == nullptr)
    throw InvalidArgument("frequency_profile: imagery basis needs an imagery lexicon");
  FrequencyProfile p;
  p.basis = basis;
  for (const auto& poem : poems) {
    switch (basis) {
      case ProfileBasis::all:
        for (const auto& t : poem.tokens) ++p.counts[t];
        break;
      case ProfileBasis::content:
        for (const auto& t : poem.content_tokens) ++p.counts[t];
        break;
      case ProfileBasis::opening:
        if (!poem.tokens.empty()) ++p.counts[poem.tokens.front()];
        break;
      case ProfileBasis::imagery:
        for (const auto& t : poem.tokens)
          if (imagery->count(t)) ++p.counts[t];
        break;
    }
  }
  return p;
}

// Cosine of the two count vectors over their union vocabulary.
inline double cosine_similarity(const FrequencyProfile& a, const FrequencyProfile& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [w, c] : a.counts) {
    const double x = static_cast<double>(c);
    na += x * x;
    if (auto it = b.counts.find(w); it != b.counts.end()) dot += x * static_cast<double>(it->second);
  }
  for (const auto& [_, c] : b.counts) nb += static_cast<double>(c) * static_cast<double>(c);
  if (na == 0.0 || nb == 0.0) throw InvalidArgument("cosine_similarity: zero-vector profile");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline std::unordered_set<std::string> load_word_list(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto w = text::trim(line);
    if (!w.empty() && w.front() != '#') words.insert(text::to_lower(w));
  }
  return words;
}

}  // namespace poemetric
