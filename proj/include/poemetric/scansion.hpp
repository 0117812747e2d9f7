#pragma once

// Line scansion over the three-symbol alphabet {u, S, *} and meter-template
// matching.

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poemetric/error.hpp"
#include "poemetric/lexicon.hpp"
#include "poemetric/text.hpp"

namespace poemetric {

inline constexpr char kUnstressed = 'u';
inline constexpr char kStressed = 'S';
inline constexpr char kUnknownStress = '*';

// Sequence over {u, S, *}.
class StressPattern {
 public:
  StressPattern() = default;
  explicit StressPattern(std::string symbols) : symbols_(std::move(symbols)) {
    for (char c : symbols_)
      if (c != kUnstressed && c != kStressed && c != kUnknownStress)
        throw InvalidArgument("invalid stress symbol '" + std::string(1, c) +
                              "' in pattern '" + symbols_ + "'");
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  char operator[](std::size_t i) const { return symbols_[i]; }
  const std::string& str() const noexcept { return symbols_; }

  friend bool operator==(const StressPattern&, const StressPattern&) = default;

 private:
  std::string symbols_;
};

// A meter: one {u,S} pattern per line, cycled through the poem. Most meters
// have a single line pattern; common meter alternates 8 and 6 syllables.
struct MeterTemplate {
  std::string name;
  std::vector<StressPattern> line_patterns;

  const StressPattern& pattern() const { return line_patterns.front(); }
  std::size_t length() const { return pattern().size(); }
  const StressPattern& for_line(std::size_t line_index) const {
    return line_patterns[line_index % line_patterns.size()];
  }
};

struct LineScansion {
  std::size_t line_index = 0;
  std::vector<std::string> tokens;
  // Pattern from each token's first dictionary variant.
  StressPattern pattern;
  // Distinct per-token patterns across dictionary variants, primary first.
  std::vector<std::vector<std::string>> token_alternatives;
  // Rhyme feet of the last token's variants, deduplicated, in variant order.
  // Empty when the last word has no vowel phoneme, is unknown, or the line is
  // empty.
  std::vector<RhymeFoot> end_feet;

  bool empty() const noexcept { return pattern.empty(); }
  bool has_end_foot() const noexcept { return !end_feet.empty(); }
};

namespace detail {

// Stress symbols for one dictionary pronunciation. Monosyllables are '*':
// their stress depends on context.
inline std::string stress_symbols(const Pronunciation& pron) {
  if (pron.syllable_count() == 1) return std::string(1, kUnknownStress);
  std::string out;
  for (int s : pron.stresses()) out += s == 0 ? kUnstressed : kStressed;
  return out;
}

}  // namespace detail

inline LineScansion scan_line(std::string_view line, const PronouncingLexicon& lex,
                              std::size_t line_index = 0) {
  LineScansion scan;
  scan.line_index = line_index;
  scan.tokens = text::word_tokens(line);
  std::string primary;
  for (const auto& token : scan.tokens) {
    std::vector<std::string> alternatives;
    const auto prons = lookup(lex, token);
    for (const auto& pron : prons) {
      std::string symbols = detail::stress_symbols(pron);
      if (std::find(alternatives.begin(), alternatives.end(), symbols) ==
          alternatives.end())
        alternatives.push_back(std::move(symbols));
    }
    if (alternatives.empty())
      alternatives.push_back(fallback_syllabify(token).stress_pattern);
    primary += alternatives.front();
    scan.token_alternatives.push_back(std::move(alternatives));
  }
  scan.pattern = StressPattern(std::move(primary));

  if (!scan.tokens.empty()) {
    for (const auto& pron : lookup(lex, scan.tokens.back())) {
      if (pron.vowel_count() == 0) continue;
      RhymeFoot foot = rhyme_foot_of(pron);
      if (std::find(scan.end_feet.begin(), scan.end_feet.end(), foot) ==
          scan.end_feet.end())
        scan.end_feet.push_back(std::move(foot));
    }
  }
  return scan;
}

namespace detail {

inline std::string canonical_meter_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char c : text::trim(name)) {
    if (text::is_space(c) || c == '-' || c == '_') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

inline std::string repeat_foot(std::string_view foot, std::size_t count) {
  std::string out;
  for (std::size_t i = 0; i < count; ++i) out += foot;
  return out;
}

inline const std::map<std::string, std::vector<std::string>>& meter_registry() {
  static const std::map<std::string, std::vector<std::string>> registry = [] {
    std::map<std::string, std::vector<std::string>> r;
    const std::pair<const char*, std::size_t> counts[] = {
        {"monometer", 1}, {"dimeter", 2},   {"trimeter", 3},
        {"tetrameter", 4}, {"pentameter", 5}, {"hexameter", 6}};
    const std::pair<const char*, const char*> feet[] = {
        {"iambic", "uS"}, {"trochaic", "Su"}, {"anapestic", "uuS"}, {"dactylic", "Suu"}};
    for (const auto& [foot_name, foot] : feet)
      for (const auto& [count_name, n] : counts)
        r[std::string(foot_name) + " " + count_name] = {repeat_foot(foot, n)};
    r["common meter"] = {repeat_foot("uS", 4), repeat_foot("uS", 3)};
    r["ballad meter"] = r["common meter"];
    r["alexandrine"] = r["iambic hexameter"];
    return r;
  }();
  return registry;
}

inline bool is_literal_pattern(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c == kUnstressed || c == kStressed || c == '/';
  });
}

}  // namespace detail

inline std::vector<std::string> meter_registry_names() {
  std::vector<std::string> names;
  for (const auto& [name, _] : detail::meter_registry()) names.push_back(name);
  return names;
}

// Resolves a registry name ("iambic pentameter") or a literal {u,S} pattern
// ("uSuSuSuSuS"). Literals may alternate per line with '/' separators
// ("uSuSuSuS/uSuSuS").
inline MeterTemplate expected_pattern(std::string_view meter_name_or_literal) {
  const std::string_view raw = text::trim(meter_name_or_literal);
  const auto& registry = detail::meter_registry();
  if (auto it = registry.find(detail::canonical_meter_name(raw)); it != registry.end()) {
    MeterTemplate t{it->first, {}};
    for (const auto& p : it->second) t.line_patterns.emplace_back(p);
    return t;
  }
  if (detail::is_literal_pattern(raw)) {
    MeterTemplate t{std::string(raw), {}};
    for (const auto& part : text::split_on(raw, '/')) {
      if (part.empty()) throw InvalidArgument("empty segment in meter literal '" + std::string(raw) + "'");
      t.line_patterns.emplace_back(part);
    }
    return t;
  }
  std::string known;
  for (const auto& name : meter_registry_names()) known += (known.empty() ? "" : ", ") + name;
  throw InvalidArgument("unknown meter '" + std::string(raw) +
                        "'; expected a {u,S} literal or one of: " + known);
}

struct MeterMatch {
  bool matched = false;
  double agreement = 0.0;
};

// Share of the first min(len) positions where the scanned symbol is '*' or
// equals the template symbol. 0 when nothing can be compared.
inline double pattern_agreement(std::string_view scanned, const StressPattern& tmpl) {
  const std::size_t n = std::min(scanned.size(), tmpl.size());
  if (n == 0) return 0.0;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (scanned[i] == kUnknownStress || scanned[i] == tmpl[i]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(n);
}

// A line matches when its syllable count is within one of the template
// length and the positional agreement reaches `min_agreement`. Every
// combination of dictionary variants is tried (up to a cap); the best one is
// reported.
inline MeterMatch line_matches_meter(const LineScansion& scansion,
                                     const MeterTemplate& tmpl,
                                     double min_agreement = 0.8) {
  constexpr std::size_t kMaxCombinations = 4096;
  const StressPattern& target = tmpl.for_line(scansion.line_index);
  if (target.empty()) throw InvalidArgument("meter template is empty");

  auto judge = [&](const std::string& candidate) {
    MeterMatch m;
    m.agreement = pattern_agreement(candidate, target);
    const auto diff = static_cast<long long>(candidate.size()) -
                      static_cast<long long>(target.size());
    m.matched = !candidate.empty() && diff >= -1 && diff <= 1 &&
                m.agreement >= min_agreement;
    return m;
  };

  std::size_t combinations = 1;
  for (const auto& alts : scansion.token_alternatives) {
    combinations *= alts.size();
    if (combinations > kMaxCombinations) break;
  }
  if (scansion.token_alternatives.empty() || combinations > kMaxCombinations)
    return judge(scansion.pattern.str());

  MeterMatch best;
  bool have_best = false;
  std::vector<std::size_t> choice(scansion.token_alternatives.size(), 0);
  while (true) {
    std::string candidate;
    for (std::size_t t = 0; t < choice.size(); ++t)
      candidate += scansion.token_alternatives[t][choice[t]];
    MeterMatch m = judge(candidate);
    if (!have_best || (m.matched && !best.matched) ||
        (m.matched == best.matched && m.agreement > best.agreement)) {
      best = m;
      have_best = true;
    }
    std::size_t t = 0;
    while (t < choice.size() && ++choice[t] == scansion.token_alternatives[t].size())
      choice[t++] = 0;
    if (t == choice.size()) break;
  }
  return best;
}

// Fraction of non-empty lines matching the template. Throws when every line
// is empty.
inline double meter_match_ratio(std::span<const LineScansion> lines,
                                const MeterTemplate& tmpl,
                                double min_agreement = 0.8) {
  std::size_t considered = 0;
  std::size_t matched = 0;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    ++considered;
    if (line_matches_meter(line, tmpl, min_agreement).matched) ++matched;
  }
  if (considered == 0) throw InvalidArgument("meter_match_ratio: no non-empty lines");
  return static_cast<double>(matched) / static_cast<double>(considered);
}

}  // namespace poemetric
