#pragma once

// CMU-format pronouncing dictionary: loading, lookup with surface-token
// normalization, a letter-based syllable fallback for unknown words, and
// rhyme-foot extraction.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "poemetric/error.hpp"
#include "poemetric/text.hpp"

namespace poemetric {

namespace arpabet {

inline constexpr std::array<std::string_view, 15> kVowels = {
    "AA", "AE", "AH", "AO", "AW", "AY", "EH", "ER",
    "EY", "IH", "IY", "OW", "OY", "UH", "UW"};

inline constexpr std::array<std::string_view, 24> kConsonants = {
    "B",  "CH", "D", "DH", "F", "G",  "HH", "JH", "K", "L", "M", "N",
    "NG", "P",  "R", "S",  "SH", "T", "TH", "V",  "W", "Y", "Z", "ZH"};

inline bool is_vowel_base(std::string_view base) {
  return std::find(kVowels.begin(), kVowels.end(), base) != kVowels.end();
}

inline bool is_consonant(std::string_view symbol) {
  return std::find(kConsonants.begin(), kConsonants.end(), symbol) !=
         kConsonants.end();
}

// True for a stress-marked vowel such as "AH0".
inline bool is_vowel(std::string_view symbol) {
  return symbol.size() == 3 && is_vowel_base(symbol.substr(0, 2)) &&
         symbol[2] >= '0' && symbol[2] <= '2';
}

// Stress digit of a vowel phoneme, -1 for consonants.
inline int stress_of(std::string_view symbol) {
  return is_vowel(symbol) ? symbol[2] - '0' : -1;
}

inline std::string strip_stress(std::string_view symbol) {
  return std::string(is_vowel(symbol) ? symbol.substr(0, 2) : symbol);
}

}  // namespace arpabet

// Phoneme sequence for one word. Vowels carry exactly one stress digit,
// consonants none; construction enforces both.
class Pronunciation {
 public:
  explicit Pronunciation(std::vector<std::string> phonemes)
      : phonemes_(std::move(phonemes)) {
    if (phonemes_.empty()) throw InvalidArgument("pronunciation has no phonemes");
    for (const auto& p : phonemes_) {
      if (arpabet::is_vowel(p) || arpabet::is_consonant(p)) continue;
      if (p.size() >= 2 && arpabet::is_vowel_base(std::string_view(p).substr(0, 2)))
        throw InvalidArgument("unparseable stress digit in phoneme '" + p + "'");
      if (!p.empty() && p.back() >= '0' && p.back() <= '9')
        throw InvalidArgument("stress digit on consonant '" + p + "'");
      throw InvalidArgument("unknown phoneme '" + p + "'");
    }
  }

  const std::vector<std::string>& phonemes() const noexcept { return phonemes_; }

  std::size_t vowel_count() const {
    return static_cast<std::size_t>(
        std::count_if(phonemes_.begin(), phonemes_.end(),
                      [](const std::string& p) { return arpabet::is_vowel(p); }));
  }

  // Vowelless entries (HMM, SHH) still occupy one syllable.
  std::size_t syllable_count() const { return std::max<std::size_t>(1, vowel_count()); }

  // Stress digits of the vowels in order.
  std::vector<int> stresses() const {
    std::vector<int> out;
    for (const auto& p : phonemes_)
      if (arpabet::is_vowel(p)) out.push_back(arpabet::stress_of(p));
    return out;
  }

  std::string str() const {
    std::string out;
    for (const auto& p : phonemes_) {
      if (!out.empty()) out += ' ';
      out += p;
    }
    return out;
  }

  friend bool operator==(const Pronunciation&, const Pronunciation&) = default;

 private:
  std::vector<std::string> phonemes_;
};

// Suffix of a pronunciation from its rhyming vowel onward, stress erased.
struct RhymeFoot {
  std::vector<std::string> phonemes;

  bool empty() const noexcept { return phonemes.empty(); }

  std::string str() const {
    std::string out;
    for (const auto& p : phonemes) {
      if (!out.empty()) out += ' ';
      out += p;
    }
    return out;
  }

  friend auto operator<=>(const RhymeFoot&, const RhymeFoot&) = default;
};

class PronouncingLexicon {
 public:
  // Appends a variant for an already-normalized key.
  void add(const std::string& key, Pronunciation pron) {
    entries_[key].push_back(std::move(pron));
    ++entry_count_;
  }

  const std::vector<Pronunciation>* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  // Number of pronunciations (well-formed entry lines) loaded.
  std::size_t entry_count() const noexcept { return entry_count_; }
  std::size_t word_count() const noexcept { return entries_.size(); }

  std::uint64_t fingerprint() const noexcept { return fingerprint_; }
  void set_fingerprint(std::uint64_t f) noexcept { fingerprint_ = f; }

  const std::unordered_map<std::string, std::vector<Pronunciation>>& entries()
      const noexcept {
    return entries_;
  }

 private:
  std::unordered_map<std::string, std::vector<Pronunciation>> entries_;
  std::size_t entry_count_ = 0;
  std::uint64_t fingerprint_ = 0;
};

namespace detail {

// "READ(1)" -> "READ". Anything other than a trailing parenthesised number is
// left alone.
inline std::string strip_variant_suffix(std::string_view word) {
  if (word.size() >= 3 && word.back() == ')') {
    auto open = word.rfind('(');
    if (open != std::string_view::npos && open > 0) {
      auto digits = word.substr(open + 1, word.size() - open - 2);
      if (!digits.empty() &&
          std::all_of(digits.begin(), digits.end(),
                      [](char c) { return c >= '0' && c <= '9'; }))
        return std::string(word.substr(0, open));
    }
  }
  return std::string(word);
}

}  // namespace detail

// Reads CMU-format text: `WORD  PH PH PH` per line, `;;;` comment lines,
// variants as `WORD(1)`. Inline `#` comments (newer cmudict releases) are
// ignored. Throws ParseError naming the line number on a malformed entry and
// on a source with no entries.
inline PronouncingLexicon load_dictionary(std::istream& source) {
  PronouncingLexicon lex;
  std::uint64_t hash = text::fnv1a("");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(source, line)) {
    ++line_no;
    hash = text::fnv1a(line, hash);
    hash = text::fnv1a("\n", hash);
    std::string_view view = line;
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    if (view.starts_with(";;;")) continue;
    if (auto hash_pos = view.find('#'); hash_pos != std::string_view::npos)
      view = view.substr(0, hash_pos);
    view = text::trim(view);
    if (view.empty()) continue;

    std::istringstream fields{std::string(view)};
    std::string word;
    fields >> word;
    std::vector<std::string> phonemes;
    for (std::string ph; fields >> ph;) phonemes.push_back(ph);
    if (phonemes.empty())
      throw ParseError("entry '" + word + "' has no phonemes", line_no);

    const std::string key = text::to_upper(detail::strip_variant_suffix(word));
    try {
      lex.add(key, Pronunciation(std::move(phonemes)));
    } catch (const InvalidArgument& e) {
      throw ParseError("entry '" + word + "': " + e.what(), line_no);
    }
  }
  if (lex.entry_count() == 0) throw ParseError("dictionary source has no entries");
  lex.set_fingerprint(hash);
  return lex;
}

inline PronouncingLexicon load_dictionary_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dictionary '" + path.string() + "'");
  return load_dictionary(in);
}

// All pronunciations of a surface token, in file order. Unknown words yield an
// empty list. Hyphenated compounds that are not entries themselves are looked
// up part by part and concatenated (every combination of part variants, up to
// kMaxCompoundVariants).
inline std::vector<Pronunciation> lookup(const PronouncingLexicon& lex,
                                         std::string_view word) {
  constexpr std::size_t kMaxCompoundVariants = 16;
  const std::string key = text::normalize_word(word);
  if (key.empty()) return {};
  if (const auto* found = lex.find(key)) return *found;
  if (key.find('-') == std::string::npos) return {};

  std::vector<std::vector<std::string>> combos = {{}};
  for (const auto& part : text::split_on(key, '-')) {
    if (part.empty()) continue;
    const auto* variants = lex.find(part);
    if (variants == nullptr) return {};
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : combos) {
      for (const auto& v : *variants) {
        if (next.size() == kMaxCompoundVariants) break;
        auto joined = prefix;
        joined.insert(joined.end(), v.phonemes().begin(), v.phonemes().end());
        next.push_back(std::move(joined));
      }
    }
    combos = std::move(next);
  }
  std::vector<Pronunciation> out;
  for (auto& c : combos)
    if (!c.empty()) out.emplace_back(std::move(c));
  return out;
}

struct FallbackSyllables {
  std::size_t syllable_count;
  std::string stress_pattern;  // all '*'
};

// Letter-based syllable estimate for words missing from the dictionary:
// maximal runs of a/e/i/o/u/y, minus one for a final silent e (not after l,
// and only when at least two runs were found), floor 1. Hyphenated parts are
// counted separately. Stress is always unknown.
inline FallbackSyllables fallback_syllabify(std::string_view word) {
  const std::string key = text::to_lower(text::normalize_word(word));
  if (!text::contains_alpha(key))
    throw InvalidArgument("cannot syllabify '" + std::string(word) + "': no letters");

  auto count_part = [](std::string_view part) -> std::size_t {
    std::string letters;
    for (char c : part)
      if (text::is_alpha(c)) letters += c;
    if (letters.empty()) return 0;
    auto is_v = [](char c) {
      return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
    };
    std::size_t groups = 0;
    bool in_group = false;
    for (char c : letters) {
      if (is_v(c)) {
        if (!in_group) ++groups;
        in_group = true;
      } else {
        in_group = false;
      }
    }
    const std::size_t n = letters.size();
    if (groups >= 2 && letters[n - 1] == 'e' && n >= 2 && letters[n - 2] != 'l')
      --groups;
    return std::max<std::size_t>(1, groups);
  };

  std::size_t total = 0;
  for (const auto& part : text::split_on(key, '-')) total += count_part(part);
  total = std::max<std::size_t>(1, total);
  return {total, std::string(total, '*')};
}

// Suffix from the last primary-stressed vowel; failing that the last
// secondary-stressed vowel; failing that the last vowel. Stress digits are
// erased. Throws when the pronunciation has no vowel.
inline RhymeFoot rhyme_foot_of(const Pronunciation& pron) {
  const auto& ph = pron.phonemes();
  auto last_with = [&](auto pred) -> std::ptrdiff_t {
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(ph.size()) - 1; i >= 0; --i)
      if (pred(ph[static_cast<std::size_t>(i)])) return i;
    return -1;
  };
  std::ptrdiff_t start =
      last_with([](const std::string& p) { return arpabet::stress_of(p) == 1; });
  if (start < 0)
    start = last_with([](const std::string& p) { return arpabet::stress_of(p) == 2; });
  if (start < 0)
    start = last_with([](const std::string& p) { return arpabet::is_vowel(p); });
  if (start < 0) throw InvalidArgument("pronunciation '" + pron.str() + "' has no vowel");

  RhymeFoot foot;
  for (auto i = static_cast<std::size_t>(start); i < ph.size(); ++i)
    foot.phonemes.push_back(arpabet::strip_stress(ph[i]));
  return foot;
}

}  // namespace poemetric
