#pragma once

// Rhyme-scheme inference from end-word rhyme feet, and pairwise-constraint
// scoring of an inferred scheme against a target letter pattern.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "poemetric/error.hpp"
#include "poemetric/lexicon.hpp"
#include "poemetric/scansion.hpp"

namespace poemetric {

// One rhyme class per line, numbered in first-occurrence order (0 = A).
struct RhymeScheme {
  std::vector<int> classes;
  // Exclusive end index of each stanza; the last equals classes.size().
  std::vector<std::size_t> stanza_breaks;

  std::size_t size() const noexcept { return classes.size(); }

  // A..Z, then a..z, then "[n]".
  static std::string label(int cls) {
    if (cls < 26) return std::string(1, static_cast<char>('A' + cls));
    if (cls < 52) return std::string(1, static_cast<char>('a' + cls - 26));
    return "[" + std::to_string(cls) + "]";
  }

  std::string letters() const {
    std::string out;
    for (int c : classes) out += label(c);
    return out;
  }

  // Letters with a space at every stanza break, e.g. "ABAB CDCD".
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < classes.size(); ++i) {
      if (i > 0 && std::binary_search(stanza_breaks.begin(), stanza_breaks.end(), i))
        out += ' ';
      out += label(classes[i]);
    }
    return out;
  }
};

// Perfect rhyme: identical feet. Empty feet never rhyme.
inline bool rhymes_with(const RhymeFoot& a, const RhymeFoot& b) {
  return !a.empty() && !b.empty() && a == b;
}

inline bool any_rhyme(std::span<const RhymeFoot> a, std::span<const RhymeFoot> b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (rhymes_with(x, y)) return true;
  return false;
}

namespace detail {

inline std::vector<std::size_t> stanza_breaks_from_sizes(std::span<const std::size_t> sizes,
                                                         std::size_t total) {
  std::vector<std::size_t> breaks;
  std::size_t end = 0;
  for (auto s : sizes) {
    end += s;
    breaks.push_back(end);
  }
  if (breaks.empty() || breaks.back() != total) {
    if (!sizes.empty())
      throw InvalidArgument("stanza sizes do not add up to the line count");
    breaks = {total};
  }
  return breaks;
}

}  // namespace detail

// Greedy labeling over per-line foot variants: a line joins the earliest
// class whose representative (first member) shares a rhyming variant with it;
// otherwise it opens a new class. Lines without any foot always open a new
// class. `stanza_sizes` defaults to a single stanza.
inline RhymeScheme infer_scheme_from_feet(std::span<const std::vector<RhymeFoot>> feet,
                                          std::span<const std::size_t> stanza_sizes = {}) {
  RhymeScheme scheme;
  std::vector<std::size_t> representatives;
  for (std::size_t i = 0; i < feet.size(); ++i) {
    int cls = -1;
    for (std::size_t c = 0; c < representatives.size() && !feet[i].empty(); ++c) {
      if (any_rhyme(feet[representatives[c]], feet[i])) {
        cls = static_cast<int>(c);
        break;
      }
    }
    if (cls < 0) {
      cls = static_cast<int>(representatives.size());
      representatives.push_back(i);
    }
    scheme.classes.push_back(cls);
  }
  scheme.stanza_breaks = detail::stanza_breaks_from_sizes(stanza_sizes, feet.size());
  return scheme;
}

inline RhymeScheme infer_scheme(std::span<const LineScansion> scansions,
                                std::span<const std::size_t> stanza_sizes = {}) {
  if (scansions.size() < 2)
    throw InvalidArgument("infer_scheme needs at least two lines");
  std::vector<std::vector<RhymeFoot>> feet;
  feet.reserve(scansions.size());
  for (const auto& s : scansions) feet.push_back(s.end_feet);
  return infer_scheme_from_feet(feet, stanza_sizes);
}

// Parsed target pattern: letter classes in first-occurrence numbering plus
// the segment (stanza) sizes given by spaces.
struct RhymeTarget {
  std::vector<int> classes;
  std::vector<std::size_t> segment_sizes;

  std::size_t size() const noexcept { return classes.size(); }
};

inline RhymeTarget parse_rhyme_target(std::string_view pattern) {
  RhymeTarget target;
  std::vector<char> seen;
  std::size_t segment = 0;
  for (char c : pattern) {
    if (c == ' ' || c == '/') {
      if (segment > 0) target.segment_sizes.push_back(segment);
      segment = 0;
      continue;
    }
    if (c < 'A' || c > 'Z')
      throw InvalidArgument("rhyme pattern '" + std::string(pattern) +
                            "' may only contain uppercase letters and spaces");
    auto it = std::find(seen.begin(), seen.end(), c);
    if (it == seen.end()) {
      seen.push_back(c);
      it = seen.end() - 1;
    }
    target.classes.push_back(static_cast<int>(it - seen.begin()));
    ++segment;
  }
  if (segment > 0) target.segment_sizes.push_back(segment);
  if (target.classes.empty()) throw InvalidArgument("empty rhyme pattern");
  return target;
}

// Pairwise constraints of `target` over the first min(len) lines of
// `inferred`: for every pair (i, j) the target either requires the two lines
// to rhyme (same letter) or not to rhyme (different letters).
struct PairTally {
  std::size_t satisfied = 0;
  std::size_t constrained = 0;
};

inline PairTally tally_pairs(std::span<const int> inferred, std::span<const int> target) {
  PairTally t;
  const std::size_t n = std::min(inferred.size(), target.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      ++t.constrained;
      if ((inferred[i] == inferred[j]) == (target[i] == target[j])) ++t.satisfied;
    }
  return t;
}

// Scores an inferred scheme against a target pattern.
//
// A target at least as long as the poem is aligned once against the whole
// poem. A shorter target tiles with fresh letter bindings: per stanza when the
// poem has several stanzas and the target is a single segment, otherwise per
// consecutive block of target-length lines. Each unit scores
// satisfied / constrained pairs over its overlap with the target; the poem
// score is the mean over units that have at least one constrained pair, and 0
// when no unit does.
inline double rhyme_match_ratio(const RhymeScheme& inferred, const RhymeTarget& target) {
  if (target.classes.empty()) throw InvalidArgument("empty rhyme pattern");
  std::vector<std::span<const int>> units;
  const std::span<const int> all(inferred.classes);
  if (target.size() >= inferred.size()) {
    units.push_back(all);
  } else if (inferred.stanza_breaks.size() > 1 && target.segment_sizes.size() <= 1) {
    std::size_t begin = 0;
    for (auto end : inferred.stanza_breaks) {
      units.push_back(all.subspan(begin, end - begin));
      begin = end;
    }
  } else {
    for (std::size_t begin = 0; begin < all.size(); begin += target.size())
      units.push_back(all.subspan(begin, std::min(target.size(), all.size() - begin)));
  }

  double sum = 0.0;
  std::size_t scored = 0;
  for (const auto& unit : units) {
    // Classes inside a unit are compared for equality only, so fresh letter
    // bindings need no relabeling.
    PairTally t = tally_pairs(unit, target.classes);
    if (t.constrained == 0) continue;
    sum += static_cast<double>(t.satisfied) / static_cast<double>(t.constrained);
    ++scored;
  }
  return scored == 0 ? 0.0 : sum / static_cast<double>(scored);
}

inline double rhyme_match_ratio(const RhymeScheme& inferred, std::string_view target) {
  return rhyme_match_ratio(inferred, parse_rhyme_target(target));
}

}  // namespace poemetric
