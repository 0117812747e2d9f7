#pragma once

// The ten rubric dimensions scored on a 1-5 Likert scale.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "poemetric/agreement.hpp"
#include "poemetric/error.hpp"

namespace poemetric {

inline constexpr std::size_t kDimensionCount = 10;

inline constexpr std::array<std::string_view, kDimensionCount> kDimensionNames = {
    "form_accuracy",       "theme_alignment",  "creativity", "lexical_diversity",
    "idiosyncrasy",        "emotional_resonance", "literary_devices", "imagery",
    "overall_quality",     "human_authorship"};

// Scores in kDimensionNames order.
using DimensionScores = std::array<int, kDimensionCount>;

inline std::optional<std::size_t> dimension_index(std::string_view name) {
  for (std::size_t i = 0; i < kDimensionCount; ++i)
    if (kDimensionNames[i] == name) return i;
  return std::nullopt;
}

inline bool valid_score(int v) { return v >= kLikertMin && v <= kLikertMax; }

inline void check_scores(const DimensionScores& s) {
  for (std::size_t i = 0; i < kDimensionCount; ++i)
    if (!valid_score(s[i]))
      throw InvalidArgument(std::string(kDimensionNames[i]) + ": score " + std::to_string(s[i]) +
                            " outside [1,5]");
}

}  // namespace poemetric
