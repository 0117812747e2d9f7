#pragma once

#include <string_view>

namespace poemetric {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kReportSchema = "poemetric-report/1";

}  // namespace poemetric
