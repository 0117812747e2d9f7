#pragma once

// Inter-rater agreement on 1-5 Likert ratings: observed proportion agreement,
// quadratic weighted kappa and Spearman rank correlation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "poemetric/error.hpp"

namespace poemetric {

inline constexpr int kLikertMin = 1;
inline constexpr int kLikertMax = 5;
inline constexpr int kLikertCategories = kLikertMax - kLikertMin + 1;

using RatingSeries = std::vector<int>;

namespace detail {

inline void check_paired(std::span<const int> a, std::span<const int> b, const char* who) {
  if (a.empty() || b.empty()) throw InvalidArgument(std::string(who) + ": empty rating series");
  if (a.size() != b.size())
    throw InvalidArgument(std::string(who) + ": rating series differ in length (" +
                          std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  for (auto s : {a, b})
    for (int v : s)
      if (v < kLikertMin || v > kLikertMax)
        throw InvalidArgument(std::string(who) + ": rating " + std::to_string(v) +
                              " outside [1,5]");
}

}  // namespace detail

// 2A / (n_A + n_B), A = items rated identically.
inline double pao(std::span<const int> a, std::span<const int> b) {
  detail::check_paired(a, b, "pao");
  std::size_t agreements = 0;
  for (std::size_t i = 0; i < a.size(); ++i) agreements += a[i] == b[i];
  return 2.0 * static_cast<double>(agreements) / static_cast<double>(a.size() + b.size());
}

// Cohen's kappa with quadratic weights w_ij = 1 - (i-j)^2 / (k-1)^2 over the
// five Likert categories, expected agreement from the product of the raters'
// marginals. Computed in the equivalent disagreement form on integer counts,
// so identical raters give exactly 1. When expected disagreement is zero
// (both raters constant and equal) kappa is defined as 1; two different
// constant raters give 0.
inline double weighted_kappa(std::span<const int> a, std::span<const int> b) {
  detail::check_paired(a, b, "weighted_kappa");
  constexpr int k = kLikertCategories;
  std::array<long long, k> row{}, col{};
  long long observed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const long long d = a[i] - b[i];
    observed += d * d;
    ++row[a[i] - kLikertMin];
    ++col[b[i] - kLikertMin];
  }
  long long expected = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) expected += row[i] * col[j] * (i - j) * (i - j);
  const bool a_const = std::all_of(a.begin(), a.end(), [&](int v) { return v == a[0]; });
  const bool b_const = std::all_of(b.begin(), b.end(), [&](int v) { return v == b[0]; });
  if (a_const && b_const) return a[0] == b[0] ? 1.0 : 0.0;
  const double n = static_cast<double>(a.size());
  return 1.0 - n * static_cast<double>(observed) / static_cast<double>(expected);
}

// Ranks with ties averaged (1-based).
inline std::vector<double> average_ranks(std::span<const int> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Pearson correlation of average ranks. Throws UndefinedStatistic when either
// series is constant.
inline double spearman_rho(std::span<const int> a, std::span<const int> b) {
  detail::check_paired(a, b, "spearman_rho");
  if (a.size() < 2) throw InvalidArgument("spearman_rho: need at least two items");
  const auto ra = average_ranks(a), rb = average_ranks(b);
  const double n = static_cast<double>(ra.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    throw UndefinedStatistic("spearman_rho: undefined for a constant rating series");
  return sab / std::sqrt(saa * sbb);
}

struct AgreementStats {
  std::size_t items = 0;
  double pao = 0.0;
  double kappa = 0.0;
  std::optional<double> rho;  // absent when undefined
};

inline AgreementStats agreement_stats(std::span<const int> a, std::span<const int> b) {
  AgreementStats s;
  s.items = a.size();
  s.pao = pao(a, b);
  s.kappa = weighted_kappa(a, b);
  try {
    s.rho = spearman_rho(a, b);
  } catch (const UndefinedStatistic&) {
  } catch (const InvalidArgument&) {
    if (a.size() >= 2) throw;
  }
  return s;
}

// One reference rater against several others: the mean of the per-rater
// statistics and the statistics of all pairs pooled into one series.
struct PooledAgreement {
  std::vector<AgreementStats> per_rater;
  AgreementStats mean;
  AgreementStats pooled;
};

inline PooledAgreement pooled_agreement(const std::vector<std::pair<RatingSeries, RatingSeries>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("pooled_agreement: no rater pairs");
  PooledAgreement out;
  RatingSeries all_a, all_b;
  double rho_sum = 0.0;
  std::size_t rho_n = 0;
  for (const auto& [a, b] : pairs) {
    out.per_rater.push_back(agreement_stats(a, b));
    const auto& s = out.per_rater.back();
    out.mean.items += s.items;
    out.mean.pao += s.pao;
    out.mean.kappa += s.kappa;
    if (s.rho) {
      rho_sum += *s.rho;
      ++rho_n;
    }
    all_a.insert(all_a.end(), a.begin(), a.end());
    all_b.insert(all_b.end(), b.begin(), b.end());
  }
  const double n = static_cast<double>(pairs.size());
  out.mean.pao /= n;
  out.mean.kappa /= n;
  if (rho_n > 0) out.mean.rho = rho_sum / static_cast<double>(rho_n);
  out.pooled = agreement_stats(all_a, all_b);
  return out;
}

}  // namespace poemetric
