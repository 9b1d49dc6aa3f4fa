// Copyright 2026 The nasinit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace nasinit {

enum class RankSumMethod { kExact, kNormalApprox };

inline std::string_view rank_sum_method_name(RankSumMethod m) {
  return m == RankSumMethod::kExact ? "exact" : "normal_approx";
}

struct RankSumResult {
  double statistic = 0.0;  // rank sum of the first sample
  double two_sided_p = 1.0;
  RankSumMethod method = RankSumMethod::kExact;
};

inline constexpr std::size_t kExactRankSumLimit = 10;

namespace detail {

// Midranks (1-based) of the pooled values plus the tie-group sizes.
inline std::vector<double> midranks(const std::vector<double>& pooled, std::vector<std::size_t>& ties) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return pooled[i] < pooled[j]; });
  std::vector<double> ranks(pooled.size());
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start + 1;
    while (end < order.size() && pooled[order[end]] == pooled[order[start]]) ++end;
    const double r = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = r;
    ties.push_back(end - start);
    start = end;
  }
  return ranks;
}

// counts[s] = number of size-n subsets of {1..total} whose sum is s.
inline std::vector<double> rank_sum_counts(std::size_t n, std::size_t total) {
  const std::size_t max_sum = n * (2 * total - n + 1) / 2;
  std::vector<std::vector<double>> dp(n + 1, std::vector<double>(max_sum + 1, 0.0));
  dp[0][0] = 1.0;
  for (std::size_t r = 1; r <= total; ++r)
    for (std::size_t k = std::min(n, r); k >= 1; --k)
      for (std::size_t s = max_sum; s >= r; --s) dp[k][s] += dp[k - 1][s - r];
  return dp[n];
}

}  // namespace detail

// Wilcoxon rank-sum test. Exact null distribution when both samples are small
// and tie-free; otherwise the tie-corrected normal approximation with a
// continuity correction.
inline RankSumResult wilcoxon_rank_sum(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wilcoxon_rank_sum: empty sample");
  std::vector<double> pooled = a;
  pooled.insert(pooled.end(), b.begin(), b.end());
  for (double v : pooled)
    if (std::isnan(v)) throw std::invalid_argument("wilcoxon_rank_sum: NaN in sample");
  std::vector<std::size_t> ties;
  const auto ranks = detail::midranks(pooled, ties);
  const std::size_t n = a.size(), m = b.size(), total = n + m;

  RankSumResult res;
  res.statistic = std::accumulate(ranks.begin(), ranks.begin() + static_cast<long>(n), 0.0);
  const double mean = 0.5 * static_cast<double>(n * (total + 1));
  const bool tie_free = ties.size() == total;

  if (tie_free && n <= kExactRankSumLimit && m <= kExactRankSumLimit) {
    res.method = RankSumMethod::kExact;
    const auto counts = detail::rank_sum_counts(n, total);
    // Integer sums; compare doubled deviations to stay exact.
    const auto w2 = static_cast<long>(std::llround(2.0 * res.statistic));
    const auto mean2 = static_cast<long>(n * (total + 1));
    const long dev = std::labs(w2 - mean2);
    double extreme = 0.0, all = 0.0;
    for (std::size_t s = 0; s < counts.size(); ++s) {
      all += counts[s];
      if (std::labs(2 * static_cast<long>(s) - mean2) >= dev) extreme += counts[s];
    }
    res.two_sided_p = std::min(1.0, extreme / all);
    return res;
  }

  res.method = RankSumMethod::kNormalApprox;
  const double nn = static_cast<double>(n), mm = static_cast<double>(m), tt = static_cast<double>(total);
  double tie_term = 0.0;
  for (std::size_t t : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double var = nn * mm / 12.0 * ((tt + 1.0) - tie_term / (tt * (tt - 1.0)));
  if (!(var > 0.0)) {
    res.two_sided_p = 1.0;
    return res;
  }
  const double z = std::max(std::abs(res.statistic - mean) - 0.5, 0.0) / std::sqrt(var);
  const double p = std::erfc(z / std::sqrt(2.0));
  res.two_sided_p = std::clamp(p, std::numeric_limits<double>::min(), 1.0);
  return res;
}

}  // namespace nasinit
