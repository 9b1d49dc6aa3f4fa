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

// Independent reference implementations used as test oracles. Nothing here
// calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "nasinit/arch_space.hpp"
#include "nasinit/random.hpp"

namespace nasinit::oracle {

// Every simple input->output path, by exhaustive DFS.
inline std::vector<std::vector<int>> all_paths(const CellSpec& c) {
  std::vector<std::vector<int>> out;
  const int n = c.num_nodes();
  std::vector<int> path = {0};
  std::function<void(int)> dfs = [&](int u) {
    if (u == n - 1) {
      out.push_back(path);
      return;
    }
    for (int v = 0; v < n; ++v) {
      if (c.adjacency[u][v] && std::find(path.begin(), path.end(), v) == path.end()) {
        path.push_back(v);
        dfs(v);
        path.pop_back();
      }
    }
  };
  dfs(0);
  return out;
}

// Nodes and edges lying on some input->output path.
inline std::pair<std::set<int>, std::set<std::pair<int, int>>> on_paths(const CellSpec& c) {
  std::set<int> nodes;
  std::set<std::pair<int, int>> edges;
  for (const auto& p : all_paths(c)) {
    nodes.insert(p.begin(), p.end());
    for (std::size_t i = 0; i + 1 < p.size(); ++i) edges.insert({p[i], p[i + 1]});
  }
  return {nodes, edges};
}

inline bool brute_valid(const CellSpec& c) {
  const int n = c.num_nodes();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (c.adjacency[i][j]) return false;
  if (c.ops.front() != Op::kInput || c.ops.back() != Op::kOutput) return false;
  for (int i = 1; i + 1 < n; ++i)
    if (c.ops[i] == Op::kInput || c.ops[i] == Op::kOutput) return false;
  const auto [nodes, edges] = on_paths(c);
  if (nodes.empty()) return false;
  return nodes.size() <= 7 && edges.size() <= 9;
}

// Random upper-triangular cell with n nodes and edge probability p.
inline CellSpec random_cell(Rng& rng, int n, double p) {
  CellSpec c;
  c.adjacency.assign(n, std::vector<int>(n, 0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.adjacency[i][j] = rng.bernoulli(p) ? 1 : 0;
  c.ops.push_back(Op::kInput);
  for (int i = 1; i + 1 < n; ++i) c.ops.push_back(kIntermediateOps[rng.below(3)]);
  c.ops.push_back(Op::kOutput);
  return c;
}

inline CellSpec random_valid_cell(Rng& rng, int n) {
  for (;;) {
    CellSpec c = random_cell(rng, n, 0.4);
    if (brute_valid(c)) return c;
  }
}

// Adjusted Rand index from the contingency table.
inline double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1;
    ra[a[i]] += 1;
    rb[b[i]] += 1;
  }
  auto c2 = [](double x) { return x * (x - 1) / 2; };
  double sum_joint = 0, sum_a = 0, sum_b = 0;
  for (auto& [k, v] : joint) sum_joint += c2(v);
  for (auto& [k, v] : ra) sum_a += c2(v);
  for (auto& [k, v] : rb) sum_b += c2(v);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (sum_joint - expected) / (max_index - expected);
}

// Gaussian blobs: `per` points around each center with isotropic sigma.
inline std::pair<Eigen::MatrixXd, std::vector<int>> blobs(
    Rng& rng, const std::vector<std::vector<double>>& centers, int per, double sigma) {
  const int d = static_cast<int>(centers.front().size());
  Eigen::MatrixXd x(static_cast<Eigen::Index>(centers.size()) * per, d);
  std::vector<int> truth;
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int i = 0; i < per; ++i, ++row) {
      for (int j = 0; j < d; ++j) x(row, j) = centers[c][j] + sigma * rng.normal();
      truth.push_back(static_cast<int>(c));
    }
  }
  return {x, truth};
}

inline double dist(const Eigen::MatrixXd& x, int i, int j) {
  double s = 0;
  for (Eigen::Index c = 0; c < x.cols(); ++c) s += (x(i, c) - x(j, c)) * (x(i, c) - x(j, c));
  return std::sqrt(s);
}

// Validity indices straight from their textbook definitions, using explicit
// loops over all point pairs.
inline double brute_silhouette(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const int n = static_cast<int>(x.rows());
  std::set<int> ids(labels.begin(), labels.end());
  ids.erase(-1);
  double total = 0;
  int count = 0;
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0) continue;
    ++count;
    int own = 0;
    for (int j = 0; j < n; ++j) own += labels[j] == labels[i];
    if (own == 1) continue;
    double a = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && labels[j] == labels[i]) a += dist(x, i, j);
    a /= own - 1;
    double b = 1e300;
    for (int other : ids) {
      if (other == labels[i]) continue;
      double s = 0;
      int m = 0;
      for (int j = 0; j < n; ++j)
        if (labels[j] == other) {
          s += dist(x, i, j);
          ++m;
        }
      b = std::min(b, s / m);
    }
    total += (b - a) / std::max(a, b);
  }
  return total / count;
}

inline std::map<int, std::vector<double>> brute_centroids(const Eigen::MatrixXd& x,
                                                          const std::vector<int>& labels) {
  std::map<int, std::vector<double>> sums;
  std::map<int, int> counts;
  for (int i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    auto& s = sums[labels[i]];
    s.resize(x.cols(), 0.0);
    for (int c = 0; c < x.cols(); ++c) s[c] += x(i, c);
    ++counts[labels[i]];
  }
  for (auto& [l, s] : sums)
    for (double& v : s) v /= counts[l];
  return sums;
}

inline double brute_calinski_harabasz(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto cents = brute_centroids(x, labels);
  std::vector<double> mean(x.cols(), 0.0);
  int n = 0;
  for (int i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    ++n;
    for (int c = 0; c < x.cols(); ++c) mean[c] += x(i, c);
  }
  for (double& v : mean) v /= n;
  double between = 0, within = 0;
  for (int i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    const auto& cc = cents.at(labels[i]);
    for (int c = 0; c < x.cols(); ++c) {
      between += (cc[c] - mean[c]) * (cc[c] - mean[c]);
      within += (x(i, c) - cc[c]) * (x(i, c) - cc[c]);
    }
  }
  const double k = static_cast<double>(cents.size());
  return (between / (k - 1)) / (within / (n - k));
}

inline double brute_davies_bouldin(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto cents = brute_centroids(x, labels);
  std::map<int, double> scatter;
  std::map<int, int> counts;
  for (int i = 0; i < x.rows(); ++i) {
    if (labels[i] < 0) continue;
    const auto& cc = cents.at(labels[i]);
    double s = 0;
    for (int c = 0; c < x.cols(); ++c) s += (x(i, c) - cc[c]) * (x(i, c) - cc[c]);
    scatter[labels[i]] += std::sqrt(s);
    ++counts[labels[i]];
  }
  double total = 0;
  for (auto& [li, ci] : cents) {
    double worst = 0;
    for (auto& [lj, cj] : cents) {
      if (li == lj) continue;
      double d = 0;
      for (std::size_t c = 0; c < ci.size(); ++c) d += (ci[c] - cj[c]) * (ci[c] - cj[c]);
      worst = std::max(worst, (scatter[li] / counts[li] + scatter[lj] / counts[lj]) / std::sqrt(d));
    }
    total += worst;
  }
  return total / static_cast<double>(cents.size());
}

// Two-sided exact rank-sum p-value by listing every subset of positions that
// the first sample could occupy (tie-free data only).
inline double enumerated_rank_sum_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> all = a;
  all.insert(all.end(), b.begin(), b.end());
  const int n = static_cast<int>(a.size());
  const int total = static_cast<int>(all.size());
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double v) {
    return static_cast<double>(std::lower_bound(sorted.begin(), sorted.end(), v) - sorted.begin() + 1);
  };
  double observed = 0;
  for (double v : a) observed += rank(v);
  const double mean = n * (total + 1) / 2.0;
  long extreme = 0, count = 0;
  for (unsigned mask = 0; mask < (1u << total); ++mask) {
    if (__builtin_popcount(mask) != n) continue;
    ++count;
    double w = 0;
    for (int i = 0; i < total; ++i)
      if (mask & (1u << i)) w += i + 1;
    if (std::abs(w - mean) >= std::abs(observed - mean) - 1e-9) ++extreme;
  }
  return static_cast<double>(extreme) / static_cast<double>(count);
}

// Linear-interpolation percentile (the "linear" method of common numeric
// libraries), written against a fully sorted copy.
inline double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

}  // namespace nasinit::oracle
