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

// k-means++ / Lloyd, DBSCAN and the silhouette, Calinski-Harabasz and
// Davies-Bouldin validity indices. Points are the rows of an Eigen matrix.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nasinit/random.hpp"

namespace nasinit {

inline constexpr int kNoise = -1;

struct ClusterAssignment {
  std::vector<int> labels;  // dense 0..n_clusters-1, kNoise for DBSCAN noise
  int n_clusters = 0;
};

struct KMeansModel {
  Eigen::MatrixXd centers;  // k x d
  double inertia = 0.0;
  int n_init = 50;
  int max_iter = 500;
  int best_restart = 0;
  // Inertia after every assignment step, one trace per restart.
  std::vector<std::vector<double>> inertia_traces;
};

struct KMeansOptions {
  int n_init = 50;
  int max_iter = 500;
};

namespace detail {

inline int nearest_center(const Eigen::MatrixXd& x, Eigen::Index i, const Eigen::MatrixXd& centers,
                          double* dist2) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = (x.row(i) - centers.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist2) *dist2 = best_d;
  return best;
}

inline double assign_all(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                         std::vector<int>& labels) {
  double inertia = 0.0;
  labels.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double d = 0.0;
    labels[i] = nearest_center(x, i, centers, &d);
    inertia += d;
  }
  return inertia;
}

inline Eigen::MatrixXd kmeans_pp_seed(const Eigen::MatrixXd& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd centers(k, x.cols());
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
  Eigen::VectorXd d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = n - 1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(n));
    }
    centers.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      d2(i) = std::min(d2(i), (x.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

struct LloydResult {
  Eigen::MatrixXd centers;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> trace;
};

inline LloydResult lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centers, int max_iter) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = centers.rows();
  LloydResult out;
  std::vector<int> labels, previous;
  for (int it = 0; it < max_iter; ++it) {
    out.trace.push_back(assign_all(x, centers, labels));
    if (labels == previous) break;
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<int> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[i]) += x.row(i);
      ++counts[labels[i]];
    }
    std::vector<bool> taken(n, false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(c) = sums.row(c) / counts[c];
        continue;
      }
      // Empty cluster: re-seed at the point farthest from its center.
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double d = (x.row(i) - centers.row(labels[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[far] = true;
      centers.row(c) = x.row(far);
    }
    previous = labels;
  }
  out.inertia = assign_all(x, centers, out.labels);
  out.centers = std::move(centers);
  return out;
}

}  // namespace detail

// Best of n_init k-means++ seeded Lloyd runs by (inertia, restart index).
inline std::pair<KMeansModel, ClusterAssignment> kmeans_fit(const Eigen::MatrixXd& x, int k,
                                                            Rng& rng, KMeansOptions opts = {}) {
  if (k < 1) throw std::invalid_argument("kmeans_fit: k must be >= 1");
  if (k > x.rows())
    throw std::invalid_argument("kmeans_fit: k=" + std::to_string(k) + " exceeds " +
                                std::to_string(x.rows()) + " points");
  if (opts.n_init < 1 || opts.max_iter < 1)
    throw std::invalid_argument("kmeans_fit: n_init and max_iter must be >= 1");

  std::vector<std::uint64_t> seeds(opts.n_init);
  for (auto& s : seeds) s = rng();

  KMeansModel model;
  model.n_init = opts.n_init;
  model.max_iter = opts.max_iter;
  std::vector<int> best_labels;
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < opts.n_init; ++r) {
    Rng restart_rng(seeds[r]);
    auto run = detail::lloyd(x, detail::kmeans_pp_seed(x, k, restart_rng), opts.max_iter);
    model.inertia_traces.push_back(run.trace);
    if (run.inertia < best) {
      best = run.inertia;
      model.centers = std::move(run.centers);
      model.inertia = run.inertia;
      model.best_restart = r;
      best_labels = std::move(run.labels);
    }
  }
  ClusterAssignment assignment{std::move(best_labels), 0};
  std::vector<bool> used(k, false);
  for (int l : assignment.labels) used[l] = true;
  assignment.n_clusters = static_cast<int>(std::count(used.begin(), used.end(), true));
  return {std::move(model), std::move(assignment)};
}

struct DbscanParams {
  double eps = 0.3;
  int min_samples = 5;
};

// Core points have at least min_samples points (self included) within eps.
// Clusters are numbered in order of their first core point; a border point
// joins the first cluster that reaches it.
inline ClusterAssignment dbscan_fit(const Eigen::MatrixXd& x, const DbscanParams& params) {
  if (!(params.eps > 0.0)) throw std::invalid_argument("dbscan: eps must be > 0");
  if (params.min_samples < 1) throw std::invalid_argument("dbscan: min_samples must be >= 1");
  const Eigen::Index n = x.rows();
  const double eps2 = params.eps * params.eps;
  std::vector<std::vector<Eigen::Index>> neighbors(n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if ((x.row(i) - x.row(j)).squaredNorm() <= eps2) neighbors[i].push_back(j);

  std::vector<bool> core(n);
  for (Eigen::Index i = 0; i < n; ++i)
    core[i] = static_cast<int>(neighbors[i].size()) >= params.min_samples;

  ClusterAssignment out{std::vector<int>(n, kNoise), 0};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!core[i] || out.labels[i] != kNoise) continue;
    const int label = out.n_clusters++;
    out.labels[i] = label;
    std::vector<Eigen::Index> frontier = {i};
    while (!frontier.empty()) {
      const Eigen::Index u = frontier.back();
      frontier.pop_back();
      for (Eigen::Index v : neighbors[u]) {
        if (out.labels[v] != kNoise) continue;
        out.labels[v] = label;
        if (core[v]) frontier.push_back(v);
      }
    }
  }
  return out;
}

class DegenerateClustering : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

// Non-noise members grouped by label, in ascending label order.
inline std::vector<std::vector<Eigen::Index>> groups(const Eigen::MatrixXd& x,
                                                     const std::vector<int>& labels,
                                                     const char* what) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows())
    throw std::invalid_argument(std::string(what) + ": label count does not match points");
  std::map<int, std::vector<Eigen::Index>> by_label;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    if (labels[i] != kNoise) by_label[labels[i]].push_back(i);
  if (by_label.size() < 2)
    throw std::invalid_argument(std::string(what) + ": needs at least 2 clusters");
  std::vector<std::vector<Eigen::Index>> out;
  for (auto& [label, members] : by_label) out.push_back(std::move(members));
  return out;
}

inline Eigen::RowVectorXd centroid(const Eigen::MatrixXd& x,
                                   const std::vector<Eigen::Index>& members) {
  Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(x.cols());
  for (Eigen::Index i : members) c += x.row(i);
  return c / static_cast<double>(members.size());
}

}  // namespace detail

// Mean silhouette over non-noise points; members of singleton clusters
// score 0.
inline double silhouette(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto clusters = detail::groups(x, labels, "silhouette");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (Eigen::Index i : clusters[a]) {
      ++count;
      if (clusters[a].size() == 1) continue;
      double intra = 0.0;
      for (Eigen::Index j : clusters[a])
        if (j != i) intra += (x.row(i) - x.row(j)).norm();
      intra /= static_cast<double>(clusters[a].size() - 1);
      double nearest = std::numeric_limits<double>::infinity();
      for (std::size_t b = 0; b < clusters.size(); ++b) {
        if (b == a) continue;
        double mean = 0.0;
        for (Eigen::Index j : clusters[b]) mean += (x.row(i) - x.row(j)).norm();
        nearest = std::min(nearest, mean / static_cast<double>(clusters[b].size()));
      }
      const double denom = std::max(intra, nearest);
      if (denom > 0.0) total += (nearest - intra) / denom;
    }
  }
  return total / static_cast<double>(count);
}

// [tr(B)/(k-1)] / [tr(W)/(N-k)]; +infinity when the within dispersion is 0.
inline double calinski_harabasz(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto clusters = detail::groups(x, labels, "calinski_harabasz");
  const auto k = static_cast<double>(clusters.size());
  std::size_t n_points = 0;
  Eigen::RowVectorXd overall = Eigen::RowVectorXd::Zero(x.cols());
  for (const auto& members : clusters) {
    n_points += members.size();
    for (Eigen::Index i : members) overall += x.row(i);
  }
  const auto n = static_cast<double>(n_points);
  if (n <= k) throw std::invalid_argument("calinski_harabasz: needs more points than clusters");
  overall /= n;
  double between = 0.0, within = 0.0;
  for (const auto& members : clusters) {
    const Eigen::RowVectorXd c = detail::centroid(x, members);
    between += static_cast<double>(members.size()) * (c - overall).squaredNorm();
    for (Eigen::Index i : members) within += (x.row(i) - c).squaredNorm();
  }
  if (within == 0.0) return std::numeric_limits<double>::infinity();
  return (between / (k - 1.0)) / (within / (n - k));
}

// Mean over clusters of the worst (s_i + s_j) / d(c_i, c_j).
inline double davies_bouldin(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  const auto clusters = detail::groups(x, labels, "davies_bouldin");
  const std::size_t k = clusters.size();
  std::vector<Eigen::RowVectorXd> centers;
  std::vector<double> scatter;
  for (const auto& members : clusters) {
    centers.push_back(detail::centroid(x, members));
    double s = 0.0;
    for (Eigen::Index i : members) s += (x.row(i) - centers.back()).norm();
    scatter.push_back(s / static_cast<double>(members.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      const double dist = (centers[i] - centers[j]).norm();
      if (dist == 0.0) throw DegenerateClustering("davies_bouldin: coincident centroids");
      worst = std::max(worst, (scatter[i] + scatter[j]) / dist);
    }
    total += worst;
  }
  return total / static_cast<double>(k);
}

}  // namespace nasinit
