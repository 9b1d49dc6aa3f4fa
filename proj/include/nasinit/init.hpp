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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "nasinit/arch_space.hpp"
#include "nasinit/bench_data.hpp"
#include "nasinit/bgm.hpp"
#include "nasinit/cluster.hpp"
#include "nasinit/random.hpp"
#include "nasinit/sampling.hpp"

namespace nasinit {

enum class InitMethod { kCentroids, kRand, kLhs };

inline std::string_view init_method_name(InitMethod m) {
  switch (m) {
    case InitMethod::kCentroids: return "centroids";
    case InitMethod::kRand: return "rand";
    case InitMethod::kLhs: return "lhs";
  }
  return "rand";
}

inline InitMethod init_method_from_name(std::string_view s) {
  if (s == "centroids") return InitMethod::kCentroids;
  if (s == "rand") return InitMethod::kRand;
  if (s == "lhs") return InitMethod::kLhs;
  throw std::invalid_argument("unknown init method '" + std::string(s) + "'");
}

// Where a centroid-seeded cell came from.
struct Provenance {
  int component = 0;
  double distance = 0.0;
  std::size_t sample_index = 0;
};

struct InitialPopulation {
  std::vector<Genome> genomes;
  std::vector<CellSpec> cells;
  InitMethod method = InitMethod::kRand;
  std::vector<Provenance> provenance;  // empty unless kCentroids

  std::size_t size() const { return cells.size(); }
};

// Cluster centres in reduced space; components[i] is the model component of row i.
struct Centroids {
  Eigen::MatrixXd points;
  std::vector<int> components;
};

inline Centroids extract_centroids(const KMeansModel& model) {
  Centroids c;
  c.points = model.centers;
  for (Eigen::Index k = 0; k < model.centers.rows(); ++k) c.components.push_back(static_cast<int>(k));
  return c;
}

inline Centroids extract_centroids(const BgmModel& model) {
  const auto eff = effective_components(model);
  if (eff.empty()) throw std::runtime_error("extract_centroids: no effective components");
  Centroids c;
  c.points.resize(static_cast<Eigen::Index>(eff.size()), model.means.cols());
  for (std::size_t i = 0; i < eff.size(); ++i) c.points.row(static_cast<Eigen::Index>(i)) = model.means.row(eff[i]);
  c.components = eff;
  return c;
}

// Medoid mapping: each centroid, in order, takes the nearest sample whose
// canonical key is not already in the population.
inline InitialPopulation centroids_to_population(const Centroids& centroids,
                                                 const SampleSet& samples,
                                                 const Eigen::MatrixXd& reduced) {
  if (static_cast<std::size_t>(reduced.rows()) != samples.size())
    throw std::invalid_argument("centroids_to_population: reduced rows do not match samples");
  if (centroids.points.cols() != reduced.cols())
    throw std::invalid_argument("centroids_to_population: dimension mismatch");
  const Eigen::Index n = reduced.rows();

  std::vector<std::string> keys(samples.size());
  std::unordered_set<std::string> unique;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    keys[i] = canonical_key(samples.cells[i]);
    unique.insert(keys[i]);
  }
  if (unique.size() < static_cast<std::size_t>(centroids.points.rows()))
    throw std::invalid_argument("centroids_to_population: fewer unique samples (" +
                                std::to_string(unique.size()) + ") than centroids (" +
                                std::to_string(centroids.points.rows()) + ")");

  InitialPopulation pop;
  pop.method = InitMethod::kCentroids;
  std::unordered_set<std::string> taken;
  for (Eigen::Index c = 0; c < centroids.points.rows(); ++c) {
    Eigen::Index best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (taken.contains(keys[i])) continue;
      const double d2 = (reduced.row(i) - centroids.points.row(c)).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = i;
      }
    }
    const auto idx = static_cast<std::size_t>(best);
    taken.insert(keys[idx]);
    pop.genomes.push_back(samples.genomes[idx]);
    pop.cells.push_back(samples.cells[idx]);
    pop.provenance.push_back({centroids.components[static_cast<std::size_t>(c)],
                              std::sqrt(best_d2), idx});
  }
  return pop;
}

inline InitialPopulation from_samples(SampleSet set, InitMethod method) {
  InitialPopulation pop;
  pop.genomes = std::move(set.genomes);
  pop.cells = std::move(set.cells);
  pop.method = method;
  return pop;
}

inline InitialPopulation init_random(std::size_t pop_size, Rng& rng) {
  return from_samples(sample_uniform(pop_size, rng), InitMethod::kRand);
}

inline InitialPopulation init_lhs(std::size_t pop_size, Rng& rng) {
  return from_samples(sample_lhs(pop_size, rng), InitMethod::kLhs);
}

}  // namespace nasinit
