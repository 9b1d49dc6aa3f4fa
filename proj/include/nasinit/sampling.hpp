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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nasinit/arch_space.hpp"
#include "nasinit/random.hpp"

namespace nasinit {

enum class SampleMethod { kUniform, kLhs };

inline std::string_view sample_method_name(SampleMethod m) {
  return m == SampleMethod::kUniform ? "uniform" : "lhs";
}

inline SampleMethod sample_method_from_name(std::string_view s) {
  if (s == "uniform") return SampleMethod::kUniform;
  if (s == "lhs") return SampleMethod::kLhs;
  throw std::invalid_argument("unknown sampling method '" + std::string(s) + "'");
}

// genomes[i] decodes to cells[i]. Uniform sets hold only valid cells; LHS
// sets keep invalid decodes so the stratification is never broken.
struct SampleSet {
  std::vector<Genome> genomes;
  std::vector<CellSpec> cells;
  std::uint64_t seed = 0;
  SampleMethod method = SampleMethod::kUniform;

  std::size_t size() const { return cells.size(); }
};

inline constexpr long kMaxRejectionAttempts = 1'000'000;

inline Genome random_genome(Rng& rng) {
  Genome g;
  for (auto& bit : g.edges) bit = rng.bernoulli(0.5) ? 1 : 0;
  for (auto& op : g.ops) op = kIntermediateOps[rng.below(3)];
  return g;
}

// Rejection-samples one genome whose decoded cell is valid.
inline Genome random_valid_genome(Rng& rng) {
  for (long attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    Genome g = random_genome(rng);
    if (is_valid(genome_to_cell(g))) return g;
  }
  throw std::runtime_error("random_valid_genome: rejection cap reached");
}

inline SampleSet sample_uniform(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_uniform: n must be >= 1");
  SampleSet set;
  set.method = SampleMethod::kUniform;
  set.genomes.reserve(n);
  set.cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.genomes.push_back(random_valid_genome(rng));
    set.cells.push_back(genome_to_cell(set.genomes.back()));
  }
  return set;
}

inline SampleSet sample_uniform(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet set = sample_uniform(n, rng);
  set.seed = seed;
  return set;
}

// n x 26 Latin hypercube in [0,1): column d places exactly one point in each
// stratum [k/n, (k+1)/n), strata assigned by an independent permutation.
inline std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::size_t dims,
                                                        Rng& rng) {
  std::vector<std::vector<double>> u(n, std::vector<double>(dims));
  std::vector<std::size_t> perm(n);
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(perm);
    for (std::size_t i = 0; i < n; ++i) {
      double v = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
      // Guard the upper stratum edge against rounding up to 1.0.
      if (v >= 1.0) v = std::nextafter(1.0, 0.0);
      u[i][d] = v;
    }
  }
  return u;
}

// Edge genes: u < 0.5 -> 0, else 1. Op genes by thirds in listing order.
inline Genome genome_from_unit(const std::vector<double>& row) {
  Genome g;
  for (int k = 0; k < kEdgeGenes; ++k) g.edges[k] = row[k] < 0.5 ? 0 : 1;
  for (int s = 0; s < kOpSlots; ++s) {
    const double v = row[kEdgeGenes + s];
    g.ops[s] = v < 1.0 / 3.0 ? Op::kConv3x3 : (v < 2.0 / 3.0 ? Op::kConv1x1 : Op::kMaxPool3x3);
  }
  return g;
}

inline SampleSet sample_lhs(std::size_t n, Rng& rng) {
  if (n == 0) throw std::invalid_argument("sample_lhs: n must be >= 1");
  SampleSet set;
  set.method = SampleMethod::kLhs;
  for (const auto& row : latin_hypercube(n, kGenomeLength, rng)) {
    set.genomes.push_back(genome_from_unit(row));
    set.cells.push_back(genome_to_cell(set.genomes.back()));
  }
  return set;
}

inline SampleSet sample_lhs(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  SampleSet set = sample_lhs(n, rng);
  set.seed = seed;
  return set;
}

}  // namespace nasinit
