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
#include <cstdint>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nasinit/arch_space.hpp"
#include "nasinit/bench_data.hpp"
#include "nasinit/init.hpp"
#include "nasinit/random.hpp"
#include "nasinit/sampling.hpp"

namespace nasinit {

enum class Algo { kGa, kEa, kAe, kRs };

inline std::string_view algo_name(Algo a) {
  switch (a) {
    case Algo::kGa: return "ga";
    case Algo::kEa: return "ea";
    case Algo::kAe: return "ae";
    case Algo::kRs: return "rs";
  }
  return "ga";
}

inline Algo algo_from_name(std::string_view s) {
  if (s == "ga") return Algo::kGa;
  if (s == "ea") return Algo::kEa;
  if (s == "ae") return Algo::kAe;
  if (s == "rs") return Algo::kRs;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "'");
}

struct Individual {
  Genome genome;
  double fitness = 0.0;
  long birth_index = 0;
};

struct SearchConfig {
  Algo algo = Algo::kGa;
  int budget = 108;
  int pop_size = 19;
  long max_evaluations = 1995;
  double cx_p = 0.5;
  double mut_p = 0.2;
  double ind_pb = 0.05;
  int tournament_k = 10;
  std::uint64_t seed = 0;
  InitMethod init = InitMethod::kRand;

  // Per-algorithm defaults; Long-encoding experiments run smaller populations.
  static SearchConfig defaults(Algo algo, Encoding encoding = Encoding::kShort) {
    SearchConfig c;
    c.algo = algo;
    if (algo == Algo::kEa) {
      c.mut_p = 0.8;
      c.ind_pb = 0.1;
    }
    if (encoding == Encoding::kLong) {
      c.pop_size = 13;
      c.max_evaluations = 1989;
    }
    return c;
  }
};

struct TraceRow {
  int generation = 0;
  long evaluations = 0;
  double mean_fit = 0.0;
  double min_fit = 0.0;
  double max_fit = 0.0;
  double best_so_far = 0.0;
};

struct SearchTrace {
  std::vector<TraceRow> rows;
  Genome best_genome;
  CellSpec best_cell;
  double valid_acc = 0.0;
  double test_acc = 0.0;
  long evaluations = 0;
};

// Picks two distinct members uniformly; the fitter wins, the first drawn on ties.
inline const Individual& binary_tournament(const std::vector<Individual>& pop, Rng& rng) {
  if (pop.size() < 2) throw std::invalid_argument("binary_tournament: population needs >= 2");
  const auto i = rng.below(pop.size());
  auto j = rng.below(pop.size() - 1);
  if (j >= i) ++j;
  return pop[j].fitness > pop[i].fitness ? pop[j] : pop[i];
}

namespace detail {

// Genes 0..20 are edges, 21..25 ops.
inline void copy_gene(Genome& dst, const Genome& src, int gene) {
  if (gene < kEdgeGenes) dst.edges[gene] = src.edges[gene];
  else dst.ops[gene - kEdgeGenes] = src.ops[gene - kEdgeGenes];
}

inline Op next_op(Op op) {
  switch (op) {
    case Op::kConv3x3: return Op::kConv1x1;
    case Op::kConv1x1: return Op::kMaxPool3x3;
    default: return Op::kConv3x3;
  }
}

}  // namespace detail

inline Genome single_point_crossover(const Genome& p1, const Genome& p2, double cx_p, Rng& rng) {
  if (!rng.bernoulli(cx_p)) return rng.bernoulli(0.5) ? p1 : p2;
  const int cut = 1 + static_cast<int>(rng.below(kGenomeLength - 1));
  Genome child = p1;
  for (int gene = cut; gene < kGenomeLength; ++gene) detail::copy_gene(child, p2, gene);
  return child;
}

// Bit-flip on edges, round-robin on ops.
inline Genome mutate_genome(Genome g, double mut_p, double ind_pb, Rng& rng) {
  if (!rng.bernoulli(mut_p)) return g;
  for (auto& bit : g.edges)
    if (rng.bernoulli(ind_pb)) bit ^= 1;
  for (auto& op : g.ops)
    if (rng.bernoulli(ind_pb)) op = detail::next_op(op);
  return g;
}

inline constexpr int kAeMutationAttempts = 100;

// Toggles one edge gene and moves one op gene to a different op; retried
// until the decoded cell is valid, else the input comes back unchanged.
inline Genome ae_mutate(const Genome& g, Rng& rng) {
  for (int attempt = 0; attempt < kAeMutationAttempts; ++attempt) {
    Genome child = g;
    child.edges[rng.below(kEdgeGenes)] ^= 1;
    auto& op = child.ops[rng.below(kOpSlots)];
    Op others[2];
    int n = 0;
    for (Op o : kIntermediateOps)
      if (o != op) others[n++] = o;
    op = others[rng.below(2)];
    if (is_valid(genome_to_cell(child))) return child;
  }
  return g;
}

inline CellSpec ae_mutate(const CellSpec& cell, Rng& rng) {
  require_valid(cell, "ae_mutate");
  return genome_to_cell(ae_mutate(cell_to_genome(cell), rng));
}

namespace detail {

template <Benchmark B>
class Evaluator {
 public:
  Evaluator(const B& bench, int budget) : bench_(bench), budget_(budget) { budget_index(budget); }

  // Invalid decodes score 0 but still consume an evaluation.
  Individual operator()(const Genome& g) {
    Individual ind{g, 0.0, count_};
    ++count_;
    const CellSpec cell = genome_to_cell(g);
    if (is_valid(cell)) ind.fitness = bench_.query(cell, budget_, Metric::kValid);
    return ind;
  }

  long count() const { return count_; }

 private:
  const B& bench_;
  int budget_;
  long count_ = 0;
};

inline TraceRow summarize(const std::vector<Individual>& pop, int generation, long evaluations,
                          double best) {
  TraceRow row{generation, evaluations, 0.0, std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity(), best};
  for (const auto& ind : pop) {
    row.mean_fit += ind.fitness;
    row.min_fit = std::min(row.min_fit, ind.fitness);
    row.max_fit = std::max(row.max_fit, ind.fitness);
  }
  row.mean_fit /= static_cast<double>(pop.size());
  return row;
}

inline void require_population(const SearchConfig& cfg, const InitialPopulation& init) {
  if (cfg.pop_size < 2) throw std::invalid_argument("search: pop_size must be >= 2");
  if (init.genomes.size() != static_cast<std::size_t>(cfg.pop_size))
    throw std::invalid_argument("search: initial population has " +
                                std::to_string(init.genomes.size()) + " members, expected " +
                                std::to_string(cfg.pop_size));
  if (cfg.max_evaluations < cfg.pop_size)
    throw std::invalid_argument("search: max_evaluations below pop_size");
}

template <Benchmark B>
void finish(SearchTrace& trace, const Individual& best, const B& bench, int budget, long evals) {
  trace.best_genome = best.genome;
  trace.best_cell = genome_to_cell(best.genome);
  trace.valid_acc = best.fitness;
  trace.test_acc =
      is_valid(trace.best_cell) ? bench.query(trace.best_cell, budget, Metric::kTest) : 0.0;
  trace.evaluations = evals;
}

template <Benchmark B>
std::vector<Individual> evaluate_initial(const InitialPopulation& init, Evaluator<B>& eval) {
  std::vector<Individual> pop;
  pop.reserve(init.genomes.size());
  for (const auto& g : init.genomes) pop.push_back(eval(g));
  return pop;
}

inline const Individual& fittest(const std::vector<Individual>& pop) {
  return *std::max_element(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
    return a.fitness < b.fitness;
  });
}

}  // namespace detail

// Generational GA: tournament pairs, single-point crossover, mutation,
// full replacement. A batch runs only if it fits in the remaining budget.
template <Benchmark B>
SearchTrace ga_run(const SearchConfig& cfg, const B& bench, const InitialPopulation& init) {
  detail::require_population(cfg, init);
  Rng rng(cfg.seed);
  detail::Evaluator<B> eval(bench, cfg.budget);
  auto pop = detail::evaluate_initial(init, eval);
  Individual best = detail::fittest(pop);
  SearchTrace trace;
  trace.rows.push_back(detail::summarize(pop, 0, eval.count(), best.fitness));
  for (int gen = 1; eval.count() + cfg.pop_size <= cfg.max_evaluations; ++gen) {
    std::vector<Genome> children;
    children.reserve(pop.size());
    for (int i = 0; i < cfg.pop_size; ++i) {
      const Individual& a = binary_tournament(pop, rng);
      const Individual& b = binary_tournament(pop, rng);
      children.push_back(single_point_crossover(a.genome, b.genome, cfg.cx_p, rng));
    }
    std::vector<Individual> next;
    next.reserve(pop.size());
    for (auto& child : children)
      next.push_back(eval(mutate_genome(child, cfg.mut_p, cfg.ind_pb, rng)));
    pop = std::move(next);
    const Individual& top = detail::fittest(pop);
    if (top.fitness > best.fitness) best = top;
    trace.rows.push_back(detail::summarize(pop, gen, eval.count(), best.fitness));
  }
  detail::finish(trace, best, bench, cfg.budget, eval.count());
  return trace;
}

// (mu + lambda): lambda uniform picks with replacement, mutated, pooled with
// the parents; the top mu survive, older first on equal fitness.
template <Benchmark B>
SearchTrace ea_run(const SearchConfig& cfg, const B& bench, const InitialPopulation& init) {
  detail::require_population(cfg, init);
  Rng rng(cfg.seed);
  detail::Evaluator<B> eval(bench, cfg.budget);
  auto pop = detail::evaluate_initial(init, eval);
  SearchTrace trace;
  double best = detail::fittest(pop).fitness;
  trace.rows.push_back(detail::summarize(pop, 0, eval.count(), best));
  const auto lambda = static_cast<std::size_t>(cfg.pop_size);
  for (int gen = 1; eval.count() + cfg.pop_size <= cfg.max_evaluations; ++gen) {
    std::vector<Genome> picks;
    picks.reserve(lambda);
    for (std::size_t i = 0; i < lambda; ++i) picks.push_back(pop[rng.below(pop.size())].genome);
    std::vector<Individual> pool = pop;
    for (const auto& g : picks) pool.push_back(eval(mutate_genome(g, cfg.mut_p, cfg.ind_pb, rng)));
    std::stable_sort(pool.begin(), pool.end(), [](const Individual& a, const Individual& b) {
      if (a.fitness != b.fitness) return a.fitness > b.fitness;
      return a.birth_index < b.birth_index;
    });
    pool.resize(pop.size());
    pop = std::move(pool);
    best = std::max(best, pop.front().fitness);
    trace.rows.push_back(detail::summarize(pop, gen, eval.count(), best));
  }
  detail::finish(trace, detail::fittest(pop), bench, cfg.budget, eval.count());
  return trace;
}

struct NoStepObserver {
  void operator()(long, const std::deque<Individual>&) const {}
};

// Aging evolution: the tournament winner's mutant joins the queue and the
// oldest member leaves. One row per pop_size steps plus the last step.
// observe(step, queue) runs after every step.
template <Benchmark B, typename Observer = NoStepObserver>
SearchTrace ae_run(const SearchConfig& cfg, const B& bench, const InitialPopulation& init,
                   Observer observe = {}) {
  detail::require_population(cfg, init);
  if (cfg.tournament_k < 1 || cfg.tournament_k > cfg.pop_size)
    throw std::invalid_argument("ae_run: tournament_k must lie in [1, pop_size]");
  Rng rng(cfg.seed);
  detail::Evaluator<B> eval(bench, cfg.budget);
  auto first = detail::evaluate_initial(init, eval);
  std::deque<Individual> queue(first.begin(), first.end());
  Individual best = detail::fittest(first);
  SearchTrace trace;
  auto snapshot = [&](int gen) {
    std::vector<Individual> pop(queue.begin(), queue.end());
    trace.rows.push_back(detail::summarize(pop, gen, eval.count(), best.fitness));
  };
  snapshot(0);
  long steps = 0;
  int gen = 0;
  while (eval.count() + 1 <= cfg.max_evaluations) {
    std::vector<std::size_t> picks =
        rng.sample_without_replacement(queue.size(), static_cast<std::size_t>(cfg.tournament_k));
    std::size_t winner = picks.front();
    for (std::size_t p : picks)
      if (queue[p].fitness > queue[winner].fitness) winner = p;
    Individual child = eval(ae_mutate(queue[winner].genome, rng));
    if (child.fitness > best.fitness) best = child;
    queue.push_back(std::move(child));
    queue.pop_front();
    ++steps;
    observe(steps, queue);
    if (steps % cfg.pop_size == 0) snapshot(++gen);
  }
  if (steps % cfg.pop_size != 0) snapshot(++gen);
  detail::finish(trace, best, bench, cfg.budget, eval.count());
  return trace;
}

// Independent uniform valid samples, reported in batches of pop_size.
template <Benchmark B>
SearchTrace rs_run(const SearchConfig& cfg, const B& bench) {
  if (cfg.max_evaluations < 1) throw std::invalid_argument("rs_run: max_evaluations must be >= 1");
  if (cfg.pop_size < 1) throw std::invalid_argument("rs_run: pop_size must be >= 1");
  Rng rng(cfg.seed);
  detail::Evaluator<B> eval(bench, cfg.budget);
  SearchTrace trace;
  Individual best;
  best.fitness = -1.0;
  std::vector<Individual> batch;
  int gen = 0;
  while (eval.count() < cfg.max_evaluations) {
    batch.push_back(eval(random_valid_genome(rng)));
    if (batch.back().fitness > best.fitness) best = batch.back();
    if (batch.size() == static_cast<std::size_t>(cfg.pop_size) ||
        eval.count() == cfg.max_evaluations) {
      trace.rows.push_back(detail::summarize(batch, gen++, eval.count(), best.fitness));
      batch.clear();
    }
  }
  detail::finish(trace, best, bench, cfg.budget, eval.count());
  return trace;
}

template <Benchmark B>
SearchTrace run_search(const SearchConfig& cfg, const B& bench, const InitialPopulation& init) {
  switch (cfg.algo) {
    case Algo::kGa: return ga_run(cfg, bench, init);
    case Algo::kEa: return ea_run(cfg, bench, init);
    case Algo::kAe: return ae_run(cfg, bench, init);
    case Algo::kRs: return rs_run(cfg, bench);
  }
  throw std::invalid_argument("run_search: unknown algorithm");
}

}  // namespace nasinit
