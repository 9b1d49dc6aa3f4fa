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
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "nasinit/bench_data.hpp"
#include "nasinit/bgm.hpp"
#include "nasinit/cluster.hpp"
#include "nasinit/dimred.hpp"
#include "nasinit/evo.hpp"
#include "nasinit/init.hpp"
#include "nasinit/io.hpp"
#include "nasinit/report.hpp"
#include "nasinit/sampling.hpp"
#include "nasinit/stats.hpp"

namespace nasinit {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
  std::filesystem::path benchmark;  // empty: deterministic surrogate
  std::filesystem::path workdir = "nasinit_run";
  Encoding encoding = Encoding::kShort;
  std::size_t sample_size = 1000;
  Reducer reducer = Reducer::kTsvd;
  int components = 2;
  std::string cluster_method = "bgm";  // bgm | kmeans
  int truncation = 0;                  // 0: 30 for short, 40 for long
  int n_clusters = 19;                 // kmeans only
  int cluster_max_iter = 500;
  int kmeans_n_init = 50;
  int bgm_n_init = 1;
  std::vector<Algo> algos{Algo::kEa};
  std::vector<InitMethod> inits{InitMethod::kCentroids, InitMethod::kRand, InitMethod::kLhs};
  std::vector<int> budgets{36, 108};
  int runs = 10;
  int pop_size = 0;     // 0: centroid count when centroids are searched, else 19 / 13
  int generations = 0;  // 0: 104 for short, 152 for long
  std::uint64_t seed = 0;
  int workers = 0;  // 0: hardware concurrency

  int effective_truncation() const {
    return truncation > 0 ? truncation : (encoding == Encoding::kShort ? 30 : 40);
  }
  int effective_generations() const {
    return generations > 0 ? generations : (encoding == Encoding::kShort ? 104 : 152);
  }
};

class PipelineError : public std::runtime_error {
 public:
  PipelineError(const std::string& stage, const std::string& cause)
      : std::runtime_error("stage " + stage + ": " + cause), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  std::filesystem::path manifest;
  std::size_t centroid_count = 0;
  int pop_size = 0;
  long max_evaluations = 0;
  std::size_t trace_files = 0;
  json summary;
};

inline std::string run_label(Algo algo, InitMethod init, int budget, int run) {
  return std::string(algo_name(algo)) + '/' + std::string(init_method_name(init)) + '/' +
         std::to_string(budget) + '/' + std::to_string(run);
}

// Effective seed of one search run: global seed XOR FNV-1a of its label.
inline std::uint64_t run_seed(std::uint64_t seed, Algo algo, InitMethod init, int budget, int run) {
  return seed ^ stable_hash(run_label(algo, init, budget, run));
}

inline std::uint64_t stage_seed(std::uint64_t seed, std::string_view stage) {
  return seed ^ stable_hash(stage);
}

inline json config_to_json(const PipelineConfig& c) {
  json algos = json::array(), inits = json::array();
  for (auto a : c.algos) algos.push_back(std::string(algo_name(a)));
  for (auto i : c.inits) inits.push_back(std::string(init_method_name(i)));
  return {{"benchmark", c.benchmark.empty() ? "surrogate" : c.benchmark.generic_string()},
          {"encoding", std::string(encoding_name(c.encoding))},
          {"sample_size", c.sample_size},
          {"reducer", std::string(reducer_name(c.reducer))},
          {"components", c.components},
          {"cluster_method", c.cluster_method},
          {"truncation", c.effective_truncation()},
          {"n_clusters", c.n_clusters},
          {"cluster_max_iter", c.cluster_max_iter},
          {"kmeans_n_init", c.kmeans_n_init},
          {"bgm_n_init", c.bgm_n_init},
          {"algos", algos},
          {"inits", inits},
          {"budgets", c.budgets},
          {"runs", c.runs},
          {"pop_size", c.pop_size},
          {"generations", c.effective_generations()},
          {"seed", c.seed}};
}

namespace detail {

template <typename F>
auto stage(const std::string& name, F&& body) {
  try {
    return body();
  } catch (const PipelineError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineError(name, e.what());
  }
}

// Runs task(i) for i in [0, n) on at most `workers` threads; the first
// failure by index is rethrown after all threads join.
template <typename Task>
void parallel_for(std::size_t n, int workers, Task task) {
  const auto hw = std::max(1u, std::thread::hardware_concurrency());
  const auto count = static_cast<std::size_t>(
      std::clamp<long>(workers > 0 ? workers : static_cast<long>(hw), 1L, static_cast<long>(std::max<std::size_t>(n, 1))));
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < count; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

inline std::uint64_t file_hash(const std::filesystem::path& p) {
  auto is = open_input(p);
  std::ostringstream ss;
  ss << is.rdbuf();
  return stable_hash(ss.str());
}

struct SearchTask {
  Algo algo;
  InitMethod init;
  int budget;
  int run;
  std::uint64_t seed;
};

inline std::string group_name(Algo algo, InitMethod init, int budget) {
  return std::string(algo_name(algo)) + '_' + std::string(init_method_name(init)) + '_' +
         std::to_string(budget);
}

inline std::string padded(int run) {
  std::string id = std::to_string(run);
  if (id.size() < 3) id.insert(0, 3 - id.size(), '0');
  return id;
}

inline double median_of(std::vector<double> v) { return box_summary(std::move(v)).median; }

template <Benchmark B>
PipelineResult run_with(const PipelineConfig& cfg, const B& bench) {
  namespace fs = std::filesystem;
  const fs::path root = cfg.workdir;
  fs::create_directories(root);
  PipelineResult result;

  const SampleSet samples = stage("sample", [&] {
    SampleSet s = sample_uniform(cfg.sample_size, stage_seed(cfg.seed, "sample"));
    auto os = open_output(root / "samples.jsonl");
    write_samples(s, os);
    return s;
  });

  const Eigen::MatrixXd features = stage("encode", [&] {
    Eigen::MatrixXd x = encode_samples(samples, cfg.encoding, bench);
    auto os = open_output(root / "features.csv");
    write_matrix_csv(x, os, "f");
    return x;
  });

  const Eigen::MatrixXd reduced = stage("reduce", [&] {
    const ReductionModel model = fit_reducer(cfg.reducer, features, cfg.components);
    write_json_file(root / "reducer.json", reduction_to_json(model));
    Eigen::MatrixXd z = transform(model, features);
    auto os = open_output(root / "reduced.csv");
    write_matrix_csv(z, os, "z");
    return z;
  });

  const Centroids centroids = stage("cluster", [&] {
    Rng rng(stage_seed(cfg.seed, "cluster"));
    std::vector<int> labels;
    Centroids c;
    if (cfg.cluster_method == "bgm") {
      const BgmModel m = bgm_fit(reduced, rng,
                                 {.truncation = cfg.effective_truncation(),
                                  .max_iter = cfg.cluster_max_iter,
                                  .n_init = cfg.bgm_n_init});
      write_json_file(root / "cluster_model.json", bgm_to_json(m));
      labels = m.labels();
      c = extract_centroids(m);
    } else if (cfg.cluster_method == "kmeans") {
      auto [m, assignment] = kmeans_fit(reduced, cfg.n_clusters, rng,
                                        {.n_init = cfg.kmeans_n_init, .max_iter = cfg.cluster_max_iter});
      write_json_file(root / "cluster_model.json", kmeans_to_json(m));
      labels = assignment.labels;
      c = extract_centroids(m);
    } else {
      throw std::invalid_argument("unknown cluster method '" + cfg.cluster_method + "'");
    }
    auto os = open_output(root / "labels.csv");
    os << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels[i] << '\n';
    return c;
  });
  result.centroid_count = static_cast<std::size_t>(centroids.points.rows());

  const bool use_centroids =
      std::find(cfg.inits.begin(), cfg.inits.end(), InitMethod::kCentroids) != cfg.inits.end();
  const InitialPopulation centroid_pop = stage("extract-init", [&] {
    InitialPopulation pop = centroids_to_population(centroids, samples, reduced);
    auto os = open_output(root / "init_centroids.jsonl");
    write_population(pop, os);
    return pop;
  });

  const int default_pop = cfg.encoding == Encoding::kShort ? 19 : 13;
  result.pop_size = cfg.pop_size > 0 ? cfg.pop_size
                    : use_centroids  ? static_cast<int>(centroid_pop.size())
                                     : default_pop;
  result.max_evaluations = static_cast<long>(result.pop_size) * (cfg.effective_generations() + 1);
  if (use_centroids && static_cast<int>(centroid_pop.size()) != result.pop_size)
    throw PipelineError("extract-init", "centroid population has " +
                                            std::to_string(centroid_pop.size()) +
                                            " cells but pop_size is " +
                                            std::to_string(result.pop_size));

  std::vector<SearchTask> tasks;
  for (Algo a : cfg.algos)
    for (InitMethod i : cfg.inits)
      for (int b : cfg.budgets)
        for (int r = 0; r < cfg.runs; ++r) tasks.push_back({a, i, b, r, run_seed(cfg.seed, a, i, b, r)});

  std::vector<SearchTrace> traces(tasks.size());
  std::vector<InitialPopulation> pops(tasks.size());
  stage("search", [&] {
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t t) {
      const auto& task = tasks[t];
      SearchConfig sc = SearchConfig::defaults(task.algo, cfg.encoding);
      sc.budget = task.budget;
      sc.pop_size = result.pop_size;
      sc.max_evaluations = result.max_evaluations;
      sc.tournament_k = std::min(sc.tournament_k, result.pop_size);
      sc.seed = task.seed;
      sc.init = task.init;
      Rng init_rng(task.seed ^ stable_hash("init"));
      switch (task.init) {
        case InitMethod::kCentroids: pops[t] = centroid_pop; break;
        case InitMethod::kRand: pops[t] = init_random(result.pop_size, init_rng); break;
        case InitMethod::kLhs: pops[t] = init_lhs(result.pop_size, init_rng); break;
      }
      traces[t] = run_search(sc, bench, pops[t]);
    });
    return 0;
  });

  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < tasks.size(); ++t)
    groups[group_name(tasks[t].algo, tasks[t].init, tasks[t].budget)].push_back(t);

  stage("report", [&] {
    for (std::size_t t = 0; t < tasks.size(); ++t) {
      if (tasks[t].init == InitMethod::kCentroids) continue;
      auto os = open_output(root / "populations" /
                            (group_name(tasks[t].algo, tasks[t].init, tasks[t].budget) + "_run" +
                             padded(tasks[t].run) + ".jsonl"));
      write_population(pops[t], os);
    }
    for (const auto& [name, idx] : groups) {
      std::vector<SearchTrace> runs;
      std::vector<CellSpec> best;
      for (auto t : idx) {
        runs.push_back(traces[t]);
        if (is_valid(traces[t].best_cell)) best.push_back(traces[t].best_cell);
      }
      result.trace_files += export_traces(runs, root / "traces", name, TraceLayout::kPerGroup).trace_files.size();
      auto os = open_output(root / "occurrence" / (name + ".csv"));
      write_occurrence_csv(occurrence_matrix(best), os);
    }
    return 0;
  });

  stage("stats", [&] {
    auto os = open_output(root / "stats.csv");
    os << "algo,budget,metric,init_a,init_b,n_a,n_b,median_a,median_b,statistic,p_value,method\n";
    json comparisons = json::array();
    for (Algo a : cfg.algos) {
      for (int b : cfg.budgets) {
        for (std::size_t x = 0; x < cfg.inits.size(); ++x) {
          for (std::size_t y = x + 1; y < cfg.inits.size(); ++y) {
            const auto& ga = groups.at(group_name(a, cfg.inits[x], b));
            const auto& gb = groups.at(group_name(a, cfg.inits[y], b));
            for (const char* metric : {"test_acc", "initial_mean_fit"}) {
              std::vector<double> va, vb;
              auto pick = [&](std::size_t t) {
                return std::string(metric) == "test_acc" ? traces[t].test_acc
                                                         : traces[t].rows.front().mean_fit;
              };
              for (auto t : ga) va.push_back(pick(t));
              for (auto t : gb) vb.push_back(pick(t));
              const auto r = wilcoxon_rank_sum(va, vb);
              const double ma = median_of(va), mb = median_of(vb);
              os << algo_name(a) << ',' << b << ',' << metric << ','
                 << init_method_name(cfg.inits[x]) << ',' << init_method_name(cfg.inits[y]) << ','
                 << va.size() << ',' << vb.size() << ',' << format_double(ma) << ','
                 << format_double(mb) << ',' << format_double(r.statistic) << ','
                 << format_double(r.two_sided_p) << ',' << rank_sum_method_name(r.method) << '\n';
              comparisons.push_back({{"algo", std::string(algo_name(a))},
                                     {"budget", b},
                                     {"metric", metric},
                                     {"init_a", std::string(init_method_name(cfg.inits[x]))},
                                     {"init_b", std::string(init_method_name(cfg.inits[y]))},
                                     {"median_a", ma},
                                     {"median_b", mb},
                                     {"p", r.two_sided_p}});
            }
          }
        }
      }
    }
    result.summary = {{"centroids", result.centroid_count},
                      {"pop_size", result.pop_size},
                      {"max_evaluations", result.max_evaluations},
                      {"runs", tasks.size()},
                      {"comparisons", comparisons}};
    return 0;
  });

  stage("manifest", [&] {
    json runs = json::array();
    for (const auto& t : tasks)
      runs.push_back({{"label", run_label(t.algo, t.init, t.budget, t.run)}, {"seed", t.seed}});
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() != "manifest.json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    json artifacts = json::array();
    for (const auto& f : files)
      artifacts.push_back({{"path", fs::relative(f, root).generic_string()},
                           {"bytes", fs::file_size(f)},
                           {"fnv1a", file_hash(f)}});
    const json manifest{{"tool", "nasinit"},
                        {"version", kVersion},
                        {"config", config_to_json(cfg)},
                        {"seeds",
                         {{"global", cfg.seed},
                          {"sample", stage_seed(cfg.seed, "sample")},
                          {"cluster", stage_seed(cfg.seed, "cluster")},
                          {"runs", runs}}},
                        {"pop_size", result.pop_size},
                        {"max_evaluations", result.max_evaluations},
                        {"summary", result.summary},
                        {"artifacts", artifacts}};
    result.manifest = root / "manifest.json";
    write_json_file(result.manifest, manifest);
    return 0;
  });
  return result;
}

}  // namespace detail

// Runs every stage into cfg.workdir. Stage failures surface as PipelineError
// naming the stage; artifacts written before the failure are kept.
inline PipelineResult run_pipeline(const PipelineConfig& cfg) {
  if (cfg.runs < 1) throw PipelineError("config", "runs must be >= 1");
  if (cfg.algos.empty() || cfg.inits.empty() || cfg.budgets.empty())
    throw PipelineError("config", "search matrix is empty");
  if (cfg.benchmark.empty()) return detail::run_with(cfg, SurrogateBenchmark{});
  const BenchmarkTable table =
      detail::stage("load", [&] { return BenchmarkTable::load(cfg.benchmark.string()); });
  return detail::run_with(cfg, table);
}

}  // namespace nasinit
