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

// nasinit: command-line front end for the sampling, clustering,
// initialization and search stages.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nasinit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace nasinit;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  fs::path workdir = ".";
  fs::path config;
};

// Flat `key = value` file (TOML syntax); keys are long flag names of the
// chosen subcommand or the global flags. Command-line flags win.
void apply_config(const fs::path& path, std::vector<CLI::App*> apps) {
  auto is = open_input(path);
  for (const auto& item : CLI::ConfigTOML().from_config(is)) {
    if (item.inputs.empty()) continue;
    const std::string key = item.fullname();
    bool known = false;
    for (CLI::App* app : apps) {
      CLI::Option* opt = app->get_option_no_throw("--" + key);
      if (!opt) continue;
      known = true;
      if (opt->count() > 0) break;
      opt->add_result(item.inputs);
      opt->run_callback();
      break;
    }
    if (!known) throw CLI::ConversionError("config " + path.string() + ": unknown key '" + key + "'");
  }
}

template <typename F>
auto with_benchmark(const fs::path& path, F&& body) {
  if (path.empty()) return body(SurrogateBenchmark{});
  const BenchmarkTable table = BenchmarkTable::load(path.string());
  return body(table);
}

fs::path in_workdir(const Globals& g, const fs::path& p) {
  return p.is_absolute() ? p : g.workdir / p;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');)
    if (!item.empty()) out.push_back(std::stod(item));
  return out;
}

// A CSV column by header name, or one number per line when the file has no
// such column.
std::vector<double> read_values(const fs::path& path, const std::string& column) {
  auto is = open_input(path);
  std::string header;
  std::getline(is, header);
  std::vector<std::string> names;
  std::stringstream hs(header);
  for (std::string n; std::getline(hs, n, ',');) names.push_back(n);
  const auto it = std::find(names.begin(), names.end(), column);
  std::vector<double> out;
  if (it == names.end()) {
    if (!header.empty()) out.push_back(std::stod(header));
    for (std::string line; std::getline(is, line);)
      if (!line.empty()) out.push_back(std::stod(line));
    return out;
  }
  const auto idx = static_cast<std::size_t>(it - names.begin());
  for (std::string line; std::getline(is, line);) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    for (std::size_t k = 0; k <= idx; ++k) std::getline(ls, cell, ',');
    out.push_back(std::stod(cell));
  }
  return out;
}

json index_metrics(const Eigen::MatrixXd& x, const std::vector<int>& labels) {
  json j;
  auto guarded = [&](const char* name, auto fn) {
    try {
      const double v = fn(x, labels);
      j[name] = std::isfinite(v) ? json(v) : json(format_double(v));
    } catch (const std::exception&) {
      j[name] = nullptr;
    }
  };
  guarded("silhouette", silhouette);
  guarded("calinski_harabasz", calinski_harabasz);
  guarded("davies_bouldin", davies_bouldin);
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Centroid-based initialization for evolutionary architecture search"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Global seed");
  app.add_option("--workdir", g.workdir, "Directory for outputs and relative inputs");
  app.add_option("--config", g.config, "Flat key = value file of flag defaults");

  // sample
  auto* sample = app.add_subcommand("sample", "Draw architectures from the search space");
  std::size_t sample_n = 1000;
  std::string sample_method = "uniform";
  fs::path sample_out = "samples.jsonl";
  sample->add_option("--n", sample_n, "Number of samples")->check(CLI::PositiveNumber);
  sample->add_option("--method", sample_method)->check(CLI::IsMember({"uniform", "lhs"}));
  sample->add_option("--out", sample_out);

  // encode
  auto* enc = app.add_subcommand("encode", "Encode samples as feature vectors");
  fs::path enc_samples = "samples.jsonl", enc_out = "features.csv", benchmark;
  std::string encoding = "short";
  enc->add_option("--samples", enc_samples);
  enc->add_option("--encoding", encoding)->check(CLI::IsMember({"short", "long"}));
  enc->add_option("--benchmark", benchmark, "JSON-lines table (default: surrogate)");
  enc->add_option("--out", enc_out);

  // reduce
  auto* red = app.add_subcommand("reduce", "Fit PCA or truncated SVD");
  fs::path red_in = "features.csv", red_model = "reducer.json", red_out = "reduced.csv";
  std::string reducer = "tsvd";
  int components = 2;
  red->add_option("--features", red_in);
  red->add_option("--reducer", reducer)->check(CLI::IsMember({"pca", "tsvd"}));
  red->add_option("--components", components)->check(CLI::PositiveNumber);
  red->add_option("--model-out", red_model);
  red->add_option("--out", red_out);

  // cluster
  auto* clu = app.add_subcommand("cluster", "Cluster reduced points");
  fs::path clu_in = "reduced.csv", clu_model = "cluster_model.json", clu_labels = "labels.csv";
  std::string method = "bgm";
  int k = 19, truncation = 30, max_iter = 500, n_init = 0, min_samples = 5;
  double eps = 0.3;
  clu->add_option("--input", clu_in);
  clu->add_option("--method", method)->check(CLI::IsMember({"kmeans", "dbscan", "bgm"}));
  clu->add_option("--k", k)->check(CLI::PositiveNumber);
  clu->add_option("--eps", eps);
  clu->add_option("--min-samples", min_samples);
  clu->add_option("--truncation", truncation)->check(CLI::PositiveNumber);
  clu->add_option("--max-iter", max_iter)->check(CLI::PositiveNumber);
  clu->add_option("--n-init", n_init, "Restarts (kmeans default 50, bgm default 1)");
  clu->add_option("--model-out", clu_model);
  clu->add_option("--labels-out", clu_labels);

  // calibrate
  auto* cal = app.add_subcommand("calibrate", "Sweep encodings, reducers and cluster counts");
  std::vector<std::string> cal_enc{"short"}, cal_red{"tsvd"};
  std::vector<int> cal_comp{2}, cal_k{5, 10, 15, 20, 25, 30};
  std::vector<std::size_t> cal_n{1000};
  int cal_n_init = 50;
  fs::path cal_out = "calibration.csv";
  cal->add_option("--encodings", cal_enc)->delimiter(',');
  cal->add_option("--reducers", cal_red)->delimiter(',');
  cal->add_option("--components", cal_comp)->delimiter(',');
  cal->add_option("--sample-sizes", cal_n)->delimiter(',');
  cal->add_option("--clusters", cal_k)->delimiter(',');
  cal->add_option("--n-init", cal_n_init)->check(CLI::PositiveNumber);
  cal->add_option("--benchmark", benchmark);
  cal->add_option("--out", cal_out);

  // extract-init
  auto* ext = app.add_subcommand("extract-init", "Map cluster centroids to sampled cells");
  fs::path ext_model = "cluster_model.json", ext_samples = "samples.jsonl",
           ext_reduced = "reduced.csv", ext_out = "init_centroids.jsonl";
  ext->add_option("--model", ext_model);
  ext->add_option("--samples", ext_samples);
  ext->add_option("--reduced", ext_reduced);
  ext->add_option("--out", ext_out);

  // search
  auto* sea = app.add_subcommand("search", "Run GA / EA / AE / RS on the benchmark");
  std::string algo = "ea", init = "rand";
  int budget = 108, runs = 1, pop_size = 0;
  long max_evals = 0;
  fs::path centroids;
  sea->add_option("--algo", algo)->check(CLI::IsMember({"ga", "ea", "ae", "rs"}));
  sea->add_option("--init", init)->check(CLI::IsMember({"rand", "lhs", "centroids"}));
  sea->add_option("--budget", budget)->check(CLI::IsMember({4, 12, 36, 108}));
  sea->add_option("--runs", runs)->check(CLI::PositiveNumber);
  sea->add_option("--max-evals", max_evals, "Default 1995 (short) / 1989 (long)");
  sea->add_option("--pop-size", pop_size, "Default 19 / 13, or the centroid count");
  sea->add_option("--centroids", centroids, "Population from extract-init");
  sea->add_option("--encoding", encoding)->check(CLI::IsMember({"short", "long"}));
  sea->add_option("--benchmark", benchmark);

  // stats
  auto* sta = app.add_subcommand("stats", "Wilcoxon rank-sum test of two samples");
  std::string a_list, b_list, column = "test_acc";
  fs::path a_file, b_file;
  sta->add_option("--a", a_list, "Comma-separated values");
  sta->add_option("--b", b_list, "Comma-separated values");
  sta->add_option("--a-file", a_file, "CSV (column --column) or one value per line");
  sta->add_option("--b-file", b_file);
  sta->add_option("--column", column);

  // report
  auto* rep = app.add_subcommand("report", "Occurrence matrix of found solutions");
  std::vector<fs::path> rep_in;
  fs::path rep_out = "occurrence.csv";
  rep->add_option("--summary", rep_in, "search_*.json files")->required();
  rep->add_option("--out", rep_out);

  // pipeline
  auto* pip = app.add_subcommand("pipeline", "Run every stage end to end");
  PipelineConfig pc;
  std::string p_enc = "short", p_red = "tsvd";
  std::vector<std::string> p_algos{"ea"}, p_inits{"centroids", "rand", "lhs"};
  pip->add_option("--benchmark", pc.benchmark);
  pip->add_option("--encoding", p_enc)->check(CLI::IsMember({"short", "long"}));
  pip->add_option("--sample-size", pc.sample_size)->check(CLI::PositiveNumber);
  pip->add_option("--reducer", p_red)->check(CLI::IsMember({"pca", "tsvd"}));
  pip->add_option("--components", pc.components)->check(CLI::PositiveNumber);
  pip->add_option("--cluster-method", pc.cluster_method)->check(CLI::IsMember({"bgm", "kmeans"}));
  pip->add_option("--truncation", pc.truncation, "0: 30 short / 40 long");
  pip->add_option("--n-clusters", pc.n_clusters);
  pip->add_option("--cluster-max-iter", pc.cluster_max_iter);
  pip->add_option("--kmeans-n-init", pc.kmeans_n_init);
  pip->add_option("--bgm-n-init", pc.bgm_n_init);
  pip->add_option("--algos", p_algos)->delimiter(',')->check(CLI::IsMember({"ga", "ea", "ae", "rs"}));
  pip->add_option("--inits", p_inits)->delimiter(',')->check(CLI::IsMember({"centroids", "rand", "lhs"}));
  pip->add_option("--budgets", pc.budgets)->delimiter(',')->check(CLI::IsMember({4, 12, 36, 108}));
  pip->add_option("--runs", pc.runs)->check(CLI::PositiveNumber);
  pip->add_option("--pop-size", pc.pop_size, "0: centroid count");
  pip->add_option("--generations", pc.generations, "0: 104 short / 152 long");
  pip->add_option("--workers", pc.workers, "0: hardware concurrency");

  try {
    app.parse(argc, argv);
    if (!g.config.empty()) {
      for (CLI::App* sub : app.get_subcommands()) apply_config(g.config, {sub, &app});
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    fs::create_directories(g.workdir);
    if (sample->parsed()) {
      Rng rng(g.seed);
      SampleSet set = sample_method == "lhs" ? sample_lhs(sample_n, rng) : sample_uniform(sample_n, rng);
      set.seed = g.seed;
      auto os = open_output(in_workdir(g, sample_out));
      write_samples(set, os);
      std::cout << json{{"samples", set.size()}, {"method", sample_method}, {"seed", g.seed}}.dump()
                << '\n';
    } else if (enc->parsed()) {
      auto is = open_input(in_workdir(g, enc_samples));
      const SampleSet set = read_samples(is);
      SampleSet valid;
      for (std::size_t i = 0; i < set.size(); ++i) {
        if (!is_valid(set.cells[i])) continue;
        valid.genomes.push_back(set.genomes[i]);
        valid.cells.push_back(set.cells[i]);
      }
      const Eigen::MatrixXd x = with_benchmark(benchmark, [&](const auto& bench) {
        return encode_samples(valid, encoding_from_name(encoding), bench);
      });
      auto os = open_output(in_workdir(g, enc_out));
      write_matrix_csv(x, os, "f");
      std::cout << json{{"rows", x.rows()}, {"cols", x.cols()}, {"skipped_invalid", set.size() - valid.size()}}.dump()
                << '\n';
    } else if (red->parsed()) {
      auto is = open_input(in_workdir(g, red_in));
      const Eigen::MatrixXd x = read_matrix_csv(is);
      const ReductionModel m = fit_reducer(reducer_from_name(reducer), x, components);
      write_json_file(in_workdir(g, red_model), reduction_to_json(m));
      auto os = open_output(in_workdir(g, red_out));
      write_matrix_csv(transform(m, x), os, "z");
      std::cout << json{{"reducer", reducer}, {"components", components},
                        {"singular_values", vector_to_json(m.singular_values)}}.dump()
                << '\n';
    } else if (clu->parsed()) {
      auto is = open_input(in_workdir(g, clu_in));
      const Eigen::MatrixXd x = read_matrix_csv(is);
      Rng rng(g.seed);
      std::vector<int> labels;
      json model;
      if (method == "kmeans") {
        auto [m, assignment] = kmeans_fit(x, k, rng, {.n_init = n_init > 0 ? n_init : 50, .max_iter = max_iter});
        labels = assignment.labels;
        model = kmeans_to_json(m);
      } else if (method == "dbscan") {
        const auto assignment = dbscan_fit(x, {eps, min_samples});
        labels = assignment.labels;
        model = {{"method", "dbscan"}, {"eps", eps}, {"min_samples", min_samples},
                 {"n_clusters", assignment.n_clusters}};
      } else {
        const BgmModel m = bgm_fit(x, rng, {.truncation = truncation, .max_iter = max_iter,
                                            .n_init = n_init > 0 ? n_init : 1});
        labels = m.labels();
        model = bgm_to_json(m);
      }
      write_json_file(in_workdir(g, clu_model), model);
      auto os = open_output(in_workdir(g, clu_labels));
      os << "index,label\n";
      for (std::size_t i = 0; i < labels.size(); ++i) os << i << ',' << labels[i] << '\n';
      json out = index_metrics(x, labels);
      out["method"] = method;
      std::cout << out.dump() << '\n';
    } else if (cal->parsed()) {
      CalibrationGrid grid;
      grid.encodings.clear();
      grid.reducers.clear();
      for (const auto& e : cal_enc) grid.encodings.push_back(encoding_from_name(e));
      for (const auto& r : cal_red) grid.reducers.push_back(reducer_from_name(r));
      grid.components = cal_comp;
      grid.sample_sizes = cal_n;
      grid.n_clusters = cal_k;
      const auto rows = with_benchmark(benchmark, [&](const auto& bench) {
        return calibration_sweep(grid.points(), g.seed, bench, {.n_init = cal_n_init, .max_iter = 500});
      });
      auto os = open_output(in_workdir(g, cal_out));
      write_calibration_csv(rows, os);
      std::cout << json{{"rows", rows.size()}, {"out", in_workdir(g, cal_out).generic_string()}}.dump()
                << '\n';
    } else if (ext->parsed()) {
      const Centroids c = centroids_from_model_json(read_json_file(in_workdir(g, ext_model)));
      auto ss = open_input(in_workdir(g, ext_samples));
      const SampleSet set = read_samples(ss);
      auto rs = open_input(in_workdir(g, ext_reduced));
      const Eigen::MatrixXd z = read_matrix_csv(rs);
      const InitialPopulation pop = centroids_to_population(c, set, z);
      auto os = open_output(in_workdir(g, ext_out));
      write_population(pop, os);
      std::cout << json{{"centroids", pop.size()}}.dump() << '\n';
    } else if (sea->parsed()) {
      const Encoding e = encoding_from_name(encoding);
      const Algo a = algo_from_name(algo);
      const InitMethod im = init_method_from_name(init);
      SearchConfig base = SearchConfig::defaults(a, e);
      InitialPopulation centroid_pop;
      if (im == InitMethod::kCentroids) {
        if (centroids.empty()) throw std::invalid_argument("--init centroids needs --centroids");
        auto is = open_input(in_workdir(g, centroids));
        centroid_pop = read_population(is);
        base.pop_size = static_cast<int>(centroid_pop.size());
      }
      if (pop_size > 0) base.pop_size = pop_size;
      if (max_evals > 0) base.max_evaluations = max_evals;
      base.budget = budget;
      base.init = im;
      base.tournament_k = std::min(base.tournament_k, base.pop_size);
      if (im == InitMethod::kCentroids && centroid_pop.size() != static_cast<std::size_t>(base.pop_size))
        throw std::invalid_argument("--pop-size must equal the centroid population size");
      std::vector<SearchTrace> traces;
      json run_list = json::array();
      with_benchmark(benchmark, [&](const auto& bench) {
        for (int r = 0; r < runs; ++r) {
          SearchConfig cfg = base;
          cfg.seed = run_seed(g.seed, a, im, budget, r);
          Rng init_rng(cfg.seed ^ stable_hash("init"));
          InitialPopulation pop = im == InitMethod::kCentroids ? centroid_pop
                                  : im == InitMethod::kLhs     ? init_lhs(cfg.pop_size, init_rng)
                                                               : init_random(cfg.pop_size, init_rng);
          traces.push_back(run_search(cfg, bench, pop));
          const auto& t = traces.back();
          run_list.push_back({{"run", r},
                              {"seed", cfg.seed},
                              {"evaluations", t.evaluations},
                              {"valid_acc", t.valid_acc},
                              {"test_acc", t.test_acc},
                              {"best_cell", cell_to_json(t.best_cell)}});
        }
        return 0;
      });
      const std::string group = algo + "_" + init + "_" + std::to_string(budget);
      const auto exp = export_traces(traces, in_workdir(g, "traces"), group);
      const json summary{{"group", group},
                         {"algo", algo},
                         {"init", init},
                         {"budget", budget},
                         {"pop_size", base.pop_size},
                         {"max_evaluations", base.max_evaluations},
                         {"seed", g.seed},
                         {"runs", run_list},
                         {"test_acc", {{"min", exp.test_acc.min},
                                       {"q1", exp.test_acc.q1},
                                       {"median", exp.test_acc.median},
                                       {"q3", exp.test_acc.q3},
                                       {"max", exp.test_acc.max}}}};
      write_json_file(in_workdir(g, "search_" + group + ".json"), summary);
      std::cout << json{{"group", group}, {"runs", runs}, {"test_acc", summary.at("test_acc")}}.dump()
                << '\n';
    } else if (sta->parsed()) {
      const auto va = a_file.empty() ? parse_list(a_list) : read_values(in_workdir(g, a_file), column);
      const auto vb = b_file.empty() ? parse_list(b_list) : read_values(in_workdir(g, b_file), column);
      const auto r = wilcoxon_rank_sum(va, vb);
      std::cout << json{{"statistic", r.statistic},
                        {"p", r.two_sided_p},
                        {"method", std::string(rank_sum_method_name(r.method))}}.dump()
                << '\n';
    } else if (rep->parsed()) {
      std::vector<CellSpec> cells;
      for (const auto& f : rep_in) {
        const json s = read_json_file(in_workdir(g, f));
        for (const auto& run : s.at("runs")) {
          CellSpec c = cell_from_json(run.at("best_cell"));
          if (is_valid(c)) cells.push_back(std::move(c));
        }
      }
      const auto m = occurrence_matrix(cells);
      auto os = open_output(in_workdir(g, rep_out));
      write_occurrence_csv(m, os);
      json counts = json::array();
      for (const auto& row : m.counts) counts.push_back(row);
      std::cout << json{{"n_solutions", m.n_solutions}, {"counts", counts}}.dump() << '\n';
    } else if (pip->parsed()) {
      pc.workdir = g.workdir;
      pc.seed = g.seed;
      pc.encoding = encoding_from_name(p_enc);
      pc.reducer = reducer_from_name(p_red);
      pc.algos.clear();
      pc.inits.clear();
      for (const auto& s : p_algos) pc.algos.push_back(algo_from_name(s));
      for (const auto& s : p_inits) pc.inits.push_back(init_method_from_name(s));
      const auto res = run_pipeline(pc);
      std::cout << res.summary.dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "nasinit: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
