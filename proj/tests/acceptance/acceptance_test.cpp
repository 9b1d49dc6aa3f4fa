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

// End-to-end acceptance gate. Prints one PASS/FAIL/SKIP line per criterion
// and exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nasinit/bench_data.hpp"
#include "nasinit/bgm.hpp"
#include "nasinit/cluster.hpp"
#include "nasinit/dimred.hpp"
#include "nasinit/evo.hpp"
#include "nasinit/init.hpp"
#include "nasinit/pipeline.hpp"
#include "nasinit/report.hpp"
#include "nasinit/sampling.hpp"
#include "nasinit/stats.hpp"
#include "support/oracles.hpp"

namespace {

using namespace nasinit;
namespace fs = std::filesystem;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict = Verdict::kPass;
  std::string detail;
};

// Collects failed checks; the first few messages end up in the report line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failed_;
    if (failed_ <= 3) messages_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  Outcome outcome() const {
    std::string d;
    for (const auto& n : notes_) d += (d.empty() ? "" : "; ") + n;
    for (const auto& m : messages_) d += (d.empty() ? "" : "; ") + ("FAILED " + m);
    if (failed_ > 3) d += "; +" + std::to_string(failed_ - 3) + " more";
    return {failed_ == 0 ? Verdict::kPass : Verdict::kFail, d};
  }

 private:
  int failed_ = 0;
  std::vector<std::string> messages_, notes_;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// Runs one criterion, enforcing its wall-clock limit (0: none).
bool report(int id, const std::string& name, double limit_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {Verdict::kFail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (out.verdict != Verdict::kSkip && limit_s > 0 && secs >= limit_s) {
    out.verdict = Verdict::kFail;
    out.detail += "; runtime " + fmt(secs, 3) + " s exceeds " + fmt(limit_s, 3) + " s";
  }
  const char* tag = out.verdict == Verdict::kPass ? "PASS" : out.verdict == Verdict::kFail ? "FAIL" : "SKIP";
  std::printf("[%s] %d %s (%.2f s): %s\n", tag, id, name.c_str(), secs, out.detail.c_str());
  std::fflush(stdout);
  return out.verdict != Verdict::kFail;
}

Outcome validity_indices() {
  Checks c;
  Eigen::MatrixXd x4(4, 2);
  x4 << 0, 0, 0, 1, 4, 0, 4, 1;
  const std::vector<int> l4 = {0, 0, 1, 1};
  const double s = silhouette(x4, l4), ch = calinski_harabasz(x4, l4), db = davies_bouldin(x4, l4);
  c.expect(std::abs(s - 0.753788) < 1e-6, "worked silhouette " + fmt(s, 10));
  c.expect(std::abs(ch - 32.0) < 1e-9, "worked CH " + fmt(ch, 10));
  c.expect(std::abs(db - 0.25) < 1e-9, "worked DB " + fmt(db, 10));
  c.note("worked example " + fmt(s) + " / " + fmt(ch) + " / " + fmt(db));

  Rng rng(20260101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 4 + static_cast<int>(rng.below(27));
    const int d = 1 + static_cast<int>(rng.below(4));
    const int k = 2 + static_cast<int>(rng.below(std::min(4, n / 2 - 1)));
    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) x(i, j) = 3.0 * rng.normal();
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) labels[i] = i < k ? i : static_cast<int>(rng.below(k));
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    const double e1 = rel(silhouette(x, labels), oracle::brute_silhouette(x, labels));
    const double e2 = rel(calinski_harabasz(x, labels), oracle::brute_calinski_harabasz(x, labels));
    const double e3 = rel(davies_bouldin(x, labels), oracle::brute_davies_bouldin(x, labels));
    worst = std::max({worst, e1, e2, e3});
    c.expect(e1 <= 1e-9 && e2 <= 1e-9 && e3 <= 1e-9, "trial " + std::to_string(trial));
  }
  c.note("100 random sets, worst deviation " + fmt(worst, 3));
  return c.outcome();
}

Outcome kmeans_recovery() {
  Checks c;
  int perfect = 0;
  bool monotone = true;
  for (int seed = 0; seed < 100; ++seed) {
    Rng data_rng(1000 + seed);
    const auto [x, truth] = oracle::blobs(data_rng, {{0, 0}, {5, 0}, {0, 5}}, 40, 0.1);
    Rng rng(seed);
    const auto [model, assignment] = kmeans_fit(x, 3, rng, {.n_init = 50, .max_iter = 500});
    if (oracle::adjusted_rand_index(assignment.labels, truth) == 1.0) ++perfect;
    c.expect(static_cast<int>(model.inertia_traces.size()) == 50, "restart count");
    for (const auto& trace : model.inertia_traces)
      for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[i - 1]) monotone = false;
  }
  c.expect(perfect >= 95, "ARI=1 in only " + std::to_string(perfect) + "/100");
  c.expect(monotone, "an inertia trace increased");
  c.note("ARI=1 in " + std::to_string(perfect) + "/100 seeds, inertia monotone in all restarts");
  return c.outcome();
}

Outcome dimension_reduction() {
  Checks c;
  Rng rng(77);
  auto random_matrix = [&](int r, int k) {
    Eigen::MatrixXd m(r, k);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < k; ++j) m(i, j) = rng.normal();
    return m;
  };

  double worst_recon = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = random_matrix(30, 2) * random_matrix(2, 6);
    const auto tsvd = fit_tsvd(x, 2);
    const Eigen::MatrixXd back = transform(tsvd, x) * tsvd.basis.transpose();
    worst_recon = std::max(worst_recon, (back - x).cwiseAbs().maxCoeff());
    // Rank 2 after centering: PCA must rebuild it through the mean.
    const Eigen::MatrixXd y = x.rowwise() + Eigen::RowVectorXd(random_matrix(1, 6));
    const auto pca = fit_pca(y, 2);
    const Eigen::MatrixXd pback =
        (transform(pca, y) * pca.basis.transpose()).rowwise() + pca.mean.transpose();
    worst_recon = std::max(worst_recon, (pback - y).cwiseAbs().maxCoeff());
  }
  c.expect(worst_recon < 1e-8, "rank-2 reconstruction error " + fmt(worst_recon, 3));
  c.note("rank-2 reconstruction max error " + fmt(worst_recon, 3));

  // Eckart-Young: the rank-k error must equal the discarded singular mass,
  // with singular values taken from an eigen-decomposition of X^T X.
  double worst_ey = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = random_matrix(6, 4);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x);
    std::vector<double> sq(eig.eigenvalues().data(), eig.eigenvalues().data() + 4);
    std::sort(sq.rbegin(), sq.rend());
    for (int k = 1; k <= 3; ++k) {
      const auto m = fit_tsvd(x, k);
      const double err = (x - transform(m, x) * m.basis.transpose()).squaredNorm();
      double tail = 0.0;
      for (int j = k; j < 4; ++j) tail += std::max(sq[j], 0.0);
      worst_ey = std::max(worst_ey, std::abs(err - tail));
      for (int j = 0; j < k; ++j)
        worst_ey = std::max(worst_ey, std::abs(m.singular_values(j) - std::sqrt(sq[j])));
    }
  }
  c.expect(worst_ey < 1e-8, "Eckart-Young deviation " + fmt(worst_ey, 3));
  c.note("Eckart-Young max deviation " + fmt(worst_ey, 3));

  double worst_eq = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd x = random_matrix(25, 5).rowwise() + Eigen::RowVectorXd(random_matrix(1, 5));
    const Eigen::MatrixXd xc = x.rowwise() - x.colwise().mean();
    const auto pca = fit_pca(x, 3);
    const auto tsvd = fit_tsvd(xc, 3);
    worst_eq = std::max(worst_eq, (transform(pca, x) - transform(tsvd, xc)).cwiseAbs().maxCoeff());
    worst_eq = std::max(worst_eq, (pca.basis - tsvd.basis).cwiseAbs().maxCoeff());
  }
  c.expect(worst_eq < 1e-8, "TSVD/PCA deviation " + fmt(worst_eq, 3));
  c.note("TSVD on centered data vs PCA max deviation " + fmt(worst_eq, 3));
  return c.outcome();
}

Outcome bgm_properties() {
  Checks c;
  int exact_three = 0;
  double worst_row = 0.0, worst_drop = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng data_rng(5000 + seed);
    const auto [x, truth] = oracle::blobs(data_rng, {{0, 0}, {6, 0}, {0, 6}}, 60, 0.5);
    Rng rng(seed);
    const BgmModel m = bgm_fit(x, rng, {.truncation = 10});
    for (Eigen::Index i = 0; i < m.responsibilities.rows(); ++i)
      worst_row = std::max(worst_row, std::abs(m.responsibilities.row(i).sum() - 1.0));
    for (std::size_t i = 1; i < m.elbo_trace.size(); ++i)
      worst_drop = std::max(worst_drop, m.elbo_trace[i - 1] - m.elbo_trace[i]);
    if (effective_components(m).size() == 3) ++exact_three;
  }
  c.expect(worst_row <= 1e-9, "row-sum deviation " + fmt(worst_row, 3));
  c.expect(worst_drop <= 1e-6, "ELBO decrease " + fmt(worst_drop, 3));
  c.expect(exact_three >= 80, "3 effective components in only " + std::to_string(exact_three) + "/100");
  c.note("row-sum dev " + fmt(worst_row, 3) + ", max ELBO drop " + fmt(worst_drop, 3) +
         ", 3 components in " + std::to_string(exact_three) + "/100 seeds");
  return c.outcome();
}

Outcome budget_accounting() {
  Checks c;
  const SurrogateBenchmark bench;
  for (Encoding enc : {Encoding::kShort, Encoding::kLong}) {
    for (Algo algo : {Algo::kGa, Algo::kEa}) {
      SearchConfig cfg = SearchConfig::defaults(algo, enc);
      cfg.seed = 3;
      Rng rng(4);
      const auto trace = run_search(cfg, bench, init_random(static_cast<std::size_t>(cfg.pop_size), rng));
      const long want_evals = enc == Encoding::kShort ? 1995 : 1989;
      const int want_gens = enc == Encoding::kShort ? 104 : 152;
      const std::string tag = std::string(algo_name(algo)) + "/" + std::string(encoding_name(enc));
      c.expect(trace.evaluations == want_evals, tag + " evaluations " + std::to_string(trace.evaluations));
      c.expect(trace.rows.back().generation == want_gens,
               tag + " generations " + std::to_string(trace.rows.back().generation));
      c.note(tag + " " + std::to_string(trace.evaluations) + " evals / " +
             std::to_string(trace.rows.back().generation) + " gens");
    }
  }
  SearchConfig ae = SearchConfig::defaults(Algo::kAe);
  ae.seed = 9;
  Rng rng(10);
  long steps = 0;
  bool constant = true;
  const auto trace = ae_run(ae, bench, init_random(19, rng), [&](long, const std::deque<Individual>& q) {
    ++steps;
    if (q.size() != 19) constant = false;
  });
  c.expect(constant, "AE population size changed");
  c.expect(trace.evaluations == 1995, "AE evaluations " + std::to_string(trace.evaluations));
  c.note("AE " + std::to_string(steps) + " steps, population constant at 19");
  return c.outcome();
}

Outcome wilcoxon() {
  Checks c;
  Rng rng(31);
  double worst = 0.0;
  for (int n = 1; n <= 7; ++n) {
    for (int m = 1; m <= 7; ++m) {
      for (int rep = 0; rep < 5; ++rep) {
        std::vector<double> pool(n + m);
        std::iota(pool.begin(), pool.end(), 1.0);
        rng.shuffle(pool);
        std::vector<double> a(pool.begin(), pool.begin() + n), b(pool.begin() + n, pool.end());
        const auto r = wilcoxon_rank_sum(a, b);
        c.expect(r.method == RankSumMethod::kExact, "exact path not used");
        worst = std::max(worst, std::abs(r.two_sided_p - oracle::enumerated_rank_sum_p(a, b)));
      }
    }
  }
  c.expect(worst <= 1e-12, "exact vs enumeration " + fmt(worst, 3));
  const double p = wilcoxon_rank_sum({1, 2, 3}, {4, 5, 6}).two_sided_p;
  c.expect(std::abs(p - 0.1) < 1e-12, "[1,2,3] vs [4,5,6] gives " + fmt(p, 10));

  // Null distribution of the rank sum for n = m = 20 by simulation.
  constexpr int kDraws = 1'000'000;
  std::vector<int> ranks(40);
  std::iota(ranks.begin(), ranks.end(), 1);
  std::vector<long> hist(20 * 41 + 1, 0);
  for (int d = 0; d < kDraws; ++d) {
    rng.shuffle(ranks);
    ++hist[std::accumulate(ranks.begin(), ranks.begin() + 20, 0)];
  }
  const double mean = 20 * 41 / 2.0;
  double worst_mc = 0.0;
  for (int shift = 0; shift <= 14; shift += 2) {
    std::vector<double> a(20), b(20);
    for (int i = 0; i < 20; ++i) {
      a[i] = i + 0.5 * shift + 0.01;
      b[i] = i;
    }
    const auto r = wilcoxon_rank_sum(a, b);
    c.expect(r.method == RankSumMethod::kNormalApprox, "normal path not used at n=m=20");
    long extreme = 0;
    for (std::size_t w = 0; w < hist.size(); ++w)
      if (std::abs(static_cast<double>(w) - mean) >= std::abs(r.statistic - mean) - 1e-9) extreme += hist[w];
    worst_mc = std::max(worst_mc, std::abs(r.two_sided_p - static_cast<double>(extreme) / kDraws));
  }
  c.expect(worst_mc <= 0.02, "normal approx vs Monte-Carlo " + fmt(worst_mc, 3));
  c.note("exact max dev " + fmt(worst, 3) + ", [1,2,3]|[4,5,6] p=" + fmt(p) +
         ", normal vs MC max dev " + fmt(worst_mc, 3));
  return c.outcome();
}

Outcome surrogate_end_to_end() {
  Checks c;
  const SurrogateBenchmark bench;
  const int budget = 108;
  int wins = 0;
  double gap_sum = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    const std::uint64_t s = 7000 + static_cast<std::uint64_t>(seed);
    const SampleSet samples = sample_uniform(1000, stage_seed(s, "sample"));
    const Eigen::MatrixXd features = encode_samples(samples, Encoding::kShort, bench);
    const auto reducer = fit_tsvd(features, 2);
    const Eigen::MatrixXd reduced = transform(reducer, features);
    Rng cluster_rng(stage_seed(s, "cluster"));
    const BgmModel model = bgm_fit(reduced, cluster_rng, {.truncation = 30});
    const InitialPopulation cent = centroids_to_population(extract_centroids(model), samples, reduced);
    Rng init_rng(s ^ stable_hash("init"));
    const InitialPopulation rand = init_random(cent.size(), init_rng);
    auto mean_fit = [&](const InitialPopulation& p) {
      double t = 0.0;
      for (const auto& cell : p.cells) t += bench.query(cell, budget, Metric::kValid);
      return t / static_cast<double>(p.size());
    };
    const double gap = mean_fit(cent) - mean_fit(rand);
    gap_sum += gap;
    if (gap >= 0.0) ++wins;
  }
  c.expect(wins >= 90, "centroid init >= random in only " + std::to_string(wins) + "/100");
  c.note("centroid >= random initial mean in " + std::to_string(wins) + "/100, mean gap " +
         fmt(gap_sum / 100, 3));

  const double target = 0.95 * surrogate_optimum(budget);
  for (Algo algo : {Algo::kEa, Algo::kGa, Algo::kAe}) {
    int hits = 0;
    for (int seed = 0; seed < 100; ++seed) {
      SearchConfig cfg = SearchConfig::defaults(algo);
      cfg.budget = budget;
      cfg.seed = run_seed(11, algo, InitMethod::kRand, budget, seed);
      Rng init_rng(cfg.seed ^ stable_hash("init"));
      const auto trace = run_search(cfg, bench, init_random(static_cast<std::size_t>(cfg.pop_size), init_rng));
      c.expect(trace.evaluations <= 2000, "evaluation cap exceeded");
      if (trace.valid_acc >= target) ++hits;
    }
    const std::string name(algo_name(algo));
    c.expect(hits >= 90, name + " reached 0.95 of optimum in only " + std::to_string(hits) + "/100");
    c.note(name + " reached 0.95 of optimum in " + std::to_string(hits) + "/100");
  }
  return c.outcome();
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    files[fs::relative(e.path(), root).generic_string()] =
        std::string(std::istreambuf_iterator<char>(in), {});
  }
  return files;
}

Outcome reproducibility() {
  Checks c;
  PipelineConfig cfg;
  cfg.workdir = fs::temp_directory_path() / "nasinit_acceptance_repro";
  cfg.sample_size = 300;
  cfg.algos = {Algo::kGa, Algo::kEa, Algo::kAe};
  cfg.budgets = {36};
  cfg.runs = 3;
  cfg.generations = 10;
  cfg.seed = 424242;
  std::vector<std::map<std::string, std::string>> trees;
  for (int i = 0; i < 2; ++i) {
    fs::remove_all(cfg.workdir);
    run_pipeline(cfg);
    trees.push_back(snapshot(cfg.workdir));
  }
  fs::remove_all(cfg.workdir);
  c.expect(!trees[0].empty(), "no artifacts written");
  c.expect(trees[0] == trees[1], "artifact trees differ");
  std::size_t bytes = 0;
  for (const auto& [k, v] : trees[0]) bytes += v.size();
  c.note(std::to_string(trees[0].size()) + " files, " + std::to_string(bytes) + " bytes identical across 2 runs");
  return c.outcome();
}

Outcome benchmark_comparisons() {
  const char* path = std::getenv("NASINIT_BENCHMARK");
  if (path == nullptr || *path == '\0')
    return {Verdict::kSkip, "set NASINIT_BENCHMARK to a benchmark export to run"};
  Checks c;
  PipelineConfig cfg;
  cfg.benchmark = path;
  cfg.workdir = fs::temp_directory_path() / "nasinit_acceptance_bench";
  cfg.algos = {Algo::kEa};
  cfg.budgets = {36};
  cfg.runs = 100;
  cfg.seed = 1;
  fs::remove_all(cfg.workdir);
  const auto result = run_pipeline(cfg);
  for (const auto& cmp : result.summary.at("comparisons")) {
    if (cmp.at("metric") != "test_acc" || cmp.at("init_a") != "centroids") continue;
    const std::string other = cmp.at("init_b");
    const double p = cmp.at("p"), ma = cmp.at("median_a"), mb = cmp.at("median_b");
    c.expect(p < 0.05 && ma > mb, "centroids vs " + other + " p=" + fmt(p, 4));
    c.note("centroids vs " + other + " p=" + fmt(p, 4) + " medians " + fmt(ma) + " / " + fmt(mb));
  }
  fs::remove_all(cfg.workdir);
  return c.outcome();
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "validity-index oracle equivalence", 5.0, validity_indices);
  ok &= report(2, "k-means recovery", 30.0, kmeans_recovery);
  ok &= report(3, "dimension reduction", 0.0, dimension_reduction);
  ok &= report(4, "variational mixture", 0.0, bgm_properties);
  ok &= report(5, "budget accounting", 0.0, budget_accounting);
  ok &= report(6, "rank-sum test", 0.0, wilcoxon);
  ok &= report(7, "surrogate end-to-end", 300.0, surrogate_end_to_end);
  ok &= report(8, "reproducibility", 0.0, reproducibility);
  ok &= report(9, "benchmark comparisons", 0.0, benchmark_comparisons);
  std::printf("%s\n", ok ? "acceptance: all criteria passed" : "acceptance: some criteria failed");
  return ok ? 0 : 1;
}
