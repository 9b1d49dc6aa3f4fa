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

#include "nasinit/report.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "support/oracles.hpp"

namespace nasinit {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nasinit_report_" + name);
  fs::remove_all(dir);
  return dir;
}

TEST(Occurrence, CopiesScaleTheAdjacency) {
  Rng rng(1);
  const CellSpec cell = oracle::random_valid_cell(rng, 6);
  const auto m = occurrence_matrix(std::vector<CellSpec>(100, cell));
  const CellSpec p = prune(cell);
  EXPECT_EQ(m.n_solutions, 100);
  for (int i = 0; i < kMaxNodes; ++i)
    for (int j = 0; j < kMaxNodes; ++j) {
      const int expected = i < p.num_nodes() && j < p.num_nodes() ? 100 * p.adjacency[i][j] : 0;
      EXPECT_EQ(m.counts[i][j], expected);
    }
}

TEST(Occurrence, EmptyListIsZero) {
  const auto m = occurrence_matrix({});
  EXPECT_EQ(m.n_solutions, 0);
  for (const auto& row : m.counts)
    for (int v : row) EXPECT_EQ(v, 0);
  EXPECT_EQ(m.normalized(0, 1), 0.0);
}

TEST(Occurrence, MatchesDirectSummationAndIsAdditive) {
  Rng rng(2);
  std::vector<CellSpec> first, second;
  for (int i = 0; i < 10; ++i) first.push_back(oracle::random_valid_cell(rng, 2 + i % 6));
  for (int i = 0; i < 7; ++i) second.push_back(oracle::random_valid_cell(rng, 3 + i % 5));
  int direct[7][7] = {};
  for (const auto& c : first) {
    const CellSpec p = prune(c);
    for (int i = 0; i < p.num_nodes(); ++i)
      for (int j = 0; j < p.num_nodes(); ++j) direct[i][j] += p.adjacency[i][j];
  }
  const auto a = occurrence_matrix(first);
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      EXPECT_EQ(a.counts[i][j], direct[i][j]);
      EXPECT_LE(a.counts[i][j], a.n_solutions);
      if (j <= i) {
        EXPECT_EQ(a.counts[i][j], 0);
      }
    }
  }
  auto both = first;
  both.insert(both.end(), second.begin(), second.end());
  const auto b = occurrence_matrix(second);
  const auto ab = occurrence_matrix(both);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) EXPECT_EQ(ab.counts[i][j], a.counts[i][j] + b.counts[i][j]);
}

TEST(Occurrence, InvalidCellThrows) {
  CellSpec bad;
  bad.adjacency = {{0, 0}, {0, 0}};
  bad.ops = {Op::kInput, Op::kOutput};
  EXPECT_THROW(occurrence_matrix({bad}), InvalidCell);
}

TEST(Occurrence, CsvLayout) {
  Rng rng(3);
  std::ostringstream os;
  write_occurrence_csv(occurrence_matrix({oracle::random_valid_cell(rng, 4)}), os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("row,col,count,frequency\n", 0), 0u);
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 50);
}

TEST(Calibration, SinglePointHasFiniteMetrics) {
  const SurrogateBenchmark bench;
  CalibrationPoint p{Encoding::kShort, Reducer::kTsvd, 2, 200, 5};
  const auto rows = calibration_sweep({p}, 42, bench, {.n_init = 5, .max_iter = 100});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(std::isfinite(rows[0].silhouette));
  EXPECT_TRUE(std::isfinite(rows[0].calinski_harabasz));
  EXPECT_TRUE(std::isfinite(rows[0].davies_bouldin));
}

TEST(Calibration, DuplicatePointsGiveIdenticalRows) {
  const SurrogateBenchmark bench;
  CalibrationGrid grid;
  grid.encodings = {Encoding::kShort, Encoding::kLong};
  grid.reducers = {Reducer::kPca};
  grid.components = {2};
  grid.sample_sizes = {150};
  grid.n_clusters = {4};
  auto points = grid.points();
  ASSERT_EQ(points.size(), 2u);
  points.push_back(points[0]);
  const auto rows = calibration_sweep(points, 7, bench, {.n_init = 3, .max_iter = 100});
  std::ostringstream a, b;
  write_calibration_csv({rows[0]}, a);
  write_calibration_csv({rows[2]}, b);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(rows[0].seed, rows[1].seed);
  // A row depends only on its point and the seed.
  const auto alone = calibration_sweep({points[1]}, 7, bench, {.n_init = 3, .max_iter = 100});
  EXPECT_EQ(alone[0].silhouette, rows[1].silhouette);
}

TEST(Calibration, CsvHeader) {
  std::ostringstream os;
  write_calibration_csv({}, os);
  EXPECT_EQ(os.str(),
            "encoding,reducer,components,sample_size,n_clusters,seed,silhouette,"
            "calinski_harabasz,davies_bouldin\n");
}

SearchTrace fake_trace(double test, int rows) {
  SearchTrace t;
  for (int g = 0; g < rows; ++g)
    t.rows.push_back({g, 19L * (g + 1), 0.5 + 0.01 * g, 0.1, 0.9, 0.9 + 0.001 * g});
  t.best_cell.adjacency = {{0, 1}, {0, 0}};
  t.best_cell.ops = {Op::kInput, Op::kOutput};
  t.test_acc = test;
  t.valid_acc = test + 0.01;
  t.evaluations = 19L * rows;
  return t;
}

TEST(Export, SingleRunQuartilesCollapse) {
  const auto dir = scratch_dir("single");
  const auto out = export_traces({fake_trace(0.875, 3)}, dir, "ea_rand_36");
  EXPECT_EQ(out.test_acc.n, 1u);
  for (double v : {out.test_acc.min, out.test_acc.q1, out.test_acc.median, out.test_acc.q3,
                   out.test_acc.max})
    EXPECT_EQ(v, 0.875);
  ASSERT_EQ(out.trace_files.size(), 1u);
  EXPECT_EQ(out.trace_files[0].filename(), "ea_rand_36_run000.csv");
  const std::string csv = slurp(out.trace_files[0]);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "run_id,generation,evaluations,mean_fit,min_fit,max_fit,best_so_far");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  fs::remove_all(dir);
}

TEST(Export, ReexportIsByteIdentical) {
  Rng rng(4);
  std::vector<SearchTrace> runs;
  for (int i = 0; i < 5; ++i) runs.push_back(fake_trace(rng.uniform(), 4 + i));
  const auto d1 = scratch_dir("a"), d2 = scratch_dir("b");
  const auto a = export_traces(runs, d1, "g");
  const auto b = export_traces(runs, d2, "g");
  for (std::size_t i = 0; i < runs.size(); ++i)
    EXPECT_EQ(slurp(a.trace_files[i]), slurp(b.trace_files[i]));
  EXPECT_EQ(slurp(a.summary_file), slurp(b.summary_file));
  EXPECT_EQ(slurp(a.finals_file), slurp(b.finals_file));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Export, QuartilesMatchPercentileOracle) {
  Rng rng(5);
  for (int n : {2, 3, 7, 10, 100}) {
    std::vector<SearchTrace> runs;
    std::vector<double> tests;
    for (int i = 0; i < n; ++i) {
      tests.push_back(std::round(rng.uniform() * 1000) / 1000);
      runs.push_back(fake_trace(tests.back(), 2));
    }
    const auto dir = scratch_dir("q");
    const auto s = export_traces(runs, dir, "g").test_acc;
    EXPECT_NEAR(s.min, oracle::percentile(tests, 0.0), 1e-15);
    EXPECT_NEAR(s.q1, oracle::percentile(tests, 0.25), 1e-15);
    EXPECT_NEAR(s.median, oracle::percentile(tests, 0.5), 1e-15);
    EXPECT_NEAR(s.q3, oracle::percentile(tests, 0.75), 1e-15);
    EXPECT_NEAR(s.max, oracle::percentile(tests, 1.0), 1e-15);
    fs::remove_all(dir);
  }
}

TEST(Export, NumbersRoundTrip) {
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.below(20) - 10.0);
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Export, GroupLayoutHoldsEveryRun) {
  const auto dir = scratch_dir("group");
  const auto out = export_traces({fake_trace(0.5, 2), fake_trace(0.6, 3)}, dir, "g",
                                 TraceLayout::kPerGroup);
  ASSERT_EQ(out.trace_files.size(), 1u);
  EXPECT_EQ(out.trace_files[0].filename(), "g_traces.csv");
  const std::string csv = slurp(out.trace_files[0]);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_NE(csv.find("\n1,2,"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Export, EmptyRunListThrows) {
  EXPECT_THROW(export_traces({}, scratch_dir("e"), "g"), std::invalid_argument);
}

}  // namespace
}  // namespace nasinit
