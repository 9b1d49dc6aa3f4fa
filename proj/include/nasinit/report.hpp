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

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nasinit/arch_space.hpp"
#include "nasinit/bench_data.hpp"
#include "nasinit/cluster.hpp"
#include "nasinit/dimred.hpp"
#include "nasinit/evo.hpp"
#include "nasinit/random.hpp"
#include "nasinit/sampling.hpp"

namespace nasinit {

// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct OccurrenceMatrix {
  std::array<std::array<int, kMaxNodes>, kMaxNodes> counts{};
  int n_solutions = 0;

  double normalized(int i, int j) const {
    return n_solutions == 0 ? 0.0 : static_cast<double>(counts[i][j]) / n_solutions;
  }
};

inline OccurrenceMatrix occurrence_matrix(const std::vector<CellSpec>& solutions) {
  OccurrenceMatrix out;
  for (const auto& cell : solutions) {
    require_valid(cell, "occurrence_matrix");
    const Embedded7 m = embed7(cell);
    for (int i = 0; i < kMaxNodes; ++i)
      for (int j = 0; j < kMaxNodes; ++j) out.counts[i][j] += m[i][j];
    ++out.n_solutions;
  }
  return out;
}

// Plot-ready form: row,col,count,frequency.
inline void write_occurrence_csv(const OccurrenceMatrix& m, std::ostream& os) {
  os << "row,col,count,frequency\n";
  for (int i = 0; i < kMaxNodes; ++i)
    for (int j = 0; j < kMaxNodes; ++j)
      os << i << ',' << j << ',' << m.counts[i][j] << ',' << format_double(m.normalized(i, j)) << '\n';
}

struct CalibrationPoint {
  Encoding encoding = Encoding::kShort;
  Reducer reducer = Reducer::kTsvd;
  int components = 2;
  std::size_t sample_size = 1000;
  int n_clusters = 10;

  std::string label() const {
    return std::string(encoding_name(encoding)) + '/' + std::string(reducer_name(reducer)) + '/' +
           std::to_string(components) + '/' + std::to_string(sample_size) + '/' +
           std::to_string(n_clusters);
  }
};

struct CalibrationGrid {
  std::vector<Encoding> encodings{Encoding::kShort};
  std::vector<Reducer> reducers{Reducer::kTsvd};
  std::vector<int> components{2};
  std::vector<std::size_t> sample_sizes{1000};
  std::vector<int> n_clusters{10};

  std::vector<CalibrationPoint> points() const {
    std::vector<CalibrationPoint> out;
    for (auto e : encodings)
      for (auto r : reducers)
        for (int c : components)
          for (auto s : sample_sizes)
            for (int k : n_clusters) out.push_back({e, r, c, s, k});
    return out;
  }
};

struct CalibrationRow {
  CalibrationPoint point;
  std::uint64_t seed = 0;
  double silhouette = 0.0;
  double calinski_harabasz = 0.0;
  double davies_bouldin = 0.0;
};

// Seed of a grid point: depends on the point itself, not its position, so
// repeated points reproduce each other.
inline std::uint64_t calibration_seed(std::uint64_t seed, const CalibrationPoint& p) {
  return seed ^ stable_hash(p.label());
}

template <Benchmark B>
Eigen::MatrixXd encode_samples(const SampleSet& samples, Encoding encoding, const B& bench) {
  std::vector<std::vector<double>> rows;
  rows.reserve(samples.size());
  for (const auto& cell : samples.cells)
    rows.push_back(encode(encoding, cell, test_perfs(bench, cell)).values);
  return to_matrix(rows);
}

template <Benchmark B>
CalibrationRow calibrate_point(const CalibrationPoint& p, std::uint64_t seed, const B& bench,
                               KMeansOptions kmeans = {}) {
  CalibrationRow row{p, calibration_seed(seed, p)};
  Rng rng(row.seed);
  const SampleSet samples = sample_uniform(p.sample_size, rng);
  const Eigen::MatrixXd x = encode_samples(samples, p.encoding, bench);
  const ReductionModel model = fit_reducer(p.reducer, x, p.components);
  const Eigen::MatrixXd z = transform(model, x);
  auto [km, assignment] = kmeans_fit(z, p.n_clusters, rng, kmeans);
  row.silhouette = silhouette(z, assignment.labels);
  row.calinski_harabasz = calinski_harabasz(z, assignment.labels);
  row.davies_bouldin = davies_bouldin(z, assignment.labels);
  return row;
}

template <Benchmark B>
std::vector<CalibrationRow> calibration_sweep(const std::vector<CalibrationPoint>& grid,
                                              std::uint64_t seed, const B& bench,
                                              KMeansOptions kmeans = {}) {
  std::vector<CalibrationRow> rows;
  rows.reserve(grid.size());
  for (const auto& p : grid) rows.push_back(calibrate_point(p, seed, bench, kmeans));
  return rows;
}

inline void write_calibration_csv(const std::vector<CalibrationRow>& rows, std::ostream& os) {
  os << "encoding,reducer,components,sample_size,n_clusters,seed,silhouette,calinski_harabasz,"
        "davies_bouldin\n";
  for (const auto& r : rows)
    os << encoding_name(r.point.encoding) << ',' << reducer_name(r.point.reducer) << ','
       << r.point.components << ',' << r.point.sample_size << ',' << r.point.n_clusters << ','
       << r.seed << ',' << format_double(r.silhouette) << ',' << format_double(r.calinski_harabasz)
       << ',' << format_double(r.davies_bouldin) << '\n';
}

struct BoxSummary {
  std::size_t n = 0;
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

namespace detail {

inline double interpolated_quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline BoxSummary box_summary(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_summary: no values");
  std::sort(values.begin(), values.end());
  BoxSummary s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = detail::interpolated_quantile(values, 0.25);
  s.median = detail::interpolated_quantile(values, 0.5);
  s.q3 = detail::interpolated_quantile(values, 0.75);
  return s;
}

inline constexpr const char* kTraceHeader =
    "run_id,generation,evaluations,mean_fit,min_fit,max_fit,best_so_far\n";

inline void write_trace_rows(const SearchTrace& trace, int run_id, std::ostream& os) {
  for (const auto& r : trace.rows)
    os << run_id << ',' << r.generation << ',' << r.evaluations << ',' << format_double(r.mean_fit)
       << ',' << format_double(r.min_fit) << ',' << format_double(r.max_fit) << ','
       << format_double(r.best_so_far) << '\n';
}

inline void write_trace_csv(const SearchTrace& trace, int run_id, std::ostream& os) {
  os << kTraceHeader;
  write_trace_rows(trace, run_id, os);
}

// kPerRun: <group>_runNNN.csv for each run. kPerGroup: one <group>_traces.csv
// holding every run, told apart by run_id.
enum class TraceLayout { kPerRun, kPerGroup };

struct TraceExport {
  std::vector<std::filesystem::path> trace_files;
  std::filesystem::path finals_file;
  std::filesystem::path summary_file;
  BoxSummary test_acc;
};

namespace detail {

inline std::ofstream open_report_file(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

inline std::string run_file_name(std::string_view group, int run_id) {
  char buf[16];
  const auto res = std::to_chars(buf, buf + sizeof buf, run_id);
  std::string id(buf, res.ptr);
  if (id.size() < 3) id.insert(0, 3 - id.size(), '0');
  return std::string(group) + "_run" + id + ".csv";
}

}  // namespace detail

// Writes the convergence traces, <group>_finals.csv (one line per run) and
// <group>_summary.csv (quartiles of final test accuracy).
inline TraceExport export_traces(const std::vector<SearchTrace>& runs,
                                 const std::filesystem::path& dir, std::string_view group,
                                 TraceLayout layout = TraceLayout::kPerRun) {
  if (runs.empty()) throw std::invalid_argument("export_traces: no runs");
  std::filesystem::create_directories(dir);
  TraceExport out;
  std::vector<double> tests;
  for (const auto& r : runs) tests.push_back(r.test_acc);
  if (layout == TraceLayout::kPerRun) {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto path = dir / detail::run_file_name(group, static_cast<int>(i));
      auto os = detail::open_report_file(path);
      write_trace_csv(runs[i], static_cast<int>(i), os);
      out.trace_files.push_back(path);
    }
  } else {
    const auto path = dir / (std::string(group) + "_traces.csv");
    auto os = detail::open_report_file(path);
    os << kTraceHeader;
    for (std::size_t i = 0; i < runs.size(); ++i) write_trace_rows(runs[i], static_cast<int>(i), os);
    out.trace_files.push_back(path);
  }

  out.finals_file = dir / (std::string(group) + "_finals.csv");
  {
    auto os = detail::open_report_file(out.finals_file);
    os << "run_id,evaluations,valid_acc,test_acc,best_cell\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
      os << i << ',' << runs[i].evaluations << ',' << format_double(runs[i].valid_acc) << ','
         << format_double(runs[i].test_acc) << ','
         << (is_valid(runs[i].best_cell) ? canonical_key(runs[i].best_cell) : "invalid") << '\n';
  }

  out.test_acc = box_summary(tests);
  out.summary_file = dir / (std::string(group) + "_summary.csv");
  {
    auto os = detail::open_report_file(out.summary_file);
    const auto& s = out.test_acc;
    os << "group,n,min,q1,median,q3,max\n"
       << group << ',' << s.n << ',' << format_double(s.min) << ',' << format_double(s.q1) << ','
       << format_double(s.median) << ',' << format_double(s.q3) << ',' << format_double(s.max)
       << '\n';
  }
  return out;
}

}  // namespace nasinit
