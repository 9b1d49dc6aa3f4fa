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

// Tabular architecture-performance benchmark and a deterministic surrogate
// with the same query interface.

#include <algorithm>
#include <array>
#include <concepts>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include <json.hpp>

#include "nasinit/arch_space.hpp"
#include "nasinit/cell_json.hpp"

namespace nasinit {

enum class Metric { kTrain, kValid, kTest };

inline std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::kTrain: return "train";
    case Metric::kValid: return "valid";
    case Metric::kTest: return "test";
  }
  return "?";
}

inline Metric metric_from_name(std::string_view s) {
  for (Metric m : {Metric::kTrain, Metric::kValid, Metric::kTest})
    if (metric_name(m) == s) return m;
  throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

class UnknownBudget : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline int budget_index(int budget) {
  for (int i = 0; i < kNumBudgets; ++i)
    if (kBudgets[i] == budget) return i;
  throw UnknownBudget("unknown budget " + std::to_string(budget) +
                      " (expected 4, 12, 36 or 108)");
}

struct Accuracies {
  double train = 0.0;
  double valid = 0.0;
  double test = 0.0;

  double get(Metric m) const {
    switch (m) {
      case Metric::kTrain: return train;
      case Metric::kValid: return valid;
      case Metric::kTest: return test;
    }
    return 0.0;
  }
};

struct MetricsRecord {
  std::array<Accuracies, kNumBudgets> per_budget{};

  double get(int budget, Metric m) const { return per_budget[budget_index(budget)].get(m); }
};

// Row-major bit string of the pruned adjacency, '|', then the op codes of the
// intermediate nodes. A 2-node cell gives "0100|". Keys are not invariant
// under graph isomorphism: two labelings of the same graph get two keys.
inline std::string canonical_key(const CellSpec& cell) {
  require_valid(cell, "canonical_key");
  const CellSpec p = prune(cell);
  std::string key;
  key.reserve(p.num_nodes() * p.num_nodes() + 1 + kOpSlots);
  for (const auto& row : p.adjacency)
    for (int v : row) key.push_back(v ? '1' : '0');
  key.push_back('|');
  for (int i = 1; i + 1 < p.num_nodes(); ++i)
    key.push_back(static_cast<char>('0' + feature_code(p.ops[i])));
  return key;
}

class NotInBenchmark : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class TableLoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename B>
concept Benchmark = requires(const B& b, const CellSpec& c, int budget, Metric m) {
  { b.query(c, budget, m) } -> std::convertible_to<double>;
};

// Immutable once loaded; safe to share across concurrent searches.
class BenchmarkTable {
 public:
  BenchmarkTable() = default;

  static BenchmarkTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TableLoadError("cannot open benchmark file '" + path + "'");
    return parse(in);
  }

  // One JSON record per line; blank lines are ignored.
  static BenchmarkTable parse(std::istream& in) {
    BenchmarkTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto where = "line " + std::to_string(line_no) + ": ";
      CellSpec cell;
      MetricsRecord record;
      try {
        const auto j = nlohmann::json::parse(line);
        cell = cell_from_json(j);
        if (!j.contains("metrics") || !j.at("metrics").is_object())
          throw TableLoadError("missing 'metrics'");
        const auto& metrics = j.at("metrics");
        for (int b = 0; b < kNumBudgets; ++b) {
          const auto key = std::to_string(kBudgets[b]);
          if (!metrics.contains(key)) throw TableLoadError("missing budget " + key);
          const auto& m = metrics.at(key);
          auto read = [&](const char* name) {
            if (!m.contains(name) || !m.at(name).is_number())
              throw TableLoadError("budget " + key + " missing '" + name + "'");
            const double v = m.at(name).get<double>();
            if (!(v >= 0.0 && v <= 1.0))
              throw TableLoadError("budget " + key + " '" + name + "' outside [0,1]");
            return v;
          };
          record.per_budget[b] = {read("train"), read("valid"), read("test")};
        }
      } catch (const TableLoadError& e) {
        throw TableLoadError(where + e.what());
      } catch (const std::exception& e) {
        throw TableLoadError(where + e.what());
      }
      std::string key;
      try {
        key = canonical_key(cell);
      } catch (const InvalidCell& e) {
        throw TableLoadError(where + e.what());
      }
      if (!table.entries_.emplace(key, record).second)
        throw TableLoadError(where + "duplicate architecture " + key);
    }
    return table;
  }

  std::size_t size() const { return entries_.size(); }

  const MetricsRecord& record(const CellSpec& cell) const {
    const auto key = canonical_key(cell);
    const auto it = entries_.find(key);
    if (it == entries_.end()) throw NotInBenchmark("architecture " + key + " not in benchmark");
    return it->second;
  }

  double query(const CellSpec& cell, int budget, Metric metric) const {
    const int b = budget_index(budget);
    return record(cell).per_budget[b].get(metric);
  }

 private:
  std::unordered_map<std::string, MetricsRecord> entries_;
};

// Deterministic stand-in: f = 0.5*E/9 + 0.5*C/5 where E is the pruned edge
// count and C the number of CONV3X3 nodes; optimum f = 1 at E = 9, C = 5.
// Invalid cells score 0.
class SurrogateBenchmark {
 public:
  static double base_fitness(const CellSpec& cell) {
    const CellSpec p = prune(cell);
    const int edges = edge_count(p);
    const int conv3 = static_cast<int>(
        std::count(p.ops.begin(), p.ops.end(), Op::kConv3x3));
    return 0.5 * edges / kMaxEdges + 0.5 * conv3 / kOpSlots;
  }

  double query(const CellSpec& cell, int budget, Metric metric) const {
    budget_index(budget);
    if (!is_valid(cell)) return 0.0;
    const double valid = base_fitness(cell) * (0.85 + 0.15 * budget / 108.0);
    switch (metric) {
      case Metric::kValid: return valid;
      case Metric::kTest: return std::max(valid - 0.01, 0.0);
      case Metric::kTrain: return std::min(valid + 0.02, 1.0);
    }
    return valid;
  }
};

// Best attainable validation accuracy of the surrogate at a budget.
inline double surrogate_optimum(int budget) {
  budget_index(budget);
  return 0.85 + 0.15 * budget / 108.0;
}

template <Benchmark B>
Perfs test_perfs(const B& bench, const CellSpec& cell) {
  Perfs p{};
  for (int b = 0; b < kNumBudgets; ++b) p[b] = bench.query(cell, kBudgets[b], Metric::kTest);
  return p;
}

}  // namespace nasinit
