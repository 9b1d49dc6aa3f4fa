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

// Cell search space: a feed-forward DAG of at most 7 nodes and 9 edges whose
// intermediate nodes carry one of three operations. Also holds the 26-gene
// genome used by the search operators and the two clustering encodings.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nasinit {

inline constexpr int kMaxNodes = 7;
inline constexpr int kMaxEdges = 9;
inline constexpr int kOpSlots = kMaxNodes - 2;
inline constexpr int kEdgeGenes = kMaxNodes * (kMaxNodes - 1) / 2;
inline constexpr int kGenomeLength = kEdgeGenes + kOpSlots;
inline constexpr int kNumBudgets = 4;
inline constexpr std::array<int, kNumBudgets> kBudgets = {4, 12, 36, 108};

enum class Op : std::uint8_t { kInput, kOutput, kConv3x3, kConv1x1, kMaxPool3x3 };

inline constexpr std::array<Op, 3> kIntermediateOps = {Op::kConv3x3, Op::kConv1x1,
                                                       Op::kMaxPool3x3};

inline bool is_intermediate(Op op) {
  return op == Op::kConv3x3 || op == Op::kConv1x1 || op == Op::kMaxPool3x3;
}

// Feature code of an intermediate op: 1, 2, 3 in listing order. 0 is
// reserved for an absent slot.
inline int feature_code(Op op) {
  switch (op) {
    case Op::kConv3x3: return 1;
    case Op::kConv1x1: return 2;
    case Op::kMaxPool3x3: return 3;
    default: throw std::invalid_argument("feature_code: input/output carry no code");
  }
}

// Channel index (0..2) of an intermediate op.
inline int channel(Op op) { return feature_code(op) - 1; }

inline std::string_view op_name(Op op) {
  switch (op) {
    case Op::kInput: return "input";
    case Op::kOutput: return "output";
    case Op::kConv3x3: return "conv3x3";
    case Op::kConv1x1: return "conv1x1";
    case Op::kMaxPool3x3: return "maxpool3x3";
  }
  return "?";
}

inline Op op_from_name(std::string_view name) {
  for (Op op : {Op::kInput, Op::kOutput, Op::kConv3x3, Op::kConv1x1, Op::kMaxPool3x3}) {
    if (op_name(op) == name) return op;
  }
  throw std::invalid_argument("unknown operation '" + std::string(name) + "'");
}

// Thrown for structurally malformed input (non-square matrix, non-binary
// entries, op list of the wrong length). Distinct from an invalid cell.
class MalformedCell : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when an operation requires a valid cell and receives an invalid one.
class InvalidCell : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CellSpec {
  std::vector<std::vector<int>> adjacency;
  std::vector<Op> ops;

  int num_nodes() const { return static_cast<int>(ops.size()); }
  bool has_edge(int i, int j) const { return adjacency[i][j] != 0; }

  friend bool operator==(const CellSpec&, const CellSpec&) = default;
};

inline int edge_count(const CellSpec& cell) {
  int e = 0;
  for (const auto& row : cell.adjacency)
    for (int v : row) e += (v != 0);
  return e;
}

enum class Validity {
  kValid,
  kNotUpperTriangular,
  kBadOps,
  kTooManyNodes,
  kDisconnected,
  kTooManyEdges,
};

inline std::string_view validity_name(Validity v) {
  switch (v) {
    case Validity::kValid: return "VALID";
    case Validity::kNotUpperTriangular: return "NOT_UPPER_TRIANGULAR";
    case Validity::kBadOps: return "BAD_OPS";
    case Validity::kTooManyNodes: return "TOO_MANY_NODES";
    case Validity::kDisconnected: return "DISCONNECTED";
    case Validity::kTooManyEdges: return "TOO_MANY_EDGES";
  }
  return "?";
}

struct ValidityReport {
  bool valid = false;
  Validity reason = Validity::kDisconnected;
};

// Throws MalformedCell unless the matrix is square, binary and sized to the
// op list.
inline void check_well_formed(const CellSpec& cell) {
  const std::size_t n = cell.ops.size();
  if (n < 2) throw MalformedCell("cell needs at least 2 nodes");
  if (cell.adjacency.size() != n)
    throw MalformedCell("adjacency has " + std::to_string(cell.adjacency.size()) +
                        " rows for " + std::to_string(n) + " ops");
  for (const auto& row : cell.adjacency) {
    if (row.size() != n) throw MalformedCell("adjacency is not square");
    for (int v : row)
      if (v != 0 && v != 1) throw MalformedCell("adjacency entry not in {0,1}");
  }
}

namespace detail {

inline std::vector<bool> reachable_from(const CellSpec& cell, int source, bool forward) {
  const int n = cell.num_nodes();
  std::vector<bool> seen(n, false);
  std::vector<int> stack = {source};
  seen[source] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < n; ++v) {
      const bool edge = forward ? cell.has_edge(u, v) : cell.has_edge(v, u);
      if (edge && !seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

inline CellSpec disconnected_stub() {
  return CellSpec{{{0, 0}, {0, 0}}, {Op::kInput, Op::kOutput}};
}

}  // namespace detail

// Keeps the nodes that lie on some input->output path, preserving order.
// A cell without such a path collapses to a disconnected 2-node stub.
inline CellSpec prune(const CellSpec& cell) {
  check_well_formed(cell);
  const int n = cell.num_nodes();
  const auto from_input = detail::reachable_from(cell, 0, true);
  const auto to_output = detail::reachable_from(cell, n - 1, false);
  if (!from_input[n - 1]) return detail::disconnected_stub();

  std::vector<int> keep;
  for (int v = 0; v < n; ++v)
    if (from_input[v] && to_output[v]) keep.push_back(v);

  CellSpec out;
  const std::size_t m = keep.size();
  out.adjacency.assign(m, std::vector<int>(m, 0));
  out.ops.reserve(m);
  for (std::size_t a = 0; a < m; ++a) {
    out.ops.push_back(cell.ops[keep[a]]);
    for (std::size_t b = 0; b < m; ++b)
      out.adjacency[a][b] = cell.adjacency[keep[a]][keep[b]];
  }
  return out;
}

inline ValidityReport validate(const CellSpec& cell) {
  check_well_formed(cell);
  const int n = cell.num_nodes();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      if (cell.has_edge(i, j)) return {false, Validity::kNotUpperTriangular};

  if (cell.ops.front() != Op::kInput || cell.ops.back() != Op::kOutput)
    return {false, Validity::kBadOps};
  for (int i = 1; i + 1 < n; ++i)
    if (!is_intermediate(cell.ops[i])) return {false, Validity::kBadOps};

  const CellSpec pruned = prune(cell);
  if (edge_count(pruned) == 0)
    return {false, Validity::kDisconnected};
  if (pruned.num_nodes() > kMaxNodes) return {false, Validity::kTooManyNodes};
  if (edge_count(pruned) > kMaxEdges) return {false, Validity::kTooManyEdges};
  return {true, Validity::kValid};
}

inline bool is_valid(const CellSpec& cell) { return validate(cell).valid; }

inline void require_valid(const CellSpec& cell, std::string_view what) {
  const auto report = validate(cell);
  if (!report.valid)
    throw InvalidCell(std::string(what) + ": invalid cell (" +
                      std::string(validity_name(report.reason)) + ")");
}

// Fixed-length genome: 21 edge bits over the upper triangle of a 7x7
// matrix (row-major over pairs i<j) followed by 5 op genes. Node 0 is the
// input, node 6 the output.
struct Genome {
  std::array<std::uint8_t, kEdgeGenes> edges{};
  std::array<Op, kOpSlots> ops{Op::kConv3x3, Op::kConv3x3, Op::kConv3x3, Op::kConv3x3,
                               Op::kConv3x3};

  friend bool operator==(const Genome&, const Genome&) = default;
};

inline constexpr int edge_gene_index(int i, int j) {
  return i * kMaxNodes - i * (i + 1) / 2 + (j - i - 1);
}

inline constexpr std::array<std::pair<int, int>, kEdgeGenes> edge_gene_pairs() {
  std::array<std::pair<int, int>, kEdgeGenes> pairs{};
  int k = 0;
  for (int i = 0; i < kMaxNodes; ++i)
    for (int j = i + 1; j < kMaxNodes; ++j) pairs[k++] = {i, j};
  return pairs;
}

// The unpruned 7-node cell a genome describes.
inline CellSpec genome_to_raw_cell(const Genome& g) {
  CellSpec cell;
  cell.adjacency.assign(kMaxNodes, std::vector<int>(kMaxNodes, 0));
  int k = 0;
  for (int i = 0; i < kMaxNodes; ++i)
    for (int j = i + 1; j < kMaxNodes; ++j) cell.adjacency[i][j] = g.edges[k++];
  cell.ops.reserve(kMaxNodes);
  cell.ops.push_back(Op::kInput);
  for (Op op : g.ops) cell.ops.push_back(op);
  cell.ops.push_back(Op::kOutput);
  return cell;
}

inline CellSpec genome_to_cell(const Genome& g) { return prune(genome_to_raw_cell(g)); }

// Embeds a valid cell into the genome: input -> slot 0, intermediate node
// i -> slot i, output -> slot 6. Unused op genes are CONV3X3.
inline Genome cell_to_genome(const CellSpec& cell) {
  require_valid(cell, "cell_to_genome");
  const int n = cell.num_nodes();
  if (n > kMaxNodes) throw InvalidCell("cell_to_genome: more than 7 nodes");
  auto slot = [n](int node) { return node == n - 1 ? kMaxNodes - 1 : node; };
  Genome g;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (cell.has_edge(i, j)) g.edges[edge_gene_index(slot(i), slot(j))] = 1;
  for (int i = 1; i + 1 < n; ++i) g.ops[i - 1] = cell.ops[i];
  return g;
}

// Pruned adjacency zero-padded into the top-left corner of a 7x7 matrix.
using Embedded7 = std::array<std::array<int, kMaxNodes>, kMaxNodes>;

inline Embedded7 embed7(const CellSpec& cell) {
  const CellSpec p = prune(cell);
  if (p.num_nodes() > kMaxNodes) throw InvalidCell("embed7: more than 7 nodes");
  Embedded7 m{};
  for (int i = 0; i < p.num_nodes(); ++i)
    for (int j = 0; j < p.num_nodes(); ++j) m[i][j] = p.adjacency[i][j];
  return m;
}

enum class Encoding { kShort, kLong };

inline constexpr std::size_t kShortAdjacency = kMaxNodes * kMaxNodes;  // 49
inline constexpr std::size_t kLongNodes = 2 + kOpSlots * 3;             // 17
inline constexpr std::size_t kLongAdjacency = kLongNodes * kLongNodes;  // 289

inline constexpr std::size_t encoding_length(Encoding e) {
  return (e == Encoding::kShort ? kShortAdjacency : kLongAdjacency) + kOpSlots +
         kNumBudgets;
}

inline std::string_view encoding_name(Encoding e) {
  return e == Encoding::kShort ? "short" : "long";
}

inline Encoding encoding_from_name(std::string_view s) {
  if (s == "short") return Encoding::kShort;
  if (s == "long") return Encoding::kLong;
  throw std::invalid_argument("unknown encoding '" + std::string(s) + "'");
}

struct FeatureVector {
  Encoding kind = Encoding::kShort;
  std::vector<double> values;
};

using Perfs = std::array<double, kNumBudgets>;

namespace detail {

inline void append_ops_and_perfs(const CellSpec& p, const Perfs& perfs,
                                 std::vector<double>& values) {
  for (int s = 0; s < kOpSlots; ++s) {
    const int node = s + 1;
    values.push_back(node < p.num_nodes() - 1 ? feature_code(p.ops[node]) : 0);
  }
  for (double v : perfs) values.push_back(v);
}

inline void check_perfs(const Perfs& perfs) {
  for (double v : perfs)
    if (!(v >= 0.0 && v <= 1.0))
      throw std::out_of_range("performance value outside [0,1]");
}

}  // namespace detail

// 49 padded adjacency entries + 5 op codes + 4 test accuracies.
inline FeatureVector encode_short(const CellSpec& cell, const Perfs& perfs) {
  require_valid(cell, "encode_short");
  detail::check_perfs(perfs);
  const CellSpec p = prune(cell);
  FeatureVector fv{Encoding::kShort, {}};
  fv.values.reserve(encoding_length(Encoding::kShort));
  const Embedded7 m = embed7(p);
  for (const auto& row : m)
    for (int v : row) fv.values.push_back(v);
  detail::append_ops_and_perfs(p, perfs, fv.values);
  return fv;
}

// Index of an intermediate slot (1..5) on a given channel in the expanded
// 17-node graph; 0 is the input, 16 the output.
inline constexpr int long_node(int slot, int channel_index) {
  return 1 + (slot - 1) * 3 + channel_index;
}

// 17x17 expanded adjacency (input, 5 slots x 3 channels, output) + 5 op
// codes + 4 test accuracies.
inline FeatureVector encode_long(const CellSpec& cell, const Perfs& perfs) {
  require_valid(cell, "encode_long");
  detail::check_perfs(perfs);
  const CellSpec p = prune(cell);
  const int n = p.num_nodes();
  auto expanded = [&](int node) -> int {
    if (node == 0) return 0;
    if (node == n - 1) return static_cast<int>(kLongNodes) - 1;
    return long_node(node, channel(p.ops[node]));
  };
  FeatureVector fv{Encoding::kLong, std::vector<double>(kLongAdjacency, 0.0)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (p.has_edge(i, j)) fv.values[expanded(i) * kLongNodes + expanded(j)] = 1.0;
  detail::append_ops_and_perfs(p, perfs, fv.values);
  return fv;
}

inline FeatureVector encode(Encoding kind, const CellSpec& cell, const Perfs& perfs) {
  return kind == Encoding::kShort ? encode_short(cell, perfs) : encode_long(cell, perfs);
}

}  // namespace nasinit
