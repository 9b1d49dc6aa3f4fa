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

// JSON and CSV forms of the artifacts passed between pipeline stages.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "nasinit/arch_space.hpp"
#include "nasinit/bgm.hpp"
#include "nasinit/cell_json.hpp"
#include "nasinit/cluster.hpp"
#include "nasinit/dimred.hpp"
#include "nasinit/init.hpp"
#include "nasinit/report.hpp"
#include "nasinit/sampling.hpp"

namespace nasinit {

using nlohmann::json;

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols)
      throw std::invalid_argument("ragged matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

inline json vector_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Eigen::VectorXd vector_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline json genome_to_json(const Genome& g) {
  std::string bits;
  for (auto b : g.edges) bits.push_back(b ? '1' : '0');
  json ops = json::array();
  for (Op op : g.ops) ops.push_back(std::string(op_name(op)));
  return {{"edges", bits}, {"ops", ops}};
}

inline Genome genome_from_json(const json& j) {
  Genome g;
  const auto bits = j.at("edges").get<std::string>();
  if (bits.size() != static_cast<std::size_t>(kEdgeGenes))
    throw std::invalid_argument("genome edges need 21 bits");
  for (int k = 0; k < kEdgeGenes; ++k) {
    if (bits[k] != '0' && bits[k] != '1') throw std::invalid_argument("genome edge bit must be 0/1");
    g.edges[k] = bits[k] == '1';
  }
  const auto& ops = j.at("ops");
  if (ops.size() != static_cast<std::size_t>(kOpSlots))
    throw std::invalid_argument("genome needs 5 ops");
  for (int s = 0; s < kOpSlots; ++s) {
    g.ops[s] = op_from_name(ops[s].get<std::string>());
    if (g.ops[s] == Op::kInput || g.ops[s] == Op::kOutput)
      throw std::invalid_argument("genome op must be intermediate");
  }
  return g;
}

// One {"index", "genome", "cell"} object per line.
inline void write_samples(const SampleSet& set, std::ostream& os) {
  for (std::size_t i = 0; i < set.size(); ++i)
    os << json{{"index", i}, {"genome", genome_to_json(set.genomes[i])},
               {"cell", cell_to_json(set.cells[i])}}
              .dump()
       << '\n';
}

inline SampleSet read_samples(std::istream& is) {
  SampleSet set;
  std::string line;
  for (int n = 1; std::getline(is, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      set.genomes.push_back(genome_from_json(j.at("genome")));
      set.cells.push_back(genome_to_cell(set.genomes.back()));
    } catch (const std::exception& e) {
      throw std::invalid_argument("samples line " + std::to_string(n) + ": " + e.what());
    }
  }
  return set;
}

inline void write_population(const InitialPopulation& pop, std::ostream& os) {
  for (std::size_t i = 0; i < pop.size(); ++i) {
    json j{{"index", i},
           {"method", std::string(init_method_name(pop.method))},
           {"genome", genome_to_json(pop.genomes[i])},
           {"cell", cell_to_json(pop.cells[i])}};
    if (i < pop.provenance.size()) {
      j["component"] = pop.provenance[i].component;
      j["distance"] = pop.provenance[i].distance;
      j["sample_index"] = pop.provenance[i].sample_index;
    }
    os << j.dump() << '\n';
  }
}

inline InitialPopulation read_population(std::istream& is) {
  InitialPopulation pop;
  std::string line;
  for (int n = 1; std::getline(is, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      pop.method = init_method_from_name(j.at("method").get<std::string>());
      pop.genomes.push_back(genome_from_json(j.at("genome")));
      pop.cells.push_back(genome_to_cell(pop.genomes.back()));
      if (j.contains("component"))
        pop.provenance.push_back({j.at("component").get<int>(), j.at("distance").get<double>(),
                                  j.at("sample_index").get<std::size_t>()});
    } catch (const std::exception& e) {
      throw std::invalid_argument("population line " + std::to_string(n) + ": " + e.what());
    }
  }
  return pop;
}

inline json reduction_to_json(const ReductionModel& m) {
  return {{"kind", std::string(reducer_name(m.kind))},
          {"basis", matrix_to_json(m.basis)},
          {"mean", vector_to_json(m.mean)},
          {"singular_values", vector_to_json(m.singular_values)}};
}

inline ReductionModel reduction_from_json(const json& j) {
  ReductionModel m;
  m.kind = reducer_from_name(j.at("kind").get<std::string>());
  m.basis = matrix_from_json(j.at("basis"));
  m.mean = vector_from_json(j.at("mean"));
  m.singular_values = vector_from_json(j.at("singular_values"));
  return m;
}

inline json kmeans_to_json(const KMeansModel& m) {
  return {{"method", "kmeans"},       {"centers", matrix_to_json(m.centers)},
          {"inertia", m.inertia},     {"n_init", m.n_init},
          {"max_iter", m.max_iter},   {"best_restart", m.best_restart}};
}

inline KMeansModel kmeans_from_json(const json& j) {
  KMeansModel m;
  m.centers = matrix_from_json(j.at("centers"));
  m.inertia = j.at("inertia").get<double>();
  m.n_init = j.at("n_init").get<int>();
  m.max_iter = j.at("max_iter").get<int>();
  m.best_restart = j.at("best_restart").get<int>();
  return m;
}

inline json bgm_to_json(const BgmModel& m) {
  json covs = json::array();
  for (const auto& c : m.covariances) covs.push_back(matrix_to_json(c));
  json j{{"method", "bgm"},
         {"truncation", m.truncation},
         {"weights", vector_to_json(m.weights)},
         {"means", matrix_to_json(m.means)},
         {"covariances", covs},
         {"responsibilities", matrix_to_json(m.responsibilities)},
         {"elbo_trace", m.elbo_trace},
         {"iterations", m.iterations},
         {"converged", m.converged},
         {"effective_components", effective_components(m)}};
  return j;
}

inline BgmModel bgm_from_json(const json& j) {
  BgmModel m;
  m.truncation = j.at("truncation").get<int>();
  m.weights = vector_from_json(j.at("weights"));
  m.means = matrix_from_json(j.at("means"));
  for (const auto& c : j.at("covariances")) m.covariances.push_back(matrix_from_json(c));
  m.responsibilities = matrix_from_json(j.at("responsibilities"));
  m.elbo_trace = j.at("elbo_trace").get<std::vector<double>>();
  m.iterations = j.at("iterations").get<int>();
  m.converged = j.at("converged").get<bool>();
  if (m.weights.size() != m.truncation || m.means.rows() != m.truncation ||
      m.responsibilities.cols() != m.truncation)
    throw std::invalid_argument("bgm model: inconsistent component counts");
  return m;
}

// Centroids of either stored model kind.
inline Centroids centroids_from_model_json(const json& j) {
  const auto method = j.at("method").get<std::string>();
  if (method == "kmeans") return extract_centroids(kmeans_from_json(j));
  if (method == "bgm") return extract_centroids(bgm_from_json(j));
  throw std::invalid_argument("model method '" + method + "' has no centroids");
}

inline void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& os, const std::string& prefix) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << prefix << j;
  os << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << format_double(m(i, j));
    os << '\n';
  }
}

inline Eigen::MatrixXd read_matrix_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty matrix csv");
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return to_matrix(rows);
}

inline std::ifstream open_input(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + p.string());
  return is;
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  return os;
}

inline json read_json_file(const std::filesystem::path& p) {
  auto is = open_input(p);
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw std::invalid_argument(p.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& p, const json& j) {
  auto os = open_output(p);
  os << j.dump(2) << '\n';
}

}  // namespace nasinit
