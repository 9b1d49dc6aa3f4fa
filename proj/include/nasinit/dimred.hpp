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

// PCA and truncated SVD by exact dense SVD.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace nasinit {

enum class Reducer { kPca, kTsvd };

inline std::string_view reducer_name(Reducer r) { return r == Reducer::kPca ? "pca" : "tsvd"; }

inline Reducer reducer_from_name(std::string_view s) {
  if (s == "pca") return Reducer::kPca;
  if (s == "tsvd") return Reducer::kTsvd;
  throw std::invalid_argument("unknown reducer '" + std::string(s) + "'");
}

struct ReductionModel {
  Reducer kind = Reducer::kPca;
  Eigen::MatrixXd basis;            // d x k, orthonormal columns
  Eigen::VectorXd mean;             // d; zero for TSVD
  Eigen::VectorXd singular_values;  // k, non-increasing

  Eigen::Index input_dim() const { return basis.rows(); }
  Eigen::Index components() const { return basis.cols(); }
};

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != m.cols())
      throw std::invalid_argument("to_matrix: ragged rows");
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace detail {

// Flip each column so that its largest-magnitude coordinate (first one on
// ties) is positive.
inline void fix_signs(Eigen::MatrixXd& basis) {
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < basis.rows(); ++r) {
      if (std::abs(basis(r, c)) > best) {
        best = std::abs(basis(r, c));
        arg = r;
      }
    }
    if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
  }
}

inline ReductionModel fit_reduction(const Eigen::MatrixXd& x, Eigen::Index k, Reducer kind) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 2) throw std::invalid_argument("dimension reduction needs at least 2 rows");
  if (k < 1 || k > std::min(n - 1, d))
    throw std::invalid_argument("components " + std::to_string(k) + " outside [1, " +
                                std::to_string(std::min(n - 1, d)) + "]");
  ReductionModel model;
  model.kind = kind;
  model.mean = kind == Reducer::kPca ? Eigen::VectorXd(x.colwise().mean().transpose())
                                     : Eigen::VectorXd::Zero(d);
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  model.basis = svd.matrixV().leftCols(k);
  model.singular_values = svd.singularValues().head(k);
  fix_signs(model.basis);
  return model;
}

}  // namespace detail

inline ReductionModel fit_pca(const Eigen::MatrixXd& x, Eigen::Index k) {
  return detail::fit_reduction(x, k, Reducer::kPca);
}

// Same as PCA without centering.
inline ReductionModel fit_tsvd(const Eigen::MatrixXd& x, Eigen::Index k) {
  return detail::fit_reduction(x, k, Reducer::kTsvd);
}

inline ReductionModel fit_reducer(Reducer kind, const Eigen::MatrixXd& x, Eigen::Index k) {
  return detail::fit_reduction(x, k, kind);
}

inline Eigen::MatrixXd transform(const ReductionModel& model, const Eigen::MatrixXd& x) {
  if (x.cols() != model.input_dim())
    throw std::invalid_argument("transform: expected " + std::to_string(model.input_dim()) +
                                " columns, got " + std::to_string(x.cols()));
  return (x.rowwise() - model.mean.transpose()) * model.basis;
}

}  // namespace nasinit
