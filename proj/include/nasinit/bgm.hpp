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

// Variational Bayesian Gaussian mixture with a truncated stick-breaking
// (Dirichlet process) prior on the weights, full covariances and a
// Normal-Wishart prior on each component's mean and precision.
//
// Priors: weight concentration 1/K, mean prior = data mean, mean precision
// 1, degrees of freedom d, Wishart scale (inverse) = diagonal of the data
// covariance. Coordinate ascent alternates the responsibility update and the
// parameter update; the evidence lower bound is recorded after each full
// iteration and is non-decreasing.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>

#include "nasinit/cluster.hpp"
#include "nasinit/random.hpp"

namespace nasinit {

enum class BgmInit { kKMeans, kRandom };

struct BgmOptions {
  int truncation = 30;
  int max_iter = 500;
  double tol = 1e-4;
  // Independent restarts; the fit with the highest final bound is kept.
  int n_init = 1;
  BgmInit init = BgmInit::kKMeans;
};

struct BgmModel {
  int truncation = 0;
  Eigen::VectorXd weights;                   // K, sums to 1
  Eigen::MatrixXd means;                     // K x d
  std::vector<Eigen::MatrixXd> covariances;  // K of d x d
  Eigen::MatrixXd responsibilities;          // N x K, rows sum to 1
  std::vector<double> elbo_trace;
  int iterations = 0;
  bool converged = false;

  // Variational posterior parameters.
  Eigen::VectorXd stick_a, stick_b;     // Beta(a_k, b_k) per stick
  Eigen::VectorXd mean_precision;       // beta_k
  Eigen::VectorXd dof;                  // nu_k
  std::vector<Eigen::MatrixXd> scale_inv;  // W_k^{-1}

  std::vector<int> labels() const {
    std::vector<int> out(responsibilities.rows());
    for (Eigen::Index i = 0; i < responsibilities.rows(); ++i)
      responsibilities.row(i).maxCoeff(&out[i]);
    return out;
  }
};

// Components that are the argmax responsibility of at least one sample,
// ordered by descending weight (index breaks ties).
inline std::vector<int> effective_components(const BgmModel& model) {
  std::vector<bool> hit(model.truncation, false);
  for (int l : model.labels()) hit[l] = true;
  std::vector<int> out;
  for (int k = 0; k < model.truncation; ++k)
    if (hit[k]) out.push_back(k);
  std::stable_sort(out.begin(), out.end(),
                   [&](int a, int b) { return model.weights(a) > model.weights(b); });
  return out;
}

class BgmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr double kCovarianceJitter = 1e-6;

struct BgmPrior {
  double concentration;
  Eigen::VectorXd mean;
  double mean_precision;
  double dof;
  Eigen::MatrixXd scale_inv;
};

// Cholesky factor, retrying once with jitter on the diagonal.
inline Eigen::MatrixXd spd_cholesky(Eigen::MatrixXd m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    m.diagonal().array() += kCovarianceJitter;
    llt.compute(m);
    if (llt.info() != Eigen::Success) throw BgmError("bgm: covariance is not SPD after jitter");
  }
  return llt.matrixL();
}

inline double log_det_from_cholesky(const Eigen::MatrixXd& l) {
  return 2.0 * l.diagonal().array().log().sum();
}

// ln B(W, nu) with ln|W| = -ln|W^{-1}|.
inline double log_wishart_norm(double log_det_scale_inv, double nu, int d) {
  double s = 0.0;
  for (int i = 1; i <= d; ++i) s += std::lgamma(0.5 * (nu + 1 - i));
  return 0.5 * nu * log_det_scale_inv - 0.5 * nu * d * std::log(2.0) -
         0.25 * d * (d - 1) * std::log(M_PI) - s;
}

struct BgmState {
  Eigen::VectorXd a, b, beta, nu;
  Eigen::MatrixXd m;                   // K x d
  std::vector<Eigen::MatrixXd> psi;    // W_k^{-1}
  std::vector<Eigen::MatrixXd> chol;   // Cholesky of psi
};

inline void m_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& resp, const BgmPrior& prior,
                   BgmState& st) {
  const Eigen::Index k_max = resp.cols();
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd nk = resp.colwise().sum().transpose();
  st.a.resize(k_max);
  st.b.resize(k_max);
  st.beta.resize(k_max);
  st.nu.resize(k_max);
  st.m.resize(k_max, d);
  st.psi.assign(k_max, Eigen::MatrixXd());
  st.chol.assign(k_max, Eigen::MatrixXd());
  double tail = nk.sum();
  for (Eigen::Index k = 0; k < k_max; ++k) {
    tail -= nk(k);
    st.a(k) = 1.0 + nk(k);
    st.b(k) = prior.concentration + std::max(tail, 0.0);
    st.beta(k) = prior.mean_precision + nk(k);
    st.nu(k) = prior.dof + nk(k);
    const Eigen::VectorXd sum = x.transpose() * resp.col(k);
    st.m.row(k) = ((prior.mean_precision * prior.mean + sum) / st.beta(k)).transpose();
    Eigen::MatrixXd psi = prior.scale_inv;
    if (nk(k) > 1e-300) {
      const Eigen::VectorXd xbar = sum / nk(k);
      const Eigen::MatrixXd centered = x.rowwise() - xbar.transpose();
      psi += centered.transpose() * resp.col(k).asDiagonal() * centered;
      const Eigen::VectorXd diff = xbar - prior.mean;
      psi += (prior.mean_precision * nk(k) / st.beta(k)) * diff * diff.transpose();
    }
    psi = 0.5 * (psi + psi.transpose());
    st.chol[k] = spd_cholesky(psi);
    st.psi[k] = st.chol[k] * st.chol[k].transpose();
  }
}

struct Expectations {
  Eigen::VectorXd log_v, log_1mv, log_pi, log_det_lambda;
};

inline Expectations expectations(const BgmState& st, int d) {
  using boost::math::digamma;
  const Eigen::Index k_max = st.a.size();
  Expectations e;
  e.log_v.resize(k_max);
  e.log_1mv.resize(k_max);
  e.log_pi.resize(k_max);
  e.log_det_lambda.resize(k_max);
  double prefix = 0.0;
  for (Eigen::Index k = 0; k < k_max; ++k) {
    const double ab = digamma(st.a(k) + st.b(k));
    e.log_v(k) = digamma(st.a(k)) - ab;
    e.log_1mv(k) = digamma(st.b(k)) - ab;
    e.log_pi(k) = e.log_v(k) + prefix;
    prefix += e.log_1mv(k);
    double s = 0.0;
    for (int i = 1; i <= d; ++i) s += digamma(0.5 * (st.nu(k) + 1 - i));
    e.log_det_lambda(k) = s + d * std::log(2.0) - log_det_from_cholesky(st.chol[k]);
  }
  return e;
}

// Unnormalized log responsibilities ln rho_nk.
inline Eigen::MatrixXd log_rho(const Eigen::MatrixXd& x, const BgmState& st,
                               const Expectations& e) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::Index k_max = st.a.size();
  Eigen::MatrixXd out(n, k_max);
  for (Eigen::Index k = 0; k < k_max; ++k) {
    const Eigen::MatrixXd diff = (x.rowwise() - st.m.row(k)).transpose();  // d x n
    const Eigen::MatrixXd y = st.chol[k].triangularView<Eigen::Lower>().solve(diff);
    const Eigen::VectorXd maha = y.colwise().squaredNorm().transpose();
    const double c = e.log_pi(k) + 0.5 * e.log_det_lambda(k) - 0.5 * d * std::log(2.0 * M_PI) -
                     0.5 * d / st.beta(k);
    out.col(k) = (c - 0.5 * st.nu(k) * maha.array()).matrix();
  }
  return out;
}

inline Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd ex = (logits.row(i).array() - mx).exp().matrix();
    out.row(i) = ex / ex.sum();
  }
  return out;
}

inline double elbo(const Eigen::MatrixXd& resp, const Eigen::MatrixXd& logrho,
                   const BgmState& st, const Expectations& e, const BgmPrior& prior, int d) {
  double value = 0.0;
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    for (Eigen::Index k = 0; k < resp.cols(); ++k) {
      const double r = resp(i, k);
      if (r > 0.0) value += r * (logrho(i, k) - std::log(r));
    }
  }
  const double alpha = prior.concentration;
  const Eigen::LLT<Eigen::MatrixXd> prior_llt(prior.scale_inv);
  const double prior_log_det = log_det_from_cholesky(prior_llt.matrixL());
  const double log_b0 = log_wishart_norm(prior_log_det, prior.dof, d);
  for (Eigen::Index k = 0; k < st.a.size(); ++k) {
    // Stick prior minus stick posterior.
    value += std::log(alpha) + (alpha - 1.0) * e.log_1mv(k);
    value -= std::lgamma(st.a(k) + st.b(k)) - std::lgamma(st.a(k)) - std::lgamma(st.b(k)) +
             (st.a(k) - 1.0) * e.log_v(k) + (st.b(k) - 1.0) * e.log_1mv(k);

    // Normal-Wishart prior minus posterior.
    const Eigen::VectorXd dm = st.m.row(k).transpose() - prior.mean;
    const Eigen::VectorXd y = st.chol[k].triangularView<Eigen::Lower>().solve(dm);
    const Eigen::MatrixXd w_prior =
        st.chol[k].triangularView<Eigen::Lower>().solve(prior.scale_inv);
    const Eigen::MatrixXd w_full =
        st.chol[k].transpose().triangularView<Eigen::Upper>().solve(w_prior);
    const double trace = w_full.trace();
    const double eld = e.log_det_lambda(k);
    value += 0.5 * d * std::log(prior.mean_precision / (2.0 * M_PI)) + 0.5 * eld -
             0.5 * d * prior.mean_precision / st.beta(k) -
             0.5 * prior.mean_precision * st.nu(k) * y.squaredNorm() + log_b0 +
             0.5 * (prior.dof - d - 1.0) * eld - 0.5 * st.nu(k) * trace;
    const double log_bk = log_wishart_norm(log_det_from_cholesky(st.chol[k]), st.nu(k), d);
    const double entropy = -log_bk - 0.5 * (st.nu(k) - d - 1.0) * eld + 0.5 * st.nu(k) * d;
    value -= 0.5 * eld + 0.5 * d * std::log(st.beta(k) / (2.0 * M_PI)) - 0.5 * d - entropy;
  }
  return value;
}

inline BgmPrior default_prior(const Eigen::MatrixXd& x, int k_max) {
  const Eigen::Index n = x.rows();
  const int d = static_cast<int>(x.cols());
  BgmPrior prior;
  prior.concentration = 1.0 / k_max;
  prior.mean = x.colwise().mean().transpose();
  prior.mean_precision = 1.0;
  prior.dof = d;
  const Eigen::MatrixXd centered = x.rowwise() - prior.mean.transpose();
  const Eigen::VectorXd var = centered.colwise().squaredNorm().transpose() / double(n - 1);
  prior.scale_inv = var.asDiagonal();
  for (int j = 0; j < d; ++j)
    if (!(prior.scale_inv(j, j) > 0.0)) prior.scale_inv(j, j) = kCovarianceJitter;
  return prior;
}

inline Eigen::MatrixXd initial_responsibilities(const Eigen::MatrixXd& x, int k_max, BgmInit init,
                                                Rng& rng) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(n, k_max);
  if (init == BgmInit::kRandom) {
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int k = 0; k < k_max; ++k) resp(i, k) = rng.uniform();
      resp.row(i) /= resp.row(i).sum();
    }
    return resp;
  }
  const int k_init = static_cast<int>(std::min<Eigen::Index>(k_max, n));
  auto [km, assignment] = kmeans_fit(x, k_init, rng, {.n_init = 1, .max_iter = 500});
  for (Eigen::Index i = 0; i < n; ++i) resp(i, assignment.labels[i]) = 1.0;
  return resp;
}

inline BgmModel bgm_single(const Eigen::MatrixXd& x, const BgmPrior& prior, Eigen::MatrixXd resp,
                           const BgmOptions& opts) {
  const int d = static_cast<int>(x.cols());
  const int k_max = opts.truncation;
  BgmModel model;
  model.truncation = k_max;
  detail::BgmState st;
  detail::m_step(x, resp, prior, st);
  auto ex = detail::expectations(st, d);
  Eigen::MatrixXd logrho = detail::log_rho(x, st, ex);
  for (int it = 1; it <= opts.max_iter; ++it) {
    resp = detail::softmax_rows(logrho);
    detail::m_step(x, resp, prior, st);
    ex = detail::expectations(st, d);
    logrho = detail::log_rho(x, st, ex);
    model.elbo_trace.push_back(detail::elbo(resp, logrho, st, ex, prior, d));
    model.iterations = it;
    const auto& tr = model.elbo_trace;
    if (tr.size() >= 2 && std::abs(tr.back() - tr[tr.size() - 2]) < opts.tol) {
      model.converged = true;
      break;
    }
  }
  model.responsibilities = detail::softmax_rows(logrho);

  const Eigen::ArrayXd ab = (st.a + st.b).array();
  Eigen::ArrayXd w = st.a.array() / ab;
  double remaining = 1.0;
  for (int k = 0; k < k_max; ++k) {
    const double stick = w(k);
    w(k) = stick * remaining;
    remaining *= st.b(k) / ab(k);
  }
  model.weights = (w / w.sum()).matrix();
  model.means = st.m;
  for (int k = 0; k < k_max; ++k) model.covariances.push_back(st.psi[k] / st.nu(k));
  model.stick_a = st.a;
  model.stick_b = st.b;
  model.mean_precision = st.beta;
  model.dof = st.nu;
  model.scale_inv = st.psi;
  return model;
}

}  // namespace detail

inline BgmModel bgm_fit(const Eigen::MatrixXd& x, Rng& rng, BgmOptions opts = {}) {
  if (opts.truncation < 1) throw std::invalid_argument("bgm_fit: truncation must be >= 1");
  if (x.rows() <= x.cols()) throw std::invalid_argument("bgm_fit: needs more samples than dimensions");
  if (opts.max_iter < 1) throw std::invalid_argument("bgm_fit: max_iter must be >= 1");
  if (opts.n_init < 1) throw std::invalid_argument("bgm_fit: n_init must be >= 1");
  const auto prior = detail::default_prior(x, opts.truncation);
  BgmModel best;
  for (int r = 0; r < opts.n_init; ++r) {
    auto resp = detail::initial_responsibilities(x, opts.truncation, opts.init, rng);
    BgmModel m = detail::bgm_single(x, prior, std::move(resp), opts);
    if (r == 0 || m.elbo_trace.back() > best.elbo_trace.back()) best = std::move(m);
  }
  return best;
}

}  // namespace nasinit
