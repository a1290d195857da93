// Copyright 2026 The mdpfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdpfuzz/envs/chain.h"

#include <cmath>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mdpfuzz/error.h"

namespace mdpfuzz::envs {
namespace {

double LogNormalPdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                    const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNonPositiveDefiniteCovariance, "chain covariance");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  Eigen::VectorXd z = x - mean;
  l.triangularView<Eigen::Lower>().solveInPlace(z);
  const double d = static_cast<double>(x.size());
  return -0.5 * d * std::log(2.0 * std::numbers::pi) -
         l.diagonal().array().log().sum() - 0.5 * z.squaredNorm();
}

}  // namespace

ChainConstants ChainConstants::Default(int dim) {
  ChainConstants c;
  if (dim == 2) {
    c.a.resize(2, 2);
    c.a << 0.8, 0.2, -0.2, 0.8;
    c.b = Eigen::Vector2d(0.1, -0.05);
  } else {
    c.a = 0.8 * Eigen::MatrixXd::Identity(dim, dim);
    c.b = Eigen::VectorXd::Constant(dim, 0.05);
  }
  return c;
}

double SpectralRadius(const Eigen::MatrixXd& a) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd SolveDiscreteLyapunov(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& q) {
  const int d = static_cast<int>(a.rows());
  if (!(SpectralRadius(a) < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig,
                "stationary distribution needs spectral radius < 1");
  }
  // vec(P) = (I - A (x) A)^{-1} vec(Q)
  Eigen::MatrixXd kron(d * d, d * d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) kron.block(i * d, j * d, d, d) = a(i, j) * a;
  }
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(d * d, d * d) - kron;
  const Eigen::VectorXd vec_q = Eigen::Map<const Eigen::VectorXd>(q.data(), d * d);
  const Eigen::VectorXd vec_p = lhs.partialPivLu().solve(vec_q);
  Eigen::MatrixXd p = Eigen::Map<const Eigen::MatrixXd>(vec_p.data(), d, d);
  return 0.5 * (p + p.transpose());
}

double ChainExactLogDensity(const StateSequence& seq, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b, double sigma) {
  if (seq.empty()) throw Error(ErrorCode::kEmptyInput, "empty sequence");
  const int d = static_cast<int>(b.size());
  if (a.rows() != d || a.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "chain A/b shapes");
  }
  for (const State& s : seq) {
    if (s.size() != d) throw Error(ErrorCode::kDimensionMismatch, "chain state");
  }
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd noise = sigma * sigma * ident;
  const Eigen::VectorXd stat_mean = (ident - a).partialPivLu().solve(b);
  const Eigen::MatrixXd stat_cov = SolveDiscreteLyapunov(a, noise);
  double total = LogNormalPdf(seq[0], stat_mean, stat_cov);
  for (size_t t = 0; t + 1 < seq.size(); ++t) {
    total += LogNormalPdf(seq[t + 1], a * seq[t] + b, noise);
  }
  return total;
}

ChainEnvironment::ChainEnvironment(ChainConstants c) : c_(std::move(c)) {
  const int d = static_cast<int>(c_.b.size());
  if (d < 1 || c_.a.rows() != d || c_.a.cols() != d) {
    throw Error(ErrorCode::kInvalidConfig, "chain A must be d x d with d = |b|");
  }
  // Marginally stable A (radius exactly 1) is admitted for sensitivity
  // fixtures; it has no stationary density.
  if (SpectralRadius(c_.a) > 1.0 + 1e-12) {
    throw Error(ErrorCode::kInvalidConfig, "chain A is unstable");
  }
  if (!(c_.sigma >= 0.0) || !(c_.init_half_width > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "chain sigma / bounds");
  }
  spec_.name = "chain";
  spec_.state_dim = d;
  spec_.initial_state_bounds.assign(
      d, Interval{-c_.init_half_width, c_.init_half_width});
  spec_.mutable_dims.assign(d, true);
  spec_.default_horizon = c_.horizon;
  spec_.Check();
}

State ChainEnvironment::Sample(RandomStream& rng) const {
  State s(spec_.state_dim);
  for (int i = 0; i < spec_.state_dim; ++i) {
    s[i] = rng.Uniform(-c_.init_half_width, c_.init_half_width);
  }
  return s;
}

bool ChainEnvironment::Validate(const State& s) const {
  return s.size() == spec_.state_dim && s.allFinite() && spec_.WithinBounds(s);
}

State ChainEnvironment::Step(const State& s, const Action& /*a*/,
                             RandomStream& rng) const {
  State next = c_.a * s + c_.b;
  if (c_.sigma > 0.0) {
    for (int i = 0; i < next.size(); ++i) next[i] += c_.sigma * rng.Normal();
  }
  return next;
}

double ChainEnvironment::Reward(const State& s, const Action& /*a*/) const {
  return -s.squaredNorm();
}

bool ChainEnvironment::Crashed(const State& s) const {
  return s.cwiseAbs().maxCoeff() > c_.crash_threshold;
}

}  // namespace mdpfuzz::envs
