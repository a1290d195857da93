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

#include "mdpfuzz/gmm.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

void GmmParams::CheckShape() const {
  const int k = components();
  if (k < 1 || static_cast<int>(means.size()) != k ||
      static_cast<int>(covariances.size()) != k) {
    throw Error(ErrorCode::kDimensionMismatch, "GMM component count");
  }
  const int d = dim();
  if (d < 1) throw Error(ErrorCode::kDimensionMismatch, "GMM dim < 1");
  for (int i = 0; i < k; ++i) {
    if (means[i].size() != d || covariances[i].rows() != d ||
        covariances[i].cols() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "GMM component shape");
    }
  }
}

GaussianMixture::GaussianMixture(GmmParams params) : params_(std::move(params)) {
  params_.CheckShape();
  const int k = components();
  const int d = dim();
  const double weight_sum = params_.weights.sum();
  if (!(params_.weights.minCoeff() >= 0.0) ||
      std::abs(weight_sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "GMM weights are not a simplex");
  }
  chol_lower_.resize(k);
  log_norm_.resize(k);
  const double half_d_log_2pi = 0.5 * d * std::log(2.0 * std::numbers::pi);
  for (int i = 0; i < k; ++i) {
    const Eigen::MatrixXd& cov = params_.covariances[i];
    if (!cov.allFinite() || !params_.means[i].allFinite() ||
        !cov.isApprox(cov.transpose(), 1e-9)) {
      throw Error(ErrorCode::kNonPositiveDefiniteCovariance,
                  "component " + std::to_string(i) + " is not symmetric/finite");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kNonPositiveDefiniteCovariance,
                  "component " + std::to_string(i));
    }
    chol_lower_[i] = llt.matrixL();
    const double log_det_half = chol_lower_[i].diagonal().array().log().sum();
    const double w = params_.weights[i];
    log_norm_[i] = (w > 0.0 ? std::log(w)
                            : -std::numeric_limits<double>::infinity()) -
                   half_d_log_2pi - log_det_half;
  }
}

Eigen::VectorXd GaussianMixture::LogWeightedComponents(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "point dim " + std::to_string(x.size()) + " vs GMM dim " +
                    std::to_string(dim()));
  }
  const int k = components();
  Eigen::VectorXd out(k);
  for (int i = 0; i < k; ++i) {
    Eigen::VectorXd z = x - params_.means[i];
    chol_lower_[i].triangularView<Eigen::Lower>().solveInPlace(z);
    out[i] = log_norm_[i] - 0.5 * z.squaredNorm();
  }
  return out;
}

double GaussianMixture::LogPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return LogSumExp(LogWeightedComponents(x));
}

double GaussianMixture::Pdf(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return std::exp(LogPdf(x));
}

Eigen::VectorXd GaussianMixture::Responsibilities(
    const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd logs = LogWeightedComponents(x);
  const double lse = LogSumExp(logs);
  if (!std::isfinite(lse)) {
    // Every component underflowed; fall back to the prior weights.
    return params_.weights;
  }
  return (logs.array() - lse).exp().matrix();
}

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double LogGmmPdf(const GmmParams& params, const Eigen::VectorXd& x) {
  return GaussianMixture(params).LogPdf(x);
}

double GmmPdf(const GmmParams& params, const Eigen::VectorXd& x) {
  return std::exp(LogGmmPdf(params, x));
}

}  // namespace mdpfuzz
