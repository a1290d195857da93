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

#ifndef MDPFUZZ_GMM_H_
#define MDPFUZZ_GMM_H_

#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace mdpfuzz {

// Diagonal regularizer added to every covariance derived from statistics.
inline constexpr double kCovEpsilon = 1e-6;

struct GmmParams {
  Eigen::VectorXd weights;                  // simplex, size K
  std::vector<Eigen::VectorXd> means;       // K x d
  std::vector<Eigen::MatrixXd> covariances; // K x (d x d), SPD

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means[0].size()); }

  // Throws DimensionMismatch on inconsistent shapes.
  void CheckShape() const;
};

// A mixture with its Cholesky factors precomputed. Construction validates
// the parameters; evaluation is const and thread-safe.
class GaussianMixture {
 public:
  explicit GaussianMixture(GmmParams params);

  const GmmParams& params() const { return params_; }
  int dim() const { return params_.dim(); }
  int components() const { return params_.components(); }

  double LogPdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double Pdf(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // log(phi_k N(x | mu_k, Sigma_k)) for every component.
  Eigen::VectorXd LogWeightedComponents(
      const Eigen::Ref<const Eigen::VectorXd>& x) const;
  // Normalized posterior responsibilities for x.
  Eigen::VectorXd Responsibilities(
      const Eigen::Ref<const Eigen::VectorXd>& x) const;

 private:
  GmmParams params_;
  std::vector<Eigen::MatrixXd> chol_lower_;
  // log phi_k - d/2 log(2 pi) - sum log L_ii; -inf for zero-weight components.
  Eigen::VectorXd log_norm_;
};

double LogGmmPdf(const GmmParams& params, const Eigen::VectorXd& x);
double GmmPdf(const GmmParams& params, const Eigen::VectorXd& x);

double LogSumExp(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_GMM_H_
