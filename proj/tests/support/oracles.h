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

#ifndef MDPFUZZ_TESTS_SUPPORT_ORACLES_H_
#define MDPFUZZ_TESTS_SUPPORT_ORACLES_H_

// Independent reference implementations used only by tests. They share no
// numerical code with the library: densities go through long-double
// Gaussian elimination instead of Cholesky factors.

#include <vector>

#include <Eigen/Core>

#include "mdpfuzz/gmm.h"
#include "mdpfuzz/mdp.h"
#include "mdpfuzz/random.h"

namespace mdpfuzz::oracle {

long double GaussianLogPdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                           const Eigen::MatrixXd& cov);
// log of sum_k phi_k N(x | mu_k, Sigma_k), summed directly in long double.
long double GmmLogPdf(const GmmParams& params, const Eigen::VectorXd& x);
// Markov factorization evaluated term by term.
long double SeqLogDensity(const StateSequence& seq, const GmmParams& single,
                          const GmmParams& concat);

GmmParams RandomGmm(int k, int d, RandomStream& rng);

struct EmFit {
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  int iterations = 0;
};
// Batch EM with full covariances, started from the given means with unit
// covariances and uniform weights.
EmFit BatchEm(const std::vector<Eigen::VectorXd>& points,
              const std::vector<Eigen::VectorXd>& initial_means, int max_iterations = 500,
              double tolerance = 1e-10);

// Permutation p minimizing sum_i |a_i - b_{p(i)}|_inf (brute force).
std::vector<int> MatchComponents(const std::vector<Eigen::VectorXd>& a,
                                 const std::vector<Eigen::VectorXd>& b);

// Probability that a random positive outscores a random negative, ties
// counted half, by enumerating all pairs.
double PairCountAuc(const std::vector<double>& scores, const std::vector<bool>& positive);

double Spearman(const std::vector<double>& a, const std::vector<double>& b);

// Chain log-density summed per term in long double from explicit
// stationary moments.
long double ChainLogDensity(const StateSequence& seq, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b, double sigma,
                            const Eigen::VectorXd& stationary_mean,
                            const Eigen::MatrixXd& stationary_cov);

// Stationary covariance of S' = A S + b + N(0, sigma^2 I) by fixed-point
// iteration of P = A P A^T + sigma^2 I.
Eigen::MatrixXd StationaryCovarianceByIteration(const Eigen::MatrixXd& a, double sigma);

}  // namespace mdpfuzz::oracle

#endif  // MDPFUZZ_TESTS_SUPPORT_ORACLES_H_
