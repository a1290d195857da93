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

#ifndef MDPFUZZ_DYNEM_H_
#define MDPFUZZ_DYNEM_H_

#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "mdpfuzz/gmm.h"
#include "mdpfuzz/mdp.h"
#include "mdpfuzz/random.h"

namespace mdpfuzz {

// Components whose weight statistic falls below this are re-seeded.
inline constexpr double kWeightEpsilon = 1e-8;

// Use as tau to force an update on every sequence.
inline constexpr double kAlwaysUpdate = std::numeric_limits<double>::infinity();

// Exponentially weighted complete-and-sufficient statistics of one GMM:
// per component the weight mass G0, first moment G1 and second moment G2.
struct DynEmStats {
  double gamma = 0.01;
  std::vector<double> g0;
  std::vector<Eigen::VectorXd> g1;
  std::vector<Eigen::MatrixXd> g2;

  int components() const { return static_cast<int>(g0.size()); }
  int dim() const { return g1.empty() ? 0 : static_cast<int>(g1[0].size()); }

  // Statistics of a mixture with the given parameters, scaled by `mass`.
  static DynEmStats FromParams(const GmmParams& params, double gamma,
                               double mass = 1.0);

  friend bool operator==(const DynEmStats&, const DynEmStats&) = default;
};

// G <- gamma * w * f(X) + (1 - gamma) * G for each statistic.
void UpdateParams(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                  DynEmStats& stats);

// phi_k = G0_k / sum G0, mu_k = G1_k / G0_k,
// Sigma_k = G2_k / G0_k - mu_k mu_k^T + eps I (diagonal fallback if the
// result is not positive-definite). Throws DegenerateComponent when some
// G0_k <= kWeightEpsilon.
GmmParams GetGmmParams(const DynEmStats& stats);

// Re-seeds every component with G0_k <= kWeightEpsilon at `anchor` with an
// identity covariance. Returns the number of components re-seeded.
int ReseedDegenerate(DynEmStats& stats, const Eigen::VectorXd& anchor);

// The pair of statistics behind the single-state GMM (dim d) and the
// concatenated-pair GMM (dim 2d).
struct DynEmState {
  DynEmStats single;
  DynEmStats concat;
  // When false, responsibilities are the raw phi_k N(x | ...) values.
  bool normalize_responsibilities = true;

  friend bool operator==(const DynEmState&, const DynEmState&) = default;
};

struct SequenceDensity {
  double raw_log_density = 0.0;
  // exp(raw_log_density / max(1, length - 1)).
  double step_density = 0.0;
  int length = 0;
};

Eigen::VectorXd Concat(const State& a, const State& b);

SequenceDensity SeqDensity(const StateSequence& seq,
                           const GaussianMixture& single,
                           const GaussianMixture& concat);
SequenceDensity SeqDensity(const StateSequence& seq, const GmmParams& single,
                           const GmmParams& concat);

// One DynEM pass over a sequence: responsibilities come from the GMMs
// derived at the start of the pass, then every S_t and every S_t||S_{t+1}
// is folded into the statistics in order.
void DynEmUpdate(DynEmState& state, const StateSequence& seq);

// Density under the current parameters; if step_density < tau the sequence
// is folded into the statistics. Returns the pre-update density.
SequenceDensity SeqDensityAndMaybeUpdate(const StateSequence& seq,
                                         DynEmState& state, double tau);

// G0_k = 1/K; means drawn from seed_states; covariances are identity scaled
// by the per-dimension sample variance (floored at 1). The concatenated
// statistics are seeded from consecutive pairs of seed_states.
DynEmState InitDynEm(int k, int single_dim, const std::vector<State>& seed_states,
                     RandomStream& rng, double gamma,
                     bool normalize_responsibilities = true);

// Owns a DynEmState and caches the GMMs derived from it between updates, so
// density queries cost O(length * K * d^2) regardless of history.
class DensityModel {
 public:
  explicit DensityModel(DynEmState state);

  const DynEmState& state() const { return state_; }
  const GaussianMixture& single() const { return *single_; }
  const GaussianMixture& concat() const { return *concat_; }
  int single_dim() const { return state_.single.dim(); }

  SequenceDensity Evaluate(const StateSequence& seq) const;
  SequenceDensity EvaluateAndMaybeUpdate(const StateSequence& seq, double tau);
  void Update(const StateSequence& seq);

 private:
  void Refresh();

  DynEmState state_;
  std::optional<GaussianMixture> single_;
  std::optional<GaussianMixture> concat_;
};

// Versioned text snapshots. Doubles are written as hex floats, so reading
// back reproduces every bit.
void WriteDynEmSnapshot(std::ostream& out, const DynEmState& state);
DynEmState ReadDynEmSnapshot(std::istream& in);
void WriteGmmSnapshot(std::ostream& out, const GmmParams& params);
GmmParams ReadGmmSnapshot(std::istream& in);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_DYNEM_H_
