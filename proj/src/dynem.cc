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

#include "mdpfuzz/dynem.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include <Eigen/Cholesky>

#include "mdpfuzz/error.h"

namespace mdpfuzz {
namespace {

void CheckSequence(const StateSequence& seq, int d) {
  if (seq.empty()) {
    throw Error(ErrorCode::kEmptyInput, "state sequence is empty");
  }
  for (const State& s : seq) {
    if (s.size() != d) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "state dim " + std::to_string(s.size()) + " vs model dim " +
                      std::to_string(d));
    }
  }
}

Eigen::VectorXd ComponentWeights(const GaussianMixture& gmm,
                                 const Eigen::VectorXd& x, bool normalize) {
  if (normalize) return gmm.Responsibilities(x);
  return gmm.LogWeightedComponents(x).array().exp().matrix();
}

}  // namespace

DynEmStats DynEmStats::FromParams(const GmmParams& params, double gamma,
                                  double mass) {
  params.CheckShape();
  DynEmStats stats;
  stats.gamma = gamma;
  const int k = params.components();
  for (int i = 0; i < k; ++i) {
    const double g0 = mass * params.weights[i];
    stats.g0.push_back(g0);
    stats.g1.push_back(g0 * params.means[i]);
    stats.g2.push_back(g0 * (params.covariances[i] +
                             params.means[i] * params.means[i].transpose()));
  }
  return stats;
}

void UpdateParams(const Eigen::VectorXd& w, const Eigen::VectorXd& x,
                  DynEmStats& stats) {
  const int k = stats.components();
  if (w.size() != k) {
    throw Error(ErrorCode::kDimensionMismatch, "responsibility vector length");
  }
  if (x.size() != stats.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "sample dim vs statistics dim");
  }
  const double gamma = stats.gamma;
  const double keep = 1.0 - gamma;
  for (int i = 0; i < k; ++i) {
    const double gw = gamma * w[i];
    stats.g0[i] = gw + keep * stats.g0[i];
    stats.g1[i] = gw * x + keep * stats.g1[i];
    stats.g2[i] = gw * (x * x.transpose()) + keep * stats.g2[i];
  }
}

GmmParams GetGmmParams(const DynEmStats& stats) {
  const int k = stats.components();
  const int d = stats.dim();
  if (k < 1 || d < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "empty DynEM statistics");
  }
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    if (!(stats.g0[i] > kWeightEpsilon)) {
      throw Error(ErrorCode::kDegenerateComponent,
                  "component " + std::to_string(i) + " has G0 = " +
                      std::to_string(stats.g0[i]));
    }
    total += stats.g0[i];
  }
  GmmParams params;
  params.weights.resize(k);
  const Eigen::MatrixXd eps = kCovEpsilon * Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < k; ++i) {
    params.weights[i] = stats.g0[i] / total;
    Eigen::VectorXd mu = stats.g1[i] / stats.g0[i];
    Eigen::MatrixXd cov = stats.g2[i] / stats.g0[i] - mu * mu.transpose() + eps;
    cov = 0.5 * (cov + cov.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      // Momentarily rank-deficient statistics: keep the variances only.
      Eigen::VectorXd diag = cov.diagonal().cwiseMax(kCovEpsilon);
      cov = diag.asDiagonal();
    }
    params.means.push_back(std::move(mu));
    params.covariances.push_back(std::move(cov));
  }
  return params;
}

int ReseedDegenerate(DynEmStats& stats, const Eigen::VectorXd& anchor) {
  const int k = stats.components();
  const int d = stats.dim();
  if (anchor.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch, "re-seed anchor dim");
  }
  double total = 0.0;
  for (double g : stats.g0) total += g;
  double mass = total / k;
  if (!(mass > kWeightEpsilon)) mass = 1.0 / k;
  int reseeded = 0;
  for (int i = 0; i < k; ++i) {
    if (stats.g0[i] > kWeightEpsilon) continue;
    stats.g0[i] = mass;
    stats.g1[i] = mass * anchor;
    stats.g2[i] = mass * (Eigen::MatrixXd::Identity(d, d) +
                          anchor * anchor.transpose());
    ++reseeded;
  }
  return reseeded;
}

Eigen::VectorXd Concat(const State& a, const State& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

SequenceDensity SeqDensity(const StateSequence& seq,
                           const GaussianMixture& single,
                           const GaussianMixture& concat) {
  const int d = single.dim();
  if (concat.dim() != 2 * d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "concatenated GMM dim must be twice the single GMM dim");
  }
  CheckSequence(seq, d);
  const int length = static_cast<int>(seq.size());
  double log_p = single.LogPdf(seq[0]);
  for (int t = 0; t + 1 < length; ++t) {
    log_p += concat.LogPdf(Concat(seq[t], seq[t + 1])) - single.LogPdf(seq[t]);
  }
  SequenceDensity out;
  out.raw_log_density = log_p;
  out.length = length;
  out.step_density = std::exp(log_p / std::max(1, length - 1));
  return out;
}

SequenceDensity SeqDensity(const StateSequence& seq, const GmmParams& single,
                           const GmmParams& concat) {
  return SeqDensity(seq, GaussianMixture(single), GaussianMixture(concat));
}

void DynEmUpdate(DynEmState& state, const StateSequence& seq) {
  const int d = state.single.dim();
  if (state.concat.dim() != 2 * d) {
    throw Error(ErrorCode::kDimensionMismatch, "DynEM state dims");
  }
  CheckSequence(seq, d);
  ReseedDegenerate(state.single, seq.back());
  if (seq.size() >= 2) {
    ReseedDegenerate(state.concat,
                     Concat(seq[seq.size() - 2], seq[seq.size() - 1]));
  }
  const GaussianMixture single(GetGmmParams(state.single));
  const GaussianMixture concat(GetGmmParams(state.concat));
  const bool normalize = state.normalize_responsibilities;
  for (const State& s : seq) {
    UpdateParams(ComponentWeights(single, s, normalize), s, state.single);
  }
  for (size_t t = 0; t + 1 < seq.size(); ++t) {
    const Eigen::VectorXd x = Concat(seq[t], seq[t + 1]);
    UpdateParams(ComponentWeights(concat, x, normalize), x, state.concat);
  }
  ReseedDegenerate(state.single, seq.back());
  const StateSequence::size_type n = seq.size();
  ReseedDegenerate(state.concat,
                   n >= 2 ? Concat(seq[n - 2], seq[n - 1])
                          : Concat(seq[0], seq[0]));
}

SequenceDensity SeqDensityAndMaybeUpdate(const StateSequence& seq,
                                         DynEmState& state, double tau) {
  const SequenceDensity density =
      SeqDensity(seq, GetGmmParams(state.single), GetGmmParams(state.concat));
  if (density.step_density < tau) DynEmUpdate(state, seq);
  return density;
}

DynEmState InitDynEm(int k, int single_dim, const std::vector<State>& seed_states,
                     RandomStream& rng, double gamma,
                     bool normalize_responsibilities) {
  if (k < 1) throw Error(ErrorCode::kInvalidConfig, "K must be >= 1");
  if (seed_states.empty()) {
    throw Error(ErrorCode::kEmptySample, "no seed states for DynEM init");
  }
  for (const State& s : seed_states) {
    if (s.size() != single_dim) {
      throw Error(ErrorCode::kDimensionMismatch, "seed state dim");
    }
  }
  std::vector<Eigen::VectorXd> pairs;
  if (seed_states.size() == 1) {
    pairs.push_back(Concat(seed_states[0], seed_states[0]));
  } else {
    for (size_t t = 0; t + 1 < seed_states.size(); ++t) {
      pairs.push_back(Concat(seed_states[t], seed_states[t + 1]));
    }
  }

  auto seed_stats = [&](const std::vector<Eigen::VectorXd>& sample) {
    const int n = static_cast<int>(sample.size());
    const int d = static_cast<int>(sample[0].size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& x : sample) mean += x;
    mean /= n;
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (const auto& x : sample) var += (x - mean).cwiseAbs2();
    var /= n;
    const Eigen::MatrixXd cov = var.cwiseMax(1.0).asDiagonal();

    // Without replacement while the sample is large enough.
    std::vector<int> picks;
    if (k <= n) {
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.Index(n - i));
        std::swap(order[i], order[j]);
        picks.push_back(order[i]);
      }
    } else {
      for (int i = 0; i < k; ++i) picks.push_back(static_cast<int>(rng.Index(n)));
    }
    GmmParams params;
    params.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    for (int idx : picks) {
      params.means.push_back(sample[idx]);
      params.covariances.push_back(cov);
    }
    return DynEmStats::FromParams(params, gamma);
  };

  DynEmState state;
  state.single = seed_stats(seed_states);
  state.concat = seed_stats(pairs);
  state.normalize_responsibilities = normalize_responsibilities;
  return state;
}

DensityModel::DensityModel(DynEmState state) : state_(std::move(state)) {
  Refresh();
}

void DensityModel::Refresh() {
  single_.emplace(GetGmmParams(state_.single));
  concat_.emplace(GetGmmParams(state_.concat));
}

SequenceDensity DensityModel::Evaluate(const StateSequence& seq) const {
  return SeqDensity(seq, *single_, *concat_);
}

void DensityModel::Update(const StateSequence& seq) {
  DynEmUpdate(state_, seq);
  Refresh();
}

SequenceDensity DensityModel::EvaluateAndMaybeUpdate(const StateSequence& seq,
                                                     double tau) {
  const SequenceDensity density = Evaluate(seq);
  if (density.step_density < tau) Update(seq);
  return density;
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

constexpr const char* kDynEmMagic = "mdpfuzz-dynem";
constexpr const char* kGmmMagic = "mdpfuzz-gmm";
constexpr int kSnapshotVersion = 1;

void PutDouble(std::ostream& out, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), " %a", v);
  out << buf;
}

std::string Expect(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) {
    throw Error(ErrorCode::kSnapshotFormat,
                std::string("unexpected end of snapshot, wanted ") + what);
  }
  return tok;
}

void ExpectKeyword(std::istream& in, const std::string& keyword) {
  const std::string tok = Expect(in, keyword.c_str());
  if (tok != keyword) {
    throw Error(ErrorCode::kSnapshotFormat,
                "expected '" + keyword + "', got '" + tok + "'");
  }
}

double GetDouble(std::istream& in) {
  const std::string tok = Expect(in, "number");
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw Error(ErrorCode::kSnapshotFormat, "bad number '" + tok + "'");
  }
  return v;
}

long GetInt(std::istream& in) {
  const std::string tok = Expect(in, "integer");
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0') {
    throw Error(ErrorCode::kSnapshotFormat, "bad integer '" + tok + "'");
  }
  return v;
}

void WriteStats(std::ostream& out, const char* label, const DynEmStats& s) {
  const int k = s.components();
  const int d = s.dim();
  out << label << ' ' << k << ' ' << d << "\ngamma";
  PutDouble(out, s.gamma);
  out << '\n';
  for (int i = 0; i < k; ++i) {
    out << "component " << i << "\ng0";
    PutDouble(out, s.g0[i]);
    out << "\ng1";
    for (int r = 0; r < d; ++r) PutDouble(out, s.g1[i][r]);
    out << "\ng2";
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) PutDouble(out, s.g2[i](r, c));
    }
    out << '\n';
  }
}

DynEmStats ReadStats(std::istream& in, const char* label) {
  ExpectKeyword(in, label);
  const long k = GetInt(in);
  const long d = GetInt(in);
  if (k < 1 || d < 1 || k > 100000 || d > 100000) {
    throw Error(ErrorCode::kSnapshotFormat, "bad K/d in snapshot");
  }
  DynEmStats s;
  ExpectKeyword(in, "gamma");
  s.gamma = GetDouble(in);
  for (long i = 0; i < k; ++i) {
    ExpectKeyword(in, "component");
    if (GetInt(in) != i) {
      throw Error(ErrorCode::kSnapshotFormat, "component index out of order");
    }
    ExpectKeyword(in, "g0");
    s.g0.push_back(GetDouble(in));
    ExpectKeyword(in, "g1");
    Eigen::VectorXd g1(d);
    for (long r = 0; r < d; ++r) g1[r] = GetDouble(in);
    s.g1.push_back(std::move(g1));
    ExpectKeyword(in, "g2");
    Eigen::MatrixXd g2(d, d);
    for (long r = 0; r < d; ++r) {
      for (long c = 0; c < d; ++c) g2(r, c) = GetDouble(in);
    }
    s.g2.push_back(std::move(g2));
  }
  return s;
}

void ExpectHeader(std::istream& in, const char* magic) {
  ExpectKeyword(in, magic);
  const std::string version = Expect(in, "version");
  if (version != "v" + std::to_string(kSnapshotVersion)) {
    throw Error(ErrorCode::kSnapshotFormat,
                "unsupported snapshot version " + version);
  }
}

}  // namespace

void WriteDynEmSnapshot(std::ostream& out, const DynEmState& state) {
  out << kDynEmMagic << " v" << kSnapshotVersion << '\n';
  out << "normalize " << (state.normalize_responsibilities ? 1 : 0) << '\n';
  WriteStats(out, "single", state.single);
  WriteStats(out, "concat", state.concat);
  out << "end\n";
}

DynEmState ReadDynEmSnapshot(std::istream& in) {
  ExpectHeader(in, kDynEmMagic);
  DynEmState state;
  ExpectKeyword(in, "normalize");
  state.normalize_responsibilities = GetInt(in) != 0;
  state.single = ReadStats(in, "single");
  state.concat = ReadStats(in, "concat");
  ExpectKeyword(in, "end");
  if (state.concat.dim() != 2 * state.single.dim()) {
    throw Error(ErrorCode::kSnapshotFormat, "concat dim != 2 * single dim");
  }
  return state;
}

void WriteGmmSnapshot(std::ostream& out, const GmmParams& params) {
  params.CheckShape();
  const int k = params.components();
  const int d = params.dim();
  out << kGmmMagic << " v" << kSnapshotVersion << '\n' << k << ' ' << d << '\n';
  for (int i = 0; i < k; ++i) {
    out << "weight";
    PutDouble(out, params.weights[i]);
    out << "\nmean";
    for (int r = 0; r < d; ++r) PutDouble(out, params.means[i][r]);
    out << "\ncov";
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) PutDouble(out, params.covariances[i](r, c));
    }
    out << '\n';
  }
  out << "end\n";
}

GmmParams ReadGmmSnapshot(std::istream& in) {
  ExpectHeader(in, kGmmMagic);
  const long k = GetInt(in);
  const long d = GetInt(in);
  if (k < 1 || d < 1 || k > 100000 || d > 100000) {
    throw Error(ErrorCode::kSnapshotFormat, "bad K/d in snapshot");
  }
  GmmParams params;
  params.weights.resize(k);
  for (long i = 0; i < k; ++i) {
    ExpectKeyword(in, "weight");
    params.weights[i] = GetDouble(in);
    ExpectKeyword(in, "mean");
    Eigen::VectorXd mu(d);
    for (long r = 0; r < d; ++r) mu[r] = GetDouble(in);
    ExpectKeyword(in, "cov");
    Eigen::MatrixXd cov(d, d);
    for (long r = 0; r < d; ++r) {
      for (long c = 0; c < d; ++c) cov(r, c) = GetDouble(in);
    }
    params.means.push_back(std::move(mu));
    params.covariances.push_back(std::move(cov));
  }
  ExpectKeyword(in, "end");
  return params;
}

}  // namespace mdpfuzz
