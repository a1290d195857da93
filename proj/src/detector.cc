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

#include "mdpfuzz/detector.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mdpfuzz/error.h"
#include "mdpfuzz/random.h"

namespace mdpfuzz {

namespace {

void CheckPoints(const std::vector<Feature>& points) {
  if (points.empty()) throw Error(ErrorCode::kEmptyInput, "no points");
  const Eigen::Index d = points.front().size();
  if (d == 0) throw Error(ErrorCode::kEmptyInput, "zero-dimensional features");
  for (const Feature& p : points) {
    if (p.size() != d) throw Error(ErrorCode::kDimensionMismatch, "feature dimensions differ");
    if (!p.allFinite()) throw Error(ErrorCode::kNonFiniteState, "non-finite feature");
  }
}

// One averaging step: mean of the points within `h` of y. Returns the
// neighbor count (0 leaves y untouched).
int ShiftOnce(const Eigen::MatrixXd& x, const Feature& y, double h2, Feature& out) {
  out.setZero(y.size());
  int count = 0;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if ((x.col(j) - y).squaredNorm() <= h2) {
      out += x.col(j);
      ++count;
    }
  }
  if (count == 0) {
    out = y;
    return 0;
  }
  out /= static_cast<double>(count);
  return count;
}

Feature Converge(const Eigen::MatrixXd& x, Feature y, double h, double tol, int max_iter,
                 int* support) {
  Feature next(y.size());
  const double h2 = h * h;
  int count = 0;
  for (int it = 0; it < max_iter; ++it) {
    count = ShiftOnce(x, y, h2, next);
    const double shift = (next - y).norm();
    y.swap(next);
    if (shift < tol) break;
  }
  if (support) *support = count;
  return y;
}

}  // namespace

ClusterModel MeanShiftFit(const std::vector<Feature>& points, double bandwidth,
                          const MeanShiftOptions& options) {
  CheckPoints(points);
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw Error(ErrorCode::kInvalidConfig, "bandwidth must be positive");
  }
  const Eigen::Index d = points.front().size();
  Eigen::MatrixXd x(d, static_cast<Eigen::Index>(points.size()));
  for (size_t i = 0; i < points.size(); ++i) x.col(static_cast<Eigen::Index>(i)) = points[i];

  const double tol = options.tolerance * bandwidth;
  struct Mode {
    Feature at;
    int support;
  };
  std::vector<Mode> modes;
  modes.reserve(points.size());
  for (const Feature& p : points) {
    int support = 0;
    Feature m = Converge(x, p, bandwidth, tol, options.max_iterations, &support);
    modes.push_back({std::move(m), support});
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& a, const Mode& b) { return a.support > b.support; });

  const double merge = options.merge_fraction * bandwidth;
  ClusterModel model;
  model.bandwidth = bandwidth;
  for (const Mode& m : modes) {
    bool near = false;
    for (const Feature& c : model.centers) {
      if ((c - m.at).norm() < merge) {
        near = true;
        break;
      }
    }
    if (!near) model.centers.push_back(m.at);
  }
  // Polish: continue to an exact fixed point. A polished center can drift
  // toward another one, so merge again afterwards.
  std::vector<Feature> polished;
  for (const Feature& c : model.centers) {
    Feature p = Converge(x, c, bandwidth, 0.0, options.max_iterations, nullptr);
    bool near = false;
    for (const Feature& q : polished) {
      if ((q - p).norm() < merge) {
        near = true;
        break;
      }
    }
    if (!near) polished.push_back(std::move(p));
  }
  model.centers = std::move(polished);
  model.normal_center_ids.resize(model.centers.size());
  std::iota(model.normal_center_ids.begin(), model.normal_center_ids.end(), 0);
  return model;
}

std::vector<int> AssignToCenters(const ClusterModel& model, const std::vector<Feature>& points) {
  if (model.centers.empty()) throw Error(ErrorCode::kEmptyInput, "model has no centers");
  std::vector<int> labels;
  labels.reserve(points.size());
  for (const Feature& p : points) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < model.centers.size(); ++k) {
      double dist = (model.centers[k] - p).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = static_cast<int>(k);
      }
    }
    labels.push_back(best);
  }
  return labels;
}

ClusterModel FitLabeled(const std::vector<Feature>& points, const std::vector<bool>& abnormal,
                        double bandwidth, const MeanShiftOptions& options) {
  if (points.size() != abnormal.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "points and labels differ in length");
  }
  ClusterModel model = MeanShiftFit(points, bandwidth, options);
  std::vector<int> votes(model.centers.size(), 0);
  std::vector<int> assigned = AssignToCenters(model, points);
  for (size_t i = 0; i < points.size(); ++i) {
    votes[static_cast<size_t>(assigned[i])] += abnormal[i] ? -1 : 1;
  }
  model.normal_center_ids.clear();
  for (size_t k = 0; k < votes.size(); ++k) {
    if (votes[k] > 0) model.normal_center_ids.push_back(static_cast<int>(k));
  }
  if (model.normal_center_ids.empty()) {
    throw Error(ErrorCode::kEmptyInput, "no cluster is predominantly normal");
  }
  return model;
}

double AbnormalityScore(const ClusterModel& model, const Feature& x) {
  if (model.normal_center_ids.empty()) {
    throw Error(ErrorCode::kEmptyInput, "model has no normal centers");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int id : model.normal_center_ids) {
    const Feature& c = model.centers.at(static_cast<size_t>(id));
    if (c.size() != x.size()) throw Error(ErrorCode::kDimensionMismatch, "feature dimension");
    best = std::min(best, (c - x).norm());
  }
  return best;
}

bool Classify(const ClusterModel& model, const Feature& x, double threshold) {
  return AbnormalityScore(model, x) > threshold;
}

namespace {

void CheckScores(const std::vector<double>& scores, const std::vector<bool>& positive,
                 size_t* n_pos, size_t* n_neg) {
  if (scores.size() != positive.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "scores and labels differ in length");
  }
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::kNonFiniteState, "NaN score");
  }
  *n_pos = static_cast<size_t>(std::count(positive.begin(), positive.end(), true));
  *n_neg = positive.size() - *n_pos;
  if (*n_pos == 0 || *n_neg == 0) {
    throw Error(ErrorCode::kEmptyInput, "AUC needs both normal and abnormal samples");
  }
}

}  // namespace

double AucRoc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  size_t n_pos, n_neg;
  CheckScores(scores, positive, &n_pos, &n_neg);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // Twice the rank sum of positives, kept integral: a tie group spanning
  // ranks i+1..j contributes (i+1+j) per member.
  unsigned long long twice_rank_sum = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    unsigned long long pos_in_group = 0;
    for (size_t k = i; k < j; ++k) pos_in_group += positive[order[k]] ? 1 : 0;
    twice_rank_sum += pos_in_group * static_cast<unsigned long long>(i + 1 + j);
    i = j;
  }
  const unsigned long long np = n_pos, nn = n_neg;
  const unsigned long long numerator = twice_rank_sum - np * (np + 1);
  return static_cast<double>(numerator) / static_cast<double>(2 * np * nn);
}

std::vector<RocPoint> RocCurve(const std::vector<double>& scores,
                               const std::vector<bool>& positive) {
  size_t n_pos, n_neg;
  CheckScores(scores, positive, &n_pos, &n_neg);
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });
  std::vector<RocPoint> roc;
  roc.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  size_t tp = 0, fp = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (positive[order[j]] ? tp : fp) += 1;
      ++j;
    }
    roc.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos), scores[order[i]]});
    i = j;
  }
  return roc;
}

std::string RocCsv(const std::vector<RocPoint>& roc) {
  std::string out = "fpr,tpr,threshold\n";
  char buf[128];
  for (const RocPoint& p : roc) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.fpr, p.tpr, p.threshold);
    out += buf;
  }
  return out;
}

double MedianPairwiseBandwidth(const std::vector<Feature>& points, int max_points,
                               uint64_t seed) {
  CheckPoints(points);
  std::vector<size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (static_cast<int>(idx.size()) > max_points) {
    RandomStream rng(seed);
    for (int i = 0; i < max_points; ++i) {
      size_t j = static_cast<size_t>(i) + rng.Index(idx.size() - static_cast<size_t>(i));
      std::swap(idx[static_cast<size_t>(i)], idx[j]);
    }
    idx.resize(static_cast<size_t>(max_points));
  }
  std::vector<double> dists;
  for (size_t a = 0; a < idx.size(); ++a) {
    for (size_t b = a + 1; b < idx.size(); ++b) {
      dists.push_back((points[idx[a]] - points[idx[b]]).norm());
    }
  }
  if (dists.empty()) return 1.0;
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  double h = *mid;
  if (dists.size() % 2 == 0) {
    h = 0.5 * (h + *std::max_element(dists.begin(), mid));
  }
  return h > 0.0 ? h : 1.0;
}

LabeledFeatures ReadLabeledCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kEmptyInput, "empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "label") {
    throw Error(ErrorCode::kIoError, "CSV header must be label,f0,f1,...");
  }
  for (size_t i = 1; i < header.size(); ++i) {
    if (header[i] != "f" + std::to_string(i - 1)) {
      throw Error(ErrorCode::kIoError, "unexpected column '" + header[i] + "'");
    }
  }
  const size_t d = header.size() - 1;
  LabeledFeatures data;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    bool abnormal;
    if (cell == "normal") {
      abnormal = false;
    } else if (cell == "abnormal") {
      abnormal = true;
    } else {
      throw Error(ErrorCode::kIoError, "line " + std::to_string(lineno) + ": bad label '" + cell + "'");
    }
    Feature f(static_cast<Eigen::Index>(d));
    size_t k = 0;
    while (std::getline(ss, cell, ',')) {
      if (k >= d) {
        ++k;
        break;
      }
      char* end = nullptr;
      f[static_cast<Eigen::Index>(k)] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') {
        throw Error(ErrorCode::kIoError, "line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++k;
    }
    if (k != d) {
      throw Error(ErrorCode::kIoError, "line " + std::to_string(lineno) + ": expected " +
                                           std::to_string(d) + " features");
    }
    data.points.push_back(std::move(f));
    data.abnormal.push_back(abnormal);
  }
  if (data.points.empty()) throw Error(ErrorCode::kEmptyInput, "CSV has no rows");
  return data;
}

LabeledFeatures ReadLabeledCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return ReadLabeledCsv(in);
}

std::string LabeledCsv(const LabeledFeatures& data) {
  if (data.points.empty()) throw Error(ErrorCode::kEmptyInput, "no rows");
  std::string out = "label";
  for (Eigen::Index i = 0; i < data.points.front().size(); ++i) out += ",f" + std::to_string(i);
  out += "\n";
  char buf[64];
  for (size_t r = 0; r < data.points.size(); ++r) {
    out += data.abnormal[r] ? "abnormal" : "normal";
    for (Eigen::Index i = 0; i < data.points[r].size(); ++i) {
      std::snprintf(buf, sizeof(buf), ",%.17g", data.points[r][i]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

nlohmann::json ToJson(const ClusterModel& model) {
  nlohmann::json centers = nlohmann::json::array();
  for (const Feature& c : model.centers) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index i = 0; i < c.size(); ++i) row.push_back(c[i]);
    centers.push_back(row);
  }
  return {{"format", "mdpfuzz-meanshift v1"},
          {"bandwidth", model.bandwidth},
          {"centers", centers},
          {"normal_center_ids", model.normal_center_ids}};
}

ClusterModel ClusterModelFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "mdpfuzz-meanshift v1") {
      throw Error(ErrorCode::kSnapshotFormat, "unknown model format");
    }
    ClusterModel model;
    model.bandwidth = j.at("bandwidth").get<double>();
    for (const auto& row : j.at("centers")) {
      Feature c(static_cast<Eigen::Index>(row.size()));
      for (size_t i = 0; i < row.size(); ++i) c[static_cast<Eigen::Index>(i)] = row[i].get<double>();
      model.centers.push_back(std::move(c));
    }
    model.normal_center_ids = j.at("normal_center_ids").get<std::vector<int>>();
    for (int id : model.normal_center_ids) {
      if (id < 0 || static_cast<size_t>(id) >= model.centers.size()) {
        throw Error(ErrorCode::kSnapshotFormat, "normal center id out of range");
      }
    }
    if (!(model.bandwidth > 0.0)) throw Error(ErrorCode::kSnapshotFormat, "bandwidth must be positive");
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kSnapshotFormat, e.what());
  }
}

}  // namespace mdpfuzz
