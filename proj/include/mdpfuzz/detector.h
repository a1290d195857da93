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

#ifndef MDPFUZZ_DETECTOR_H_
#define MDPFUZZ_DETECTOR_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace mdpfuzz {

using Feature = Eigen::VectorXd;

struct ClusterModel {
  std::vector<Feature> centers;
  double bandwidth = 1.0;
  std::vector<int> normal_center_ids;
};

struct MeanShiftOptions {
  double tolerance = 1e-4;  // fraction of the bandwidth
  int max_iterations = 300;
  double merge_fraction = 0.5;
};

// Flat-kernel mean shift. Centers come out ordered by decreasing support;
// every center is polished to an exact fixed point of the averaging step
// when one is reached within max_iterations. All centers are marked normal.
ClusterModel MeanShiftFit(const std::vector<Feature>& points, double bandwidth,
                          const MeanShiftOptions& options = {});

// Index of the nearest center for each point (lowest index on ties).
std::vector<int> AssignToCenters(const ClusterModel& model, const std::vector<Feature>& points);

// Fits on all points, then marks a center normal when the majority of the
// points assigned to it are normal. Throws EmptyInput when no center ends up
// normal.
ClusterModel FitLabeled(const std::vector<Feature>& points, const std::vector<bool>& abnormal,
                        double bandwidth, const MeanShiftOptions& options = {});

// Distance to the nearest normal center.
double AbnormalityScore(const ClusterModel& model, const Feature& x);
// true means abnormal: score > threshold.
bool Classify(const ClusterModel& model, const Feature& x, double threshold);

// Rank-based AUC with averaged ties; `positive` marks abnormal samples.
double AucRoc(const std::vector<double>& scores, const std::vector<bool>& positive);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // predict abnormal when score >= threshold
};
std::vector<RocPoint> RocCurve(const std::vector<double>& scores,
                               const std::vector<bool>& positive);
std::string RocCsv(const std::vector<RocPoint>& roc);

// Median pairwise distance over at most `max_points` points drawn without
// replacement using `seed`.
double MedianPairwiseBandwidth(const std::vector<Feature>& points, int max_points = 500,
                               uint64_t seed = 0);

struct LabeledFeatures {
  std::vector<Feature> points;
  std::vector<bool> abnormal;
};

// CSV with header `label,f0,f1,...`; label is `normal` or `abnormal`.
LabeledFeatures ReadLabeledCsv(std::istream& in);
LabeledFeatures ReadLabeledCsv(const std::filesystem::path& path);
std::string LabeledCsv(const LabeledFeatures& data);

nlohmann::json ToJson(const ClusterModel& model);
ClusterModel ClusterModelFromJson(const nlohmann::json& j);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_DETECTOR_H_
