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
#include <sstream>

#include <gtest/gtest.h>

#include "mdpfuzz/error.h"
#include "mdpfuzz/random.h"
#include "support/oracles.h"

namespace mdpfuzz {
namespace {

std::vector<Feature> Blob(const Eigen::Vector2d& center, double sd, int n, RandomStream& rng) {
  std::vector<Feature> pts;
  for (int i = 0; i < n; ++i) {
    pts.push_back(center + sd * Eigen::Vector2d(rng.Normal(), rng.Normal()));
  }
  return pts;
}

Feature MeanOf(const std::vector<Feature>& pts) {
  Feature m = Feature::Zero(pts[0].size());
  for (const Feature& p : pts) m += p;
  return m / static_cast<double>(pts.size());
}

TEST(MeanShift, TightClusterConvergesToItsMean) {
  RandomStream rng(1);
  std::vector<Feature> pts;
  for (int i = 0; i < 50; ++i) pts.push_back(Eigen::Vector2d(rng.Uniform(-0.2, 0.2), rng.Uniform(-0.2, 0.2)));
  const ClusterModel m = MeanShiftFit(pts, 1.0);
  ASSERT_EQ(m.centers.size(), 1u);
  EXPECT_LT((m.centers[0] - MeanOf(pts)).norm(), 1e-6);
}

TEST(MeanShift, SeparatedClustersGiveOneCenterEach) {
  RandomStream rng(2);
  const auto a = Blob(Eigen::Vector2d(0, 0), 0.3, 200, rng);
  const auto b = Blob(Eigen::Vector2d(10, 5), 0.3, 150, rng);
  std::vector<Feature> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  const double h = 1.5;
  const ClusterModel m = MeanShiftFit(pts, h);
  ASSERT_EQ(m.centers.size(), 2u);
  // Ordered by support: the larger cluster first.
  EXPECT_LT((m.centers[0] - MeanOf(a)).norm(), 0.1 * h);
  EXPECT_LT((m.centers[1] - MeanOf(b)).norm(), 0.1 * h);
  EXPECT_EQ(m.normal_center_ids, (std::vector<int>{0, 1}));
}

TEST(MeanShift, DuplicatesCollapseToOnePoint) {
  const std::vector<Feature> pts(30, Eigen::Vector3d(1.5, -2, 7));
  const ClusterModel m = MeanShiftFit(pts, 0.5);
  ASSERT_EQ(m.centers.size(), 1u);
  EXPECT_EQ(m.centers[0], Eigen::Vector3d(1.5, -2, 7));
}

TEST(MeanShift, RefitOnCentersIsIdempotent) {
  RandomStream rng(3);
  std::vector<Feature> pts;
  for (const auto& c : {Eigen::Vector2d(0, 0), Eigen::Vector2d(6, 0), Eigen::Vector2d(0, 6)}) {
    const auto blob = Blob(c, 0.5, 100, rng);
    pts.insert(pts.end(), blob.begin(), blob.end());
  }
  const double h = 1.5;
  const ClusterModel m = MeanShiftFit(pts, h);
  const ClusterModel again = MeanShiftFit(m.centers, h);
  ASSERT_EQ(again.centers.size(), m.centers.size());
  for (const Feature& c : m.centers) {
    double best = 1e300;
    for (const Feature& d : again.centers) best = std::min(best, (c - d).norm());
    EXPECT_LT(best, 0.5 * h);
  }
  for (size_t i = 0; i < m.centers.size(); ++i) {
    for (size_t j = i + 1; j < m.centers.size(); ++j) {
      EXPECT_GT((m.centers[i] - m.centers[j]).norm(), 0.5 * h);
    }
  }
}

TEST(MeanShift, RejectsBadInput) {
  EXPECT_THROW(MeanShiftFit({}, 1.0), Error);
  EXPECT_THROW(MeanShiftFit({Eigen::Vector2d(0, 0)}, 0.0), Error);
}

TEST(AbnormalityScore, DistanceToNearestNormalCenter) {
  ClusterModel m;
  m.centers = {Eigen::Vector2d(0, 0), Eigen::Vector2d(10, 0)};
  m.normal_center_ids = {0};
  EXPECT_EQ(AbnormalityScore(m, Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_FALSE(Classify(m, Eigen::Vector2d(0, 0), 1e-9));
  EXPECT_DOUBLE_EQ(AbnormalityScore(m, Eigen::Vector2d(10, 0)), 10.0);
  RandomStream rng(4);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const Feature x = Eigen::Vector2d(rng.Uniform(-20, 20), rng.Uniform(-20, 20));
    EXPECT_TRUE(Classify(m, x, 0.0));
    EXPECT_FALSE(Classify(m, x, inf));
  }
}

TEST(AbnormalityScore, HeldOutAbnormalExceedsNormalPercentile) {
  RandomStream rng(5);
  const double h = 1.0;
  const auto train = Blob(Eigen::Vector2d(0, 0), 0.5, 800, rng);
  const auto normal_test = Blob(Eigen::Vector2d(0, 0), 0.5, 200, rng);
  const auto abnormal_test = Blob(Eigen::Vector2d(4 * h, 0), 0.5, 200, rng);
  const ClusterModel m = MeanShiftFit(train, h);
  std::vector<double> normal_scores;
  for (const Feature& x : normal_test) normal_scores.push_back(AbnormalityScore(m, x));
  std::sort(normal_scores.begin(), normal_scores.end());
  const double p95 = normal_scores[static_cast<size_t>(0.95 * (normal_scores.size() - 1))];
  for (const Feature& x : abnormal_test) EXPECT_GT(AbnormalityScore(m, x), p95);
}

TEST(FitLabeled, MajorityVoteMarksNormalCenters) {
  RandomStream rng(6);
  std::vector<Feature> pts = Blob(Eigen::Vector2d(0, 0), 0.3, 100, rng);
  std::vector<bool> abnormal(100, false);
  const auto far = Blob(Eigen::Vector2d(8, 8), 0.3, 60, rng);
  pts.insert(pts.end(), far.begin(), far.end());
  for (int i = 0; i < 60; ++i) abnormal.push_back(i >= 5);  // mostly abnormal
  const ClusterModel m = FitLabeled(pts, abnormal, 1.5);
  ASSERT_EQ(m.centers.size(), 2u);
  ASSERT_EQ(m.normal_center_ids.size(), 1u);
  EXPECT_LT(m.centers[m.normal_center_ids[0]].norm(), 0.2);
  EXPECT_THROW(FitLabeled(far, std::vector<bool>(60, true), 1.5), Error);
}

TEST(AucRoc, SeparatedAndTiedExtremes) {
  EXPECT_EQ(AucRoc({0.1, 0.2, 0.9, 1.5}, {false, false, true, true}), 1.0);
  EXPECT_EQ(AucRoc({0.9, 1.5, 0.1, 0.2}, {false, false, true, true}), 0.0);
  EXPECT_EQ(AucRoc({3, 3, 3, 3, 3}, {true, false, true, false, false}), 0.5);
}

TEST(AucRoc, MatchesPairCountingExactly) {
  RandomStream rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> scores;
    std::vector<bool> labels;
    for (int i = 0; i < 20; ++i) {
      labels.push_back(i % 3 == 0 || rng.Uniform() < 0.3);
      // Coarse grid so ties happen.
      scores.push_back(std::floor(rng.Uniform(0, 6)) + (labels.back() ? 1.0 : 0.0));
    }
    labels[1] = false;
    EXPECT_EQ(AucRoc(scores, labels), oracle::PairCountAuc(scores, labels));
  }
}

TEST(AucRoc, InvariantUnderMonotoneTransform) {
  RandomStream rng(8);
  std::vector<double> scores, transformed;
  std::vector<bool> labels;
  for (int i = 0; i < 200; ++i) {
    labels.push_back(rng.Uniform() < 0.4);
    scores.push_back(rng.Normal() + (labels.back() ? 0.8 : 0.0));
    transformed.push_back(std::exp(3.0 * scores.back()) + 7.0);
  }
  EXPECT_EQ(AucRoc(scores, labels), AucRoc(transformed, labels));
}

TEST(AucRoc, NeedsBothClasses) {
  EXPECT_THROW(AucRoc({1, 2}, {true, true}), Error);
  EXPECT_THROW(AucRoc({1, 2}, {true}), Error);
}

TEST(RocCurve, RunsFromOriginToOne) {
  const std::vector<double> scores = {0.1, 0.4, 0.35, 0.8, 0.8, 0.2};
  const std::vector<bool> labels = {false, true, false, true, false, true};
  const auto roc = RocCurve(scores, labels);
  ASSERT_GE(roc.size(), 2u);
  EXPECT_EQ(roc.front().fpr, 0.0);
  EXPECT_EQ(roc.front().tpr, 0.0);
  EXPECT_EQ(roc.back().fpr, 1.0);
  EXPECT_EQ(roc.back().tpr, 1.0);
  double area = 0.0;
  for (size_t i = 1; i < roc.size(); ++i) {
    EXPECT_GE(roc[i].fpr, roc[i - 1].fpr);
    EXPECT_GE(roc[i].tpr, roc[i - 1].tpr);
    area += (roc[i].fpr - roc[i - 1].fpr) * 0.5 * (roc[i].tpr + roc[i - 1].tpr);
  }
  EXPECT_NEAR(area, AucRoc(scores, labels), 1e-12);
  EXPECT_EQ(RocCsv(roc).substr(0, 19), "fpr,tpr,threshold\n0");
}

TEST(Bandwidth, MedianPairwiseDistance) {
  const std::vector<Feature> pts = {Eigen::Vector2d(0, 0), Eigen::Vector2d(3, 0),
                                    Eigen::Vector2d(0, 4)};
  // Pairwise distances 3, 4, 5.
  EXPECT_DOUBLE_EQ(MedianPairwiseBandwidth(pts), 4.0);
  RandomStream rng(9);
  const auto many = Blob(Eigen::Vector2d(0, 0), 1.0, 2000, rng);
  EXPECT_EQ(MedianPairwiseBandwidth(many, 500, 3), MedianPairwiseBandwidth(many, 500, 3));
  EXPECT_GT(MedianPairwiseBandwidth(many, 500, 3), 0.0);
}

TEST(LabeledCsv, RoundTrip) {
  LabeledFeatures data;
  data.points = {Eigen::Vector3d(0.1, -2, 1e-17), Eigen::Vector3d(1.0 / 3.0, 5, 6)};
  data.abnormal = {false, true};
  std::istringstream in(LabeledCsv(data));
  const LabeledFeatures back = ReadLabeledCsv(in);
  ASSERT_EQ(back.points.size(), 2u);
  EXPECT_EQ(back.points[0], data.points[0]);
  EXPECT_EQ(back.points[1], data.points[1]);
  EXPECT_EQ(back.abnormal, data.abnormal);
}

TEST(LabeledCsv, RejectsMalformedInput) {
  for (const char* text : {"label,f0\nweird,1\n", "label,f0,f1\nnormal,1\n",
                           "label,f0\nnormal,1,2\n", "x,f0\nnormal,1\n", "label,f0\nnormal,abc\n",
                           ""}) {
    std::istringstream in(text);
    EXPECT_THROW(ReadLabeledCsv(in), Error) << text;
  }
}

TEST(ClusterModelJson, RoundTrip) {
  ClusterModel m;
  m.centers = {Eigen::Vector2d(1.0 / 7.0, 2), Eigen::Vector2d(-3, 1e-300)};
  m.bandwidth = 0.75;
  m.normal_center_ids = {1};
  const ClusterModel back = ClusterModelFromJson(nlohmann::json::parse(ToJson(m).dump()));
  EXPECT_EQ(back.centers[0], m.centers[0]);
  EXPECT_EQ(back.centers[1], m.centers[1]);
  EXPECT_EQ(back.bandwidth, m.bandwidth);
  EXPECT_EQ(back.normal_center_ids, m.normal_center_ids);
  EXPECT_THROW(ClusterModelFromJson({{"format", "other"}}), Error);
}

}  // namespace
}  // namespace mdpfuzz
