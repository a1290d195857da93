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

#include "mdpfuzz/fuzzer.h"

#include <filesystem>
#include <map>

#include <gtest/gtest.h>

#include "mdpfuzz/campaign_io.h"
#include "mdpfuzz/envs/acas_toy.h"
#include "mdpfuzz/error.h"
#include "support/test_envs.h"

namespace mdpfuzz {
namespace {

Corpus WithEnergies(std::initializer_list<double> energies) {
  Corpus c;
  for (double e : energies) {
    Seed s;
    s.s0 = Eigen::Vector2d::Zero();
    s.energy = e;
    c.Add(s);
  }
  return c;
}

std::vector<double> Frequencies(const Corpus& c, int draws, uint64_t seed) {
  std::vector<double> freq(c.size(), 0.0);
  RandomStream rng(seed);
  for (int i = 0; i < draws; ++i) freq[SelectSeed(c, rng)] += 1.0 / draws;
  return freq;
}

TEST(SelectSeed, EnergyProportional) {
  const std::vector<double> f = Frequencies(WithEnergies({1.0, 3.0}), 10000, 1);
  EXPECT_NEAR(f[1], 0.75, 0.02);
}

TEST(SelectSeed, EqualEnergiesAreUniform) {
  for (const Corpus& c : {WithEnergies({2, 2, 2, 2}), WithEnergies({0, 0, 0, 0})}) {
    for (double f : Frequencies(c, 10000, 2)) EXPECT_NEAR(f, 0.25, 0.02);
  }
}

TEST(SelectSeed, SingleSeedAndZeroEnergySeeds) {
  RandomStream rng(3);
  const Corpus one = WithEnergies({0.5});
  const Corpus mixed = WithEnergies({0.0, 1.0, 0.0});
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(SelectSeed(one, rng), 0u);
    EXPECT_EQ(SelectSeed(mixed, rng), 1u);
  }
  try {
    SelectSeed(Corpus(), rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyCorpus);
  }
}

TEST(Corpus, CapacityEvictsLowestEnergy) {
  Corpus c(3);
  for (double e : {5.0, 1.0, 7.0, 3.0}) {
    Seed s;
    s.energy = e;
    c.Add(s);
  }
  ASSERT_EQ(c.size(), 3u);
  for (const Seed& s : c.seeds()) EXPECT_NE(s.energy, 1.0);
  EXPECT_EQ(c.next_id(), 4u);
  EXPECT_DOUBLE_EQ(c.MedianEnergy(), 5.0);
}

TEST(Mutate, ZeroBetaReturnsSeed) {
  auto target = testenv::BuiltinTarget("acas-toy");
  const State s0 = target->Sample(1);
  RandomStream rng(0);
  EXPECT_EQ(Mutate(s0, *target, 0.0, 10, rng), s0);
}

TEST(Mutate, OutputsAreValidAndBounded) {
  for (const char* name : {"acas-toy", "coopnav-toy", "chain"}) {
    auto target = testenv::BuiltinTarget(name);
    RandomStream rng(5);
    State s = target->Sample(2);
    for (int i = 0; i < 1000; ++i) {
      const State m = Mutate(s, *target, 0.2, 100, rng);
      ASSERT_TRUE(target->spec().WithinBounds(m)) << name;
      ASSERT_TRUE(target->Validate(m)) << name;
      if (i % 3 == 0) s = m;
    }
  }
}

TEST(Mutate, AcasSpeedsNeverExceedCap) {
  auto target = testenv::BuiltinTarget("acas-toy");
  const double cap = envs::AcasConstants{}.v_cap;
  RandomStream rng(6);
  State s = target->Sample(3);
  s[envs::kAcasVInt] = cap;
  s[envs::kAcasVOwn] = cap - 1.0;
  for (int i = 0; i < 1000; ++i) {
    const State m = Mutate(s, *target, 0.5, 100, rng);
    ASSERT_LE(m[envs::kAcasVInt], cap);
    ASSERT_LE(m[envs::kAcasVOwn], cap);
  }
}

TEST(Mutate, LeavesImmutableDimensionsAlone) {
  auto target = testenv::BuiltinTarget("coopnav-toy");
  const State s0 = target->Sample(4);
  RandomStream rng(7);
  for (int i = 0; i < 100; ++i) {
    const State m = Mutate(s0, *target, 0.3, 100, rng);
    EXPECT_EQ(m.tail(6), s0.tail(6));
  }
}

class OnlyOrigin : public testenv::BoxEnvironment {
 public:
  OnlyOrigin() : BoxEnvironment(Mode::kConstantReward) {}
  bool Validate(const State& s) const override { return s.isZero(); }
};

TEST(Mutate, ExhaustionRaises) {
  LocalTarget target(std::make_shared<OnlyOrigin>(), std::make_shared<testenv::ZeroPolicy>());
  RandomStream rng(0);
  try {
    Mutate(Eigen::Vector2d::Zero(), target, 0.1, 5, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMutationExhausted);
  }
}

CampaignConfig SmallConfig(const std::string& env, int64_t iters, uint64_t seed = 1) {
  CampaignConfig c;
  c.env = env;
  c.budget_iters = iters;
  c.corpus_size = 5;
  c.rng_seed = seed;
  c.clock = ClockMode::kLogical;
  return c;
}

TEST(Campaign, ZeroBudget) {
  auto target = testenv::BuiltinTarget("acas-toy");
  Campaign campaign(*target, SmallConfig("acas-toy", 0));
  campaign.InitCorpus();
  const std::string corpus_before = CorpusJsonl(campaign.corpus());
  campaign.Run();
  EXPECT_TRUE(campaign.crashes().empty());
  EXPECT_EQ(campaign.iteration(), 0);
  EXPECT_EQ(CorpusJsonl(campaign.corpus()), corpus_before);
}

TEST(Campaign, InitCorpusOfOne) {
  auto target = testenv::BuiltinTarget("acas-toy");
  CampaignConfig cfg = SmallConfig("acas-toy", 0);
  cfg.corpus_size = 1;
  Campaign campaign(*target, cfg);
  campaign.InitCorpus();
  ASSERT_EQ(campaign.corpus().size(), 1u);
  const Seed& s = campaign.corpus()[0];
  EXPECT_TRUE(s.density.has_value());
  EXPECT_GT(s.density->step_density, 0.0);
  EXPECT_GE(s.energy, 0.0);
  EXPECT_NE(s.reward, 0.0);
  EXPECT_EQ(s.created_at_iteration, -1);
}

TEST(Campaign, CoopNavInitialCorpusIsValid) {
  auto target = testenv::BuiltinTarget("coopnav-toy");
  CampaignConfig cfg = SmallConfig("coopnav-toy", 0);
  cfg.corpus_size = 50;
  Campaign campaign(*target, cfg);
  campaign.InitCorpus();
  ASSERT_EQ(campaign.corpus().size(), 50u);
  for (const Seed& s : campaign.corpus().seeds()) EXPECT_TRUE(target->Validate(s.s0));
}

TEST(Campaign, AlwaysCrashingOracleCrashesEveryIteration) {
  auto target = testenv::BoxTarget(testenv::BoxEnvironment::Mode::kAlwaysCrash);
  Campaign campaign(*target, SmallConfig("box", 37));
  campaign.Run();
  EXPECT_EQ(campaign.crashes().size(), 37u);
  EXPECT_EQ(campaign.mutations(), 37);
  EXPECT_EQ(campaign.corpus().size(), 5u);
  for (const CrashRecord& r : campaign.crashes()) EXPECT_EQ(r.crash_step, 0);
}

TEST(Campaign, Deterministic) {
  auto t1 = testenv::BuiltinTarget("acas-toy");
  auto t2 = testenv::BuiltinTarget("acas-toy");
  Campaign a(*t1, SmallConfig("acas-toy", 300, 4));
  Campaign b(*t2, SmallConfig("acas-toy", 300, 4));
  a.Run();
  b.Run();
  EXPECT_EQ(CrashesJsonl(a.crashes()), CrashesJsonl(b.crashes()));
  EXPECT_EQ(StatsCsv(a.stats()), StatsCsv(b.stats()));
  EXPECT_EQ(CorpusJsonl(a.corpus()), CorpusJsonl(b.corpus()));
  EXPECT_GT(a.crashes().size(), 0u);
}

TEST(Campaign, StatsAreMonotoneAtFixedCadence) {
  auto target = testenv::BuiltinTarget("coopnav-toy");
  Campaign campaign(*target, SmallConfig("coopnav-toy", 200, 2));
  campaign.Run();
  const auto& rows = campaign.stats().rows;
  ASSERT_GE(rows.size(), 21u);
  std::map<int64_t, int> seen;
  for (size_t i = 1; i < rows.size(); ++i) {
    EXPECT_GE(rows[i].crashes, rows[i - 1].crashes);
    EXPECT_GE(rows[i].mutations, rows[i - 1].mutations);
    EXPECT_GE(rows[i].iterations, rows[i - 1].iterations);
    EXPECT_GE(rows[i].elapsed_s, rows[i - 1].elapsed_s);
  }
  for (const StatsRow& r : rows) seen[r.iterations]++;
  for (int64_t it = 0; it <= 200; it += 10) EXPECT_TRUE(seen.count(it)) << it;
  // Every crash iteration produced a row.
  for (const CrashRecord& c : campaign.crashes()) EXPECT_TRUE(seen.count(c.iteration + 1));
  EXPECT_EQ(rows.back().crashes, static_cast<int64_t>(campaign.crashes().size()));
}

TEST(Campaign, RetainedSeedsSatisfyRetentionRule) {
  auto target = testenv::BuiltinTarget("acas-toy");
  CampaignConfig cfg = SmallConfig("acas-toy", 300, 6);
  Campaign campaign(*target, cfg);
  campaign.Run();
  std::map<uint64_t, const Seed*> by_id;
  for (const Seed& s : campaign.corpus().seeds()) by_id[s.id] = &s;
  int retained = 0;
  for (const Seed& s : campaign.corpus().seeds()) {
    if (s.created_at_iteration < 0) continue;
    ++retained;
    ASSERT_TRUE(s.parent_id.has_value());
    const Seed& parent = *by_id.at(*s.parent_id);
    EXPECT_TRUE(s.reward < parent.reward || s.density->step_density < cfg.tau);
  }
  EXPECT_GT(retained, 0);
}

TEST(Campaign, CrashRecordsReplay) {
  auto target = testenv::BuiltinTarget("acas-toy");
  Campaign campaign(*target, SmallConfig("acas-toy", 300, 3));
  campaign.Run();
  ASSERT_FALSE(campaign.crashes().empty());
  for (const CrashRecord& r : campaign.crashes()) {
    const RolloutResult replay = target->Rollout(r.s0, r.horizon, r.rng_seed);
    ASSERT_TRUE(replay.crashed());
    EXPECT_EQ(*replay.crash_step, r.crash_step);
  }
}

TEST(Campaign, ReturnsSameResultAfterResume) {
  const auto dir = std::filesystem::temp_directory_path() / "mdpfuzz_resume_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  auto t_full = testenv::BuiltinTarget("acas-toy");
  Campaign full(*t_full, SmallConfig("acas-toy", 240, 8));
  full.Run();

  auto t_first = testenv::BuiltinTarget("acas-toy");
  Campaign first(*t_first, SmallConfig("acas-toy", 120, 8));
  first.Run();
  WriteCampaignOutputs(dir, first);

  auto t_second = testenv::BuiltinTarget("acas-toy");
  Campaign second(*t_second, SmallConfig("acas-toy", 240, 8));
  ResumeCampaign(dir, second);
  second.Run();

  EXPECT_EQ(CrashesJsonl(second.crashes()), CrashesJsonl(full.crashes()));
  EXPECT_EQ(CorpusJsonl(second.corpus()), CorpusJsonl(full.corpus()));
  EXPECT_EQ(second.density_model()->state(), full.density_model()->state());
  std::filesystem::remove_all(dir);
}

TEST(Campaign, MultiLaneRunsAreDeterministicAndComplete) {
  auto t1 = testenv::BuiltinTarget("acas-toy");
  auto t2 = testenv::BuiltinTarget("acas-toy");
  CampaignConfig cfg = SmallConfig("acas-toy", 203, 5);
  cfg.lanes = 4;
  Campaign a(*t1, cfg);
  Campaign b(*t2, cfg);
  a.Run();
  b.Run();
  EXPECT_EQ(a.iteration(), 203);
  EXPECT_EQ(CrashesJsonl(a.crashes()), CrashesJsonl(b.crashes()));
  for (const CrashRecord& r : a.crashes()) {
    const RolloutResult replay = t1->Rollout(r.s0, r.horizon, r.rng_seed);
    EXPECT_EQ(replay.crash_step, std::optional<int>(r.crash_step));
  }
}

TEST(Campaign, ReverseAblationLeavesDensityUnset) {
  auto target = testenv::BuiltinTarget("acas-toy");
  CampaignConfig cfg = SmallConfig("acas-toy", 50, 5);
  cfg.density_guidance = false;
  Campaign campaign(*target, cfg);
  campaign.Run();
  EXPECT_EQ(campaign.density_model(), nullptr);
  for (const Seed& s : campaign.corpus().seeds()) EXPECT_FALSE(s.density.has_value());
}

TEST(StateScaler, UniformDrawHasUnitVariance) {
  auto target = testenv::BuiltinTarget("acas-toy");
  const StateScaler scaler(target->spec());
  RandomStream rng(1);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(5), sq = Eigen::VectorXd::Zero(5);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const State z = scaler.Apply(target->Sample(rng.NextU64()));
    sum += z;
    sq += z.cwiseAbs2();
  }
  const Eigen::VectorXd mean = sum / n;
  const Eigen::VectorXd var = sq / n - mean.cwiseAbs2();
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(var[i], 1.0, 0.02) << i;
}

}  // namespace
}  // namespace mdpfuzz
