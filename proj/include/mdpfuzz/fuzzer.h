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

#ifndef MDPFUZZ_FUZZER_H_
#define MDPFUZZ_FUZZER_H_

#include <chrono>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdpfuzz/config.h"
#include "mdpfuzz/dynem.h"
#include "mdpfuzz/mdp.h"
#include "mdpfuzz/random.h"
#include "mdpfuzz/sensitivity.h"
#include "mdpfuzz/target.h"

namespace mdpfuzz {

struct Seed {
  uint64_t id = 0;
  State s0;
  double reward = 0.0;
  double energy = 0.0;
  std::optional<SequenceDensity> density;  // unset when guidance is off
  std::optional<uint64_t> parent_id;
  int64_t created_at_iteration = -1;       // -1 for initial samples
  uint64_t rollout_seed = 0;
};

class Corpus {
 public:
  explicit Corpus(std::optional<int> capacity = std::nullopt)
      : capacity_(capacity) {}

  // Assigns the next id. When over capacity the lowest-energy seed (oldest
  // on ties) is evicted.
  const Seed& Add(Seed seed);
  // Restores a seed with its recorded id (resume path).
  void Restore(Seed seed);

  bool empty() const { return seeds_.empty(); }
  size_t size() const { return seeds_.size(); }
  const Seed& operator[](size_t i) const { return seeds_[i]; }
  const std::vector<Seed>& seeds() const { return seeds_; }
  uint64_t next_id() const { return next_id_; }

  double TotalEnergy() const;
  double MeanEnergy() const;
  // 1.0 for an empty corpus.
  double MedianEnergy() const;

 private:
  std::vector<Seed> seeds_;
  std::optional<int> capacity_;
  uint64_t next_id_ = 0;
};

struct CrashRecord {
  State s0;
  int crash_step = 0;
  double cumulative_reward = 0.0;
  uint64_t rng_seed = 0;  // rollout seed
  std::string env;
  int horizon = 1;
  int64_t iteration = 0;
  double elapsed_s = 0.0;
  std::optional<uint64_t> parent_id;
};

struct StatsRow {
  double elapsed_s = 0.0;
  int64_t iterations = 0;
  int64_t mutations = 0;
  int64_t crashes = 0;
  int64_t corpus_size = 0;
  double mean_energy = 0.0;
  double last_density = 0.0;  // step density of the latest mutant, 0 if none
};

struct CampaignStats {
  std::vector<StatsRow> rows;
};

// Picks index k with probability E_k / sum E; uniform if all energies are 0.
size_t SelectSeed(const Corpus& corpus, RandomStream& rng);

// Perturbs the mutable dimensions uniformly in ±beta * width, clamps to the
// bounds and validates; retries up to max_retries times, then throws
// MutationExhausted.
State Mutate(const State& s0, FuzzTarget& target, double beta, int max_retries,
             RandomStream& rng);

// Per-dimension affine map under which a uniform draw from the initial-state
// bounds has zero offset at the lower bound and unit variance.
class StateScaler {
 public:
  StateScaler() = default;
  explicit StateScaler(const EnvironmentSpec& spec);
  State Apply(const State& s) const;
  StateSequence Apply(const StateSequence& seq) const;

 private:
  Eigen::VectorXd offset_;
  Eigen::VectorXd scale_;
};

// Owns the campaign state of the fuzzing loop: corpus, density model, crash
// set and counters. One coordinator drives it; rollouts can be spread over
// worker lanes but density updates and corpus insertions happen here, in
// submission order.
class Campaign {
 public:
  using Clock = std::chrono::steady_clock;
  using Observer = std::function<void(const Campaign&)>;

  Campaign(FuzzTarget& target, CampaignConfig config);

  // Samples N seeds, initializes DynEM from the first rollout and computes
  // energy, reward and density for each seed.
  void InitCorpus();

  // Restores a checkpointed campaign (see campaign_io.h).
  void Restore(Corpus corpus, std::optional<DynEmState> dynem,
               std::vector<CrashRecord> crashes, CampaignStats stats,
               int64_t iteration, int64_t mutations, double elapsed_offset);

  // Loops until the budget is exhausted. `on_checkpoint` fires every
  // checkpoint_every iterations; `on_crash` for each new crash.
  void Run(const Observer& on_checkpoint = {},
           const std::function<void(const CrashRecord&)>& on_crash = {});

  // One iteration on the coordinator lane. Returns false if the budget is
  // exhausted.
  bool StepOnce();

  const CampaignConfig& config() const { return config_; }
  const Corpus& corpus() const { return corpus_; }
  const std::vector<CrashRecord>& crashes() const { return crashes_; }
  const CampaignStats& stats() const { return stats_; }
  const DensityModel* density_model() const {
    return density_ ? &*density_ : nullptr;
  }
  int64_t iteration() const { return iteration_; }
  int64_t mutations() const { return mutations_; }
  int horizon() const { return horizon_; }
  double Elapsed() const;
  bool initialized() const { return initialized_; }

  // Retention predicate: lower reward than the parent, or a fresh sequence.
  bool ShouldRetain(double reward, double parent_reward,
                    const std::optional<SequenceDensity>& density) const;

 private:
  struct Pending {
    int64_t iteration = 0;
    size_t parent_index = 0;
    uint64_t parent_id = 0;
    double parent_reward = 0.0;
    std::optional<State> mutant;  // unset when mutation was exhausted
    uint64_t rollout_seed = 0;
    RolloutResult result;
    std::exception_ptr error;
  };

  bool BudgetExhausted() const;
  Pending Prepare(int64_t iteration);
  void Execute(FuzzTarget& target, Pending& p) const;
  void Commit(Pending& p);
  double EnergyFor(const State& s0, uint64_t rollout_seed, RandomStream& rng);
  std::optional<SequenceDensity> Density(const StateSequence& states);
  void RecordStats();

  FuzzTarget& target_;
  CampaignConfig config_;
  int horizon_ = 1;
  StateScaler scaler_;
  Corpus corpus_;
  std::optional<DensityModel> density_;
  std::vector<CrashRecord> crashes_;
  CampaignStats stats_;
  int64_t iteration_ = 0;
  int64_t mutations_ = 0;
  double last_density_ = 0.0;
  double elapsed_offset_ = 0.0;
  Clock::time_point start_;
  bool initialized_ = false;
  std::vector<std::unique_ptr<FuzzTarget>> lanes_;
  std::function<void(const CrashRecord&)> on_crash_;
};

}  // namespace mdpfuzz

#endif  // MDPFUZZ_FUZZER_H_
