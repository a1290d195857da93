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

#include <algorithm>
#include <cmath>
#include <thread>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

// ---------------------------------------------------------------------------
// Corpus

const Seed& Corpus::Add(Seed seed) {
  seed.id = next_id_++;
  seeds_.push_back(std::move(seed));
  const uint64_t added_id = seeds_.back().id;
  if (capacity_ && static_cast<int>(seeds_.size()) > *capacity_) {
    auto victim = std::min_element(
        seeds_.begin(), seeds_.end(),
        [](const Seed& a, const Seed& b) { return a.energy < b.energy; });
    seeds_.erase(victim);
  }
  for (const Seed& s : seeds_) {
    if (s.id == added_id) return s;
  }
  return seeds_.back();
}

void Corpus::Restore(Seed seed) {
  next_id_ = std::max(next_id_, seed.id + 1);
  seeds_.push_back(std::move(seed));
}

double Corpus::TotalEnergy() const {
  double total = 0.0;
  for (const Seed& s : seeds_) total += s.energy;
  return total;
}

double Corpus::MeanEnergy() const {
  return seeds_.empty() ? 0.0 : TotalEnergy() / static_cast<double>(seeds_.size());
}

double Corpus::MedianEnergy() const {
  if (seeds_.empty()) return 1.0;
  std::vector<double> e;
  e.reserve(seeds_.size());
  for (const Seed& s : seeds_) e.push_back(s.energy);
  std::sort(e.begin(), e.end());
  const size_t n = e.size();
  return n % 2 == 1 ? e[n / 2] : 0.5 * (e[n / 2 - 1] + e[n / 2]);
}

// ---------------------------------------------------------------------------
// Selection and mutation

size_t SelectSeed(const Corpus& corpus, RandomStream& rng) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot select from an empty corpus");
  const double total = corpus.TotalEnergy();
  if (!(total > 0.0) || !std::isfinite(total)) {
    return static_cast<size_t>(rng.Index(corpus.size()));
  }
  const double u = rng.Uniform() * total;
  double cumulative = 0.0;
  size_t last_positive = 0;
  for (size_t i = 0; i < corpus.size(); ++i) {
    const double e = corpus[i].energy;
    if (e <= 0.0) continue;
    cumulative += e;
    last_positive = i;
    if (u < cumulative) return i;
  }
  return last_positive;  // rounding at the top end
}

State Mutate(const State& s0, FuzzTarget& target, double beta, int max_retries,
             RandomStream& rng) {
  const EnvironmentSpec& spec = target.spec();
  if (s0.size() != spec.state_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "seed dim vs environment dim");
  }
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    State candidate = s0;
    for (int i = 0; i < spec.state_dim; ++i) {
      if (!spec.mutable_dims[i]) continue;
      const double half = beta * spec.initial_state_bounds[i].width();
      candidate[i] += rng.Uniform(-half, half);
    }
    candidate = spec.Clamp(candidate);
    if (target.Validate(candidate)) return candidate;
  }
  throw Error(ErrorCode::kMutationExhausted,
              "validator rejected " + std::to_string(max_retries + 1) + " mutants");
}

StateScaler::StateScaler(const EnvironmentSpec& spec) {
  offset_.resize(spec.state_dim);
  scale_.resize(spec.state_dim);
  for (int i = 0; i < spec.state_dim; ++i) {
    const Interval& b = spec.initial_state_bounds[i];
    offset_[i] = b.lo;
    scale_[i] = b.width() > 0.0 ? std::sqrt(12.0) / b.width() : 1.0;
  }
}

State StateScaler::Apply(const State& s) const {
  if (offset_.size() == 0) return s;
  return ((s - offset_).array() * scale_.array()).matrix();
}

StateSequence StateScaler::Apply(const StateSequence& seq) const {
  StateSequence out;
  out.reserve(seq.size());
  for (const State& s : seq) out.push_back(Apply(s));
  return out;
}

// ---------------------------------------------------------------------------
// Campaign

Campaign::Campaign(FuzzTarget& target, CampaignConfig config)
    : target_(target), config_(std::move(config)), corpus_(config_.corpus_capacity) {
  config_.Validate();
  target_.spec().Check();
  horizon_ = config_.horizon > 0 ? config_.horizon : target_.spec().default_horizon;
  if (config_.normalize_states) scaler_ = StateScaler(target_.spec());
  start_ = Clock::now();
}

double Campaign::Elapsed() const {
  if (config_.clock == ClockMode::kLogical) return static_cast<double>(iteration_);
  return elapsed_offset_ +
         std::chrono::duration<double>(Clock::now() - start_).count();
}

bool Campaign::BudgetExhausted() const {
  if (config_.budget_iters) return iteration_ >= *config_.budget_iters;
  const double budget = config_.budget_seconds.value_or(config_.DefaultBudgetSeconds());
  const double wall =
      elapsed_offset_ + std::chrono::duration<double>(Clock::now() - start_).count();
  return wall >= budget;
}

bool Campaign::ShouldRetain(double reward, double parent_reward,
                            const std::optional<SequenceDensity>& density) const {
  if (reward < parent_reward) return true;
  return density.has_value() && density->step_density < config_.tau;
}

std::optional<SequenceDensity> Campaign::Density(const StateSequence& states) {
  if (!config_.density_guidance) return std::nullopt;
  return density_->EvaluateAndMaybeUpdate(scaler_.Apply(states), config_.tau);
}

double Campaign::EnergyFor(const State& s0, uint64_t rollout_seed, RandomStream& rng) {
  SensitivityOptions opts;
  opts.delta = config_.delta_sens;
  opts.samples = config_.sensitivity_samples;
  opts.max_retries = config_.sensitivity_retries;
  try {
    return Sensitivity(target_, s0, horizon_, rollout_seed, rng, opts).energy;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kPerturbationRejected) throw;
    return corpus_.MedianEnergy();
  }
}

void Campaign::InitCorpus() {
  if (initialized_) return;
  const uint64_t root = config_.rng_seed;
  std::vector<State> samples;
  uint64_t attempt = 0;
  for (int i = 0; i < config_.corpus_size; ++i) {
    bool accepted = false;
    for (int tries = 0; tries < config_.sampling_retries; ++tries) {
      State s = target_.Sample(DeriveSeed(root, "sample", attempt++));
      if (target_.Validate(s)) {
        samples.push_back(std::move(s));
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::kSamplingExhausted,
                  "validator rejected " + std::to_string(config_.sampling_retries) +
                      " consecutive samples");
    }
  }

  for (int i = 0; i < config_.corpus_size; ++i) {
    const uint64_t rollout_seed = DeriveSeed(root, "init-rollout", static_cast<uint64_t>(i));
    const RolloutResult result = target_.Rollout(samples[i], horizon_, rollout_seed);
    if (i == 0 && config_.density_guidance) {
      RandomStream init_rng(root, "dynem-init", 0);
      density_.emplace(InitDynEm(config_.k, target_.spec().state_dim,
                                 scaler_.Apply(result.states), init_rng,
                                 config_.gamma, config_.normalize_responsibilities));
    }
    RandomStream sens_rng(root, "init-sensitivity", static_cast<uint64_t>(i));
    Seed seed;
    seed.s0 = samples[i];
    seed.energy = EnergyFor(samples[i], rollout_seed, sens_rng);
    seed.reward = result.cumulative_reward;
    seed.density = Density(result.states);
    seed.rollout_seed = rollout_seed;
    corpus_.Add(std::move(seed));
  }
  initialized_ = true;
}

void Campaign::Restore(Corpus corpus, std::optional<DynEmState> dynem,
                       std::vector<CrashRecord> crashes, CampaignStats stats,
                       int64_t iteration, int64_t mutations, double elapsed_offset) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "restored corpus is empty");
  if (config_.density_guidance && !dynem) {
    throw Error(ErrorCode::kInvalidConfig, "density guidance needs a DynEM snapshot");
  }
  corpus_ = std::move(corpus);
  if (dynem) density_.emplace(std::move(*dynem));
  crashes_ = std::move(crashes);
  stats_ = std::move(stats);
  iteration_ = iteration;
  mutations_ = mutations;
  elapsed_offset_ = elapsed_offset;
  if (!stats_.rows.empty()) last_density_ = stats_.rows.back().last_density;
  start_ = Clock::now();
  initialized_ = true;
}

void Campaign::RecordStats() {
  if (!stats_.rows.empty() && stats_.rows.back().iterations == iteration_ &&
      stats_.rows.back().crashes == static_cast<int64_t>(crashes_.size())) {
    return;
  }
  StatsRow row;
  row.elapsed_s = Elapsed();
  row.iterations = iteration_;
  row.mutations = mutations_;
  row.crashes = static_cast<int64_t>(crashes_.size());
  row.corpus_size = static_cast<int64_t>(corpus_.size());
  row.mean_energy = corpus_.MeanEnergy();
  row.last_density = last_density_;
  stats_.rows.push_back(row);
}

Campaign::Pending Campaign::Prepare(int64_t iteration) {
  const uint64_t root = config_.rng_seed;
  const uint64_t it = static_cast<uint64_t>(iteration);
  Pending p;
  p.iteration = iteration;
  RandomStream select_rng(root, "select", it);
  p.parent_index = SelectSeed(corpus_, select_rng);
  const Seed& parent = corpus_[p.parent_index];
  p.parent_id = parent.id;
  p.parent_reward = parent.reward;
  p.rollout_seed = DeriveSeed(root, "rollout", it);
  RandomStream mutate_rng(root, "mutate", it);
  try {
    p.mutant = Mutate(parent.s0, target_, config_.beta, config_.mutation_retries, mutate_rng);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMutationExhausted) throw;
  }
  return p;
}

void Campaign::Execute(FuzzTarget& target, Pending& p) const {
  if (!p.mutant) return;
  try {
    p.result = target.Rollout(*p.mutant, horizon_, p.rollout_seed);
  } catch (...) {
    p.error = std::current_exception();
  }
}

void Campaign::Commit(Pending& p) {
  if (p.error) std::rethrow_exception(p.error);
  iteration_ = p.iteration + 1;
  if (p.mutant) {
    ++mutations_;
    const std::optional<SequenceDensity> density = Density(p.result.states);
    last_density_ = density ? density->step_density : 0.0;
    if (p.result.crashed()) {
      CrashRecord rec;
      rec.s0 = *p.mutant;
      rec.crash_step = *p.result.crash_step;
      rec.cumulative_reward = p.result.cumulative_reward;
      rec.rng_seed = p.rollout_seed;
      rec.env = config_.env;
      rec.horizon = horizon_;
      rec.iteration = p.iteration;
      rec.elapsed_s = Elapsed();
      rec.parent_id = p.parent_id;
      crashes_.push_back(rec);
      if (on_crash_) on_crash_(crashes_.back());
      RecordStats();
    } else if (ShouldRetain(p.result.cumulative_reward, p.parent_reward, density)) {
      RandomStream sens_rng(config_.rng_seed, "sensitivity", static_cast<uint64_t>(p.iteration));
      Seed seed;
      seed.s0 = *p.mutant;
      seed.reward = p.result.cumulative_reward;
      seed.energy = EnergyFor(seed.s0, p.rollout_seed, sens_rng);
      seed.density = density;
      seed.parent_id = p.parent_id;
      seed.created_at_iteration = p.iteration;
      seed.rollout_seed = p.rollout_seed;
      corpus_.Add(std::move(seed));
    }
  }
  if (iteration_ % config_.stats_every == 0) RecordStats();
}

bool Campaign::StepOnce() {
  if (!initialized_) InitCorpus();
  if (BudgetExhausted()) return false;
  Pending p = Prepare(iteration_);
  Execute(target_, p);
  Commit(p);
  return true;
}

void Campaign::Run(const Observer& on_checkpoint,
                   const std::function<void(const CrashRecord&)>& on_crash) {
  on_crash_ = on_crash;
  if (!initialized_) InitCorpus();
  if (stats_.rows.empty()) RecordStats();
  const int lanes = config_.lanes;
  while (lanes_.size() + 1 < static_cast<size_t>(lanes)) lanes_.push_back(target_.Fork());

  int64_t next_checkpoint =
      (iteration_ / config_.checkpoint_every + 1) * config_.checkpoint_every;
  while (!BudgetExhausted()) {
    if (lanes == 1) {
      Pending p = Prepare(iteration_);
      Execute(target_, p);
      Commit(p);
    } else {
      int64_t batch = lanes;
      if (config_.budget_iters) batch = std::min(batch, *config_.budget_iters - iteration_);
      std::vector<Pending> pending;
      for (int64_t b = 0; b < batch; ++b) pending.push_back(Prepare(iteration_ + b));
      std::vector<std::thread> workers;
      for (int64_t b = 1; b < batch; ++b) {
        workers.emplace_back([this, &pending, b] { Execute(*lanes_[b - 1], pending[b]); });
      }
      Execute(target_, pending[0]);
      for (std::thread& w : workers) w.join();
      for (Pending& p : pending) Commit(p);
    }
    if (iteration_ >= next_checkpoint) {
      if (on_checkpoint) on_checkpoint(*this);
      next_checkpoint += config_.checkpoint_every;
    }
  }
  RecordStats();
  on_crash_ = {};
}

}  // namespace mdpfuzz
