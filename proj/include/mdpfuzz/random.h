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

#ifndef MDPFUZZ_RANDOM_H_
#define MDPFUZZ_RANDOM_H_

#include <cstdint>
#include <random>
#include <string_view>

namespace mdpfuzz {

// Derives a 64-bit stream seed from (root seed, purpose tag, counter).
// Every stochastic element of a campaign draws from a stream keyed this
// way, so results never depend on call interleaving.
uint64_t DeriveSeed(uint64_t root, std::string_view tag, uint64_t counter);

class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : engine_(seed), seed_(seed) {}
  RandomStream(uint64_t root, std::string_view tag, uint64_t counter)
      : RandomStream(DeriveSeed(root, tag, counter)) {}

  uint64_t seed() const { return seed_; }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  uint64_t Index(uint64_t n);
  double Normal() { return normal_(engine_); }
  uint64_t NextU64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  uint64_t seed_;
};

}  // namespace mdpfuzz

#endif  // MDPFUZZ_RANDOM_H_
