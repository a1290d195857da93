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

#include "mdpfuzz/random.h"

#include <set>
#include <vector>

#include <gtest/gtest.h>

namespace mdpfuzz {
namespace {

TEST(DeriveSeed, IsAPureFunctionOfItsInputs) {
  EXPECT_EQ(DeriveSeed(7, "mutate", 3), DeriveSeed(7, "mutate", 3));
  EXPECT_NE(DeriveSeed(7, "mutate", 3), DeriveSeed(7, "mutate", 4));
  EXPECT_NE(DeriveSeed(7, "mutate", 3), DeriveSeed(7, "select", 3));
  EXPECT_NE(DeriveSeed(7, "mutate", 3), DeriveSeed(8, "mutate", 3));
}

TEST(DeriveSeed, NoCollisionsOverAGrid) {
  std::set<uint64_t> seen;
  for (uint64_t root = 0; root < 20; ++root) {
    for (const char* tag : {"select", "mutate", "rollout", "sample"}) {
      for (uint64_t c = 0; c < 100; ++c) seen.insert(DeriveSeed(root, tag, c));
    }
  }
  EXPECT_EQ(seen.size(), 20u * 4u * 100u);
}

TEST(RandomStream, SameSeedSameStream) {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.Uniform(), b.Uniform());
    EXPECT_EQ(a.Normal(), b.Normal());
  }
}

TEST(RandomStream, UniformStaysInRange) {
  RandomStream rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.Uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.Uniform(-3.0, 5.0);
    ASSERT_GE(v, -3.0);
    ASSERT_LT(v, 5.0);
  }
}

TEST(RandomStream, IndexIsRoughlyUniform) {
  RandomStream rng(5);
  std::vector<int> counts(7, 0);
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const uint64_t k = rng.Index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c / double(n), 1.0 / 7.0, 0.01);
}

}  // namespace
}  // namespace mdpfuzz
