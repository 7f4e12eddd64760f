// Copyright 2026 The InSPO Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "inspo/error.hpp"

namespace inspo {

// Reproducible random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The standard distributions are NOT portable across library
// implementations, so every derived draw is defined here explicitly:
//   uniform01()     = (next >> 11) * 2^-53, a double in [0, 1)
//   uniform(a, b)   = a + (b - a) * uniform01()
//   index(n)        = min(floor(uniform01() * n), n - 1)
//   categorical(p)  = first i with u < p[0] + ... + p[i], u = uniform01()
//   shuffle         = Fisher-Yates from the back using index(i + 1)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Rounding can leave u above the final cumulative sum; fall back to the
  // last index with positive mass.
  std::size_t categorical(std::span<const double> probs) {
    const double u = uniform01();
    double cum = 0.0;
    std::size_t last_positive = probs.size();
    for (std::size_t i = 0; i < probs.size(); ++i) {
      if (probs[i] <= 0.0) continue;
      cum += probs[i];
      last_positive = i;
      if (u < cum) return i;
    }
    if (last_positive == probs.size())
      fail(ErrorKind::kInvalidInput, "categorical: no positive mass");
    return last_positive;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace inspo
