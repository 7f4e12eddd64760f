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

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace inspo {

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z); the linear/exponential branches kick in past |z| > 30 where
// the other term is below double resolution.
inline double softplus(double z) noexcept {
  if (z > 30.0) return z;
  if (z < -30.0) return std::exp(z);
  return std::log1p(std::exp(z));
}

inline double log_sigmoid(double z) noexcept { return -softplus(-z); }

inline double logsumexp(std::span<const double> v) noexcept {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

// out[i] = logits[i] - logsumexp(logits)
inline void log_softmax(std::span<const double> logits, std::span<double> out) noexcept {
  const double lse = logsumexp(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

inline void softmax(std::span<const double> logits, std::span<double> out) noexcept {
  const double lse = logsumexp(logits);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = std::exp(logits[i] - lse);
}

}  // namespace inspo
