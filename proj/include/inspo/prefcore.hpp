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

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "inspo/error.hpp"
#include "inspo/numerics.hpp"
#include "inspo/psi.hpp"
#include "inspo/random.hpp"
#include "inspo/tensor.hpp"

namespace inspo {

inline constexpr double kStochasticTol = 1e-12;

namespace detail {

inline void check_distribution(std::span<const double> p, const std::string& what) {
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      fail(ErrorKind::kInvalidInput, what + ": entries must be finite and >= 0");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kStochasticTol)
    fail(ErrorKind::kInvalidInput,
         what + ": entries sum to " + std::to_string(sum) + ", expected 1");
}

}  // namespace detail

// Finite context/response spaces. Responses are atomic symbols with a
// declared length standing in for a token count.
struct Spaces {
  std::size_t num_contexts = 1;
  std::size_t num_responses = 2;
  std::vector<int> lengths;           // one per response, >= 1
  std::vector<double> context_dist;   // rho over contexts

  static Spaces uniform(std::size_t m, std::size_t k) {
    Spaces s{m, k, std::vector<int>(k, 1),
             std::vector<double>(m, 1.0 / static_cast<double>(m))};
    s.validate();
    return s;
  }

  void validate() const {
    require(num_contexts >= 1, "spaces: need at least one context");
    require(num_responses >= 2, "spaces: need at least two responses");
    require(lengths.size() == num_responses, "spaces: one length per response");
    for (int len : lengths) require(len >= 1, "spaces: response lengths must be >= 1");
    require(context_dist.size() == num_contexts, "spaces: context_dist size mismatch");
    detail::check_distribution(context_dist, "spaces.context_dist");
  }

  friend bool operator==(const Spaces&, const Spaces&) = default;
};

// P[x][y][y'] = P(y beats y' | x).
class PreferenceModel {
 public:
  PreferenceModel() = default;
  explicit PreferenceModel(Cube probs) : probs_(std::move(probs)) { validate(); }

  double operator()(std::size_t x, std::size_t y, std::size_t y2) const {
    return probs_(x, y, y2);
  }
  const Cube& probs() const noexcept { return probs_; }
  std::size_t num_contexts() const { return probs_.dim(0); }
  std::size_t num_responses() const { return probs_.dim(1); }

  friend bool operator==(const PreferenceModel&, const PreferenceModel&) = default;

 private:
  void validate() const {
    require(probs_.dim(1) == probs_.dim(2), "preference model must be m x k x k");
    require(probs_.dim(0) >= 1 && probs_.dim(1) >= 2,
            "preference model needs m >= 1 and k >= 2");
    for (std::size_t x = 0; x < probs_.dim(0); ++x)
      for (std::size_t y = 0; y < probs_.dim(1); ++y) {
        require(probs_(x, y, y) == 0.5, "preference model: P[x][y][y] must be 0.5");
        for (std::size_t y2 = 0; y2 < probs_.dim(2); ++y2) {
          const double p = probs_(x, y, y2);
          require(p >= 0.0 && p <= 1.0, "preference model: entries must lie in [0, 1]");
          require(std::abs(p + probs_(x, y2, y) - 1.0) <= kStochasticTol,
                  "preference model: complement rule violated at (" +
                      std::to_string(x) + ", " + std::to_string(y) + ", " +
                      std::to_string(y2) + ")");
        }
      }
  }

  Cube probs_;
};

// pi(y | x), also used for the reference policy.
class ContextPolicy {
 public:
  ContextPolicy() = default;
  explicit ContextPolicy(Matrix probs) : probs_(std::move(probs)) {
    require(probs_.dim(0) >= 1 && probs_.dim(1) >= 1, "context policy must be non-empty");
    for (std::size_t x = 0; x < probs_.dim(0); ++x)
      detail::check_distribution(probs_.row(x), "context policy row " + std::to_string(x));
  }

  double operator()(std::size_t x, std::size_t y) const { return probs_(x, y); }
  std::span<const double> row(std::size_t x) const { return probs_.row(x); }
  const Matrix& probs() const noexcept { return probs_; }
  std::size_t num_contexts() const { return probs_.dim(0); }
  std::size_t num_responses() const { return probs_.dim(1); }

  friend bool operator==(const ContextPolicy&, const ContextPolicy&) = default;

 private:
  Matrix probs_;
};

// pi(y | x, y') stored as [x][y'][y].
class CrossPolicy {
 public:
  CrossPolicy() = default;
  explicit CrossPolicy(Cube probs) : probs_(std::move(probs)) {
    require(probs_.dim(1) == probs_.dim(2), "cross policy must be m x k x k");
    for (std::size_t x = 0; x < probs_.dim(0); ++x)
      for (std::size_t c = 0; c < probs_.dim(1); ++c)
        detail::check_distribution(probs_.row(x, c), "cross policy slice (" +
                                                         std::to_string(x) + ", " +
                                                         std::to_string(c) + ")");
  }

  double operator()(std::size_t x, std::size_t cond, std::size_t y) const {
    return probs_(x, cond, y);
  }
  std::span<const double> slice(std::size_t x, std::size_t cond) const {
    return probs_.row(x, cond);
  }
  const Cube& probs() const noexcept { return probs_; }
  std::size_t num_contexts() const { return probs_.dim(0); }
  std::size_t num_responses() const { return probs_.dim(1); }

  friend bool operator==(const CrossPolicy&, const CrossPolicy&) = default;

 private:
  Cube probs_;
};

struct PreferencePair {
  std::size_t x = 0;
  std::size_t y_w = 0;
  std::size_t y_l = 1;

  friend bool operator==(const PreferencePair&, const PreferencePair&) = default;
};

struct PreferenceDataset {
  std::uint64_t seed = 0;
  std::vector<PreferencePair> pairs;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  friend bool operator==(const PreferenceDataset&, const PreferenceDataset&) = default;
};

inline void check_pair(const PreferencePair& p, std::size_t m, std::size_t k) {
  require(p.x < m && p.y_w < k && p.y_l < k, "preference pair index out of range");
  require(p.y_w != p.y_l, "preference pair must compare distinct responses");
}

inline void check_compatible(const Spaces& s, const PreferenceModel& pref) {
  require(pref.num_contexts() == s.num_contexts && pref.num_responses() == s.num_responses,
          "preference model shape does not match spaces");
}

inline void check_compatible(const Spaces& s, const ContextPolicy& pi) {
  require(pi.num_contexts() == s.num_contexts && pi.num_responses() == s.num_responses,
          "policy shape does not match spaces");
}

// ---------------------------------------------------------------------------
// Reference policies.

inline ContextPolicy uniform_policy(std::size_t m, std::size_t k) {
  return ContextPolicy(Matrix({m, k}, 1.0 / static_cast<double>(k)));
}

// Rows drawn from uniform(floor, 1) weights and normalized; strictly positive.
inline ContextPolicy random_policy(std::size_t m, std::size_t k, std::uint64_t seed,
                                   double floor = 0.05) {
  require(floor > 0.0 && floor < 1.0, "random_policy: floor must lie in (0, 1)");
  Rng rng(seed);
  Matrix probs({m, k});
  for (std::size_t x = 0; x < m; ++x) {
    double sum = 0.0;
    for (std::size_t y = 0; y < k; ++y) sum += probs(x, y) = rng.uniform(floor, 1.0);
    for (std::size_t y = 0; y < k; ++y) probs(x, y) /= sum;
  }
  return ContextPolicy(std::move(probs));
}

// ---------------------------------------------------------------------------
// Ground-truth preference models.

// Bradley-Terry: P[x][y][y'] = sigma(r[x][y] - r[x][y']).
inline PreferenceModel bt_preference(const Spaces& spaces, const Matrix& reward) {
  spaces.validate();
  const std::size_t m = spaces.num_contexts, k = spaces.num_responses;
  require(reward.dim(0) == m && reward.dim(1) == k, "bt_preference: reward must be m x k");
  require(reward.all_finite(), "bt_preference: reward entries must be finite");
  Cube probs({m, k, k}, 0.5);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < k; ++y)
      for (std::size_t y2 = y + 1; y2 < k; ++y2) {
        const double p = sigmoid(reward(x, y) - reward(x, y2));
        probs(x, y, y2) = p;
        probs(x, y2, y) = sigmoid(reward(x, y2) - reward(x, y));
      }
  return PreferenceModel(std::move(probs));
}

// Non-separable ground truth: s ~ U[-scale, scale] drawn in row-major
// (x, y, y') order, a = (s[y][y'] - s[y'][y]) / 2, P = sigma(2a).
inline PreferenceModel antisymmetric_random_preference(const Spaces& spaces,
                                                       std::uint64_t seed, double scale) {
  spaces.validate();
  require(scale >= 0.0 && std::isfinite(scale),
          "antisymmetric_random_preference: scale must be finite and >= 0");
  const std::size_t m = spaces.num_contexts, k = spaces.num_responses;
  Rng rng(seed);
  Cube s({m, k, k});
  for (double& v : s.data()) v = rng.uniform(-scale, scale);
  Cube probs({m, k, k}, 0.5);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < k; ++y)
      for (std::size_t y2 = 0; y2 < k; ++y2) {
        if (y == y2) continue;
        const double a = 0.5 * (s(x, y, y2) - s(x, y2, y));
        probs(x, y, y2) = sigmoid(2.0 * a);
      }
  return PreferenceModel(std::move(probs));
}

// Two candidates and two reference responses over a single context, with
// the pairwise win rates of the non-invariance counterexample. Every entry
// not listed is 0.5.
struct Prop1Fixture {
  static constexpr std::size_t kCandidate1 = 0;
  static constexpr std::size_t kCandidate2 = 1;
  static constexpr std::size_t kRefA = 2;
  static constexpr std::size_t kRefB = 3;

  Spaces spaces;
  PreferenceModel model;
  ContextPolicy uniform_ref;  // mass 0.5 / 0.5 on the two reference responses
  ContextPolicy skewed_ref;   // mass 0.9 / 0.1
  std::vector<PsiSpec> psis;  // identity, log-odds
};

inline Prop1Fixture fixture_prop1() {
  using F = Prop1Fixture;
  Cube probs({1, 4, 4}, 0.5);
  auto set = [&](std::size_t y, std::size_t y2, double p) {
    probs(0, y, y2) = p;
    probs(0, y2, y) = 1.0 - p;
  };
  set(F::kCandidate1, F::kRefA, 0.9);
  set(F::kCandidate1, F::kRefB, 0.2);
  set(F::kCandidate2, F::kRefA, 0.56);
  set(F::kCandidate2, F::kRefB, 0.56);

  Matrix uniform({1, 4}, 0.0), skewed({1, 4}, 0.0);
  uniform(0, F::kRefA) = 0.5;
  uniform(0, F::kRefB) = 0.5;
  skewed(0, F::kRefA) = 0.9;
  skewed(0, F::kRefB) = 0.1;

  return F{Spaces::uniform(1, 4), PreferenceModel(std::move(probs)),
           ContextPolicy(std::move(uniform)), ContextPolicy(std::move(skewed)),
           {PsiSpec::identity(), PsiSpec::log_odds()}};
}

// ---------------------------------------------------------------------------
// Dataset sampling.

// Per sample: x ~ rho, y1, y2 ~ ref(.|x) redrawn until distinct, y1 wins with
// probability P[x][y1][y2]; stored as (x, winner, loser).
inline PreferenceDataset sample_dataset(const Spaces& spaces, const PreferenceModel& pref,
                                        const ContextPolicy& ref, std::size_t n,
                                        std::uint64_t seed) {
  spaces.validate();
  check_compatible(spaces, pref);
  check_compatible(spaces, ref);
  require(n >= 1, "sample_dataset: n must be >= 1");
  for (std::size_t x = 0; x < spaces.num_contexts; ++x) {
    if (spaces.context_dist[x] <= 0.0) continue;
    std::size_t support = 0;
    for (double p : ref.row(x)) support += p > 0.0 ? 1 : 0;
    if (support < 2)
      fail(ErrorKind::kGeneration, "reference policy has one-point support in context " +
                                       std::to_string(x) +
                                       "; cannot draw two distinct responses");
  }

  Rng rng(seed);
  PreferenceDataset data{seed, {}};
  data.pairs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t x = rng.categorical(spaces.context_dist);
    const std::size_t y1 = rng.categorical(ref.row(x));
    std::size_t y2 = rng.categorical(ref.row(x));
    while (y2 == y1) y2 = rng.categorical(ref.row(x));
    if (rng.bernoulli(pref(x, y1, y2)))
      data.pairs.push_back({x, y1, y2});
    else
      data.pairs.push_back({x, y2, y1});
  }
  return data;
}

}  // namespace inspo
