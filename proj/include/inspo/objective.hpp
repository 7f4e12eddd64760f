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
#include <span>
#include <string>
#include <vector>

#include "inspo/error.hpp"
#include "inspo/numerics.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/psi.hpp"
#include "inspo/tensor.hpp"

namespace inspo {

// Generic reward r(x, y, y') stored as [x][y][y'].
struct RewardTensor {
  Cube r;

  double operator()(std::size_t x, std::size_t y, std::size_t cond) const {
    return r(x, y, cond);
  }
  std::size_t num_contexts() const { return r.dim(0); }
  std::size_t num_responses() const { return r.dim(1); }

  friend bool operator==(const RewardTensor&, const RewardTensor&) = default;
};

// log Z(x, y'), Z(x, y') = sum_y ref(y|x) exp(r(x, y, y') / beta). Kept in log
// space so large r / beta does not overflow.
struct PartitionTable {
  Matrix log_z;

  double z(std::size_t x, std::size_t cond) const { return std::exp(log_z(x, cond)); }

  friend bool operator==(const PartitionTable&, const PartitionTable&) = default;
};

namespace detail {

inline void check_shapes(const PreferenceModel& pref, const ContextPolicy& ref,
                         std::span<const double> rho) {
  require(ref.num_contexts() == pref.num_contexts() &&
              ref.num_responses() == pref.num_responses(),
          "reference policy shape does not match preference model");
  require(rho.size() == pref.num_contexts(), "context distribution size mismatch");
}

// Lowest index wins ties.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

}  // namespace detail

// S(y) = sum_{y'} ref(y'|x) psi(P[x][y][y']). Terms with ref(y'|x) = 0 are
// dropped, so psi is only evaluated where the reference puts mass.
inline double candidate_score(std::size_t y, std::size_t x, const PsiSpec& psi,
                              const ContextPolicy& ref, const PreferenceModel& pref) {
  require(x < pref.num_contexts() && y < pref.num_responses(),
          "candidate_score: index out of range");
  double score = 0.0;
  for (std::size_t y2 = 0; y2 < pref.num_responses(); ++y2) {
    const double w = ref(x, y2);
    if (w == 0.0) continue;
    score += w * psi_eval(psi, pref(x, y, y2));
  }
  return score;
}

// Exact V(pi) for a context-conditioned policy. Zero-probability terms are
// skipped.
inline double value(const ContextPolicy& policy, const ContextPolicy& ref,
                    const PreferenceModel& pref, const PsiSpec& psi,
                    std::span<const double> rho) {
  detail::check_shapes(pref, ref, rho);
  require(policy.num_contexts() == pref.num_contexts() &&
              policy.num_responses() == pref.num_responses(),
          "value: policy shape mismatch");
  const std::size_t m = pref.num_contexts(), k = pref.num_responses();
  double total = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    if (rho[x] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t y2 = 0; y2 < k; ++y2) {
      if (ref(x, y2) == 0.0) continue;
      double acc = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        if (policy(x, y) == 0.0) continue;
        acc += policy(x, y) * psi_eval(psi, pref(x, y, y2));
      }
      inner += ref(x, y2) * acc;
    }
    total += rho[x] * inner;
  }
  return total;
}

// Exact V(pi) for a policy that also sees the comparator y' ~ ref.
inline double value(const CrossPolicy& policy, const ContextPolicy& ref,
                    const PreferenceModel& pref, const PsiSpec& psi,
                    std::span<const double> rho) {
  detail::check_shapes(pref, ref, rho);
  require(policy.num_contexts() == pref.num_contexts() &&
              policy.num_responses() == pref.num_responses(),
          "value: policy shape mismatch");
  const std::size_t m = pref.num_contexts(), k = pref.num_responses();
  double total = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    if (rho[x] == 0.0) continue;
    double inner = 0.0;
    for (std::size_t y2 = 0; y2 < k; ++y2) {
      if (ref(x, y2) == 0.0) continue;
      double acc = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        const double p = policy(x, y2, y);
        if (p == 0.0) continue;
        acc += p * psi_eval(psi, pref(x, y, y2));
      }
      inner += ref(x, y2) * acc;
    }
    total += rho[x] * inner;
  }
  return total;
}

inline ContextPolicy deterministic_policy(std::size_t k, std::span<const std::size_t> choice) {
  Matrix probs({choice.size(), k}, 0.0);
  for (std::size_t x = 0; x < choice.size(); ++x) {
    require(choice[x] < k, "deterministic_policy: choice out of range");
    probs(x, choice[x]) = 1.0;
  }
  return ContextPolicy(std::move(probs));
}

// Best context-only policy: per context, all mass on argmax_y S(y).
inline ContextPolicy restricted_opt(const PreferenceModel& pref, const PsiSpec& psi,
                                    const ContextPolicy& ref, std::span<const double> rho) {
  detail::check_shapes(pref, ref, rho);
  const std::size_t m = pref.num_contexts(), k = pref.num_responses();
  std::vector<std::size_t> choice(m);
  std::vector<double> scores(k);
  for (std::size_t x = 0; x < m; ++x) {
    for (std::size_t y = 0; y < k; ++y) scores[y] = candidate_score(y, x, psi, ref, pref);
    choice[x] = detail::argmax(scores);
  }
  return deterministic_policy(k, choice);
}

// Best comparator-aware policy: per (x, y'), all mass on argmax_y P[x][y][y'].
// Any non-decreasing psi and any reference give the same maximizer, so
// neither is an input.
inline CrossPolicy global_opt(const PreferenceModel& pref) {
  const std::size_t m = pref.num_contexts(), k = pref.num_responses();
  Cube probs({m, k, k}, 0.0);
  std::vector<double> column(k);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y2 = 0; y2 < k; ++y2) {
      for (std::size_t y = 0; y < k; ++y) column[y] = pref(x, y, y2);
      probs(x, y2, detail::argmax(column)) = 1.0;
    }
  return CrossPolicy(std::move(probs));
}

struct GibbsSolution {
  CrossPolicy policy;
  PartitionTable partition;
};

// pi_r(y | x, y') = ref(y|x) exp(r(x, y, y') / beta) / Z(x, y'), evaluated with
// per-slice max subtraction.
inline GibbsSolution gibbs_policy(const RewardTensor& reward, double beta,
                                  const ContextPolicy& ref) {
  require(beta > 0.0 && std::isfinite(beta), "gibbs_policy: beta must be > 0");
  require(reward.r.all_finite(), "gibbs_policy: reward must be finite");
  const std::size_t m = reward.num_contexts(), k = reward.num_responses();
  require(reward.r.dim(2) == k, "gibbs_policy: reward must be m x k x k");
  require(ref.num_contexts() == m && ref.num_responses() == k,
          "gibbs_policy: reference shape mismatch");

  Cube probs({m, k, k}, 0.0);
  Matrix log_z({m, k});
  std::vector<double> logw(k);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t y = 0; y < k; ++y)
        logw[y] = std::log(ref(x, y)) + reward(x, y, c) / beta;
      const double lz = logsumexp(logw);
      log_z(x, c) = lz;
      for (std::size_t y = 0; y < k; ++y) probs(x, c, y) = std::exp(logw[y] - lz);
    }
  return {CrossPolicy(std::move(probs)), PartitionTable{std::move(log_z)}};
}

// r(x, y, y') = beta [log pi_r(y|x,y') - log ref(y|x) + log Z(x, y')].
inline RewardTensor implicit_reward(const CrossPolicy& pi_r, const ContextPolicy& ref,
                                    double beta, const PartitionTable& partition) {
  require(beta > 0.0, "implicit_reward: beta must be > 0");
  const std::size_t m = pi_r.num_contexts(), k = pi_r.num_responses();
  require(ref.num_contexts() == m && ref.num_responses() == k,
          "implicit_reward: reference shape mismatch");
  require(partition.log_z.dim(0) == m && partition.log_z.dim(1) == k,
          "implicit_reward: partition table shape mismatch");
  Cube r({m, k, k});
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t c = 0; c < k; ++c)
      for (std::size_t y = 0; y < k; ++y) {
        const double p = pi_r(x, c, y), q = ref(x, y);
        if (p <= 0.0 || q <= 0.0)
          fail(ErrorKind::kDomain,
               "implicit_reward: zero probability at (x=" + std::to_string(x) +
                   ", y'=" + std::to_string(c) + ", y=" + std::to_string(y) + ")");
        r(x, y, c) = beta * (std::log(p) - std::log(q) + partition.log_z(x, c));
      }
  return {std::move(r)};
}

// Largest deviation from the complement rule of the choice model
// P(y > y' | x) = sigma(2 (r(x, y, y') - beta log Z(x, y'))).
inline double consistency_violation(const RewardTensor& reward, double beta,
                                    const ContextPolicy& ref) {
  const auto gibbs = gibbs_policy(reward, beta, ref);
  const auto& lz = gibbs.partition.log_z;
  const std::size_t m = reward.num_contexts(), k = reward.num_responses();
  double worst = 0.0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < k; ++y)
      for (std::size_t y2 = 0; y2 < k; ++y2) {
        const double forward = sigmoid(2.0 * (reward(x, y, y2) - beta * lz(x, y2)));
        const double backward = sigmoid(2.0 * (reward(x, y2, y) - beta * lz(x, y)));
        worst = std::max(worst, std::abs(forward + backward - 1.0));
      }
  return worst;
}

}  // namespace inspo
