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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "inspo/error.hpp"
#include "inspo/numerics.hpp"
#include "inspo/objective.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/tensor.hpp"

namespace inspo {

enum class PolicyKind { kTabularContext, kTabularCross, kSharedLupi };

inline std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kTabularContext: return "tabular-context";
    case PolicyKind::kTabularCross: return "tabular-cross";
    case PolicyKind::kSharedLupi: return "shared-lupi";
  }
  return "unknown";
}

inline PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "tabular-context") return PolicyKind::kTabularContext;
  if (s == "tabular-cross") return PolicyKind::kTabularCross;
  if (s == "shared-lupi") return PolicyKind::kSharedLupi;
  fail(ErrorKind::kInvalidInput, "unknown policy kind '" + s + "'");
}

// Unconstrained logits behind a trainable policy, stored as one flat vector
// so optimizers and gradient checks can treat every kind uniformly.
//
// Layout of `theta`:
//   tabular-context  logits[x][y]                         (m * k)
//   tabular-cross    logits[x][y'][y]                     (m * k * k)
//   shared-lupi      base u[x][y], then interaction v[y'][y]  (m * k + k * k)
//
// A shared-lupi policy conditioned on y' uses u[x] + v[y']; without a
// comparator it uses u[x] alone, which is also its deployed form.
class PolicyParams {
 public:
  PolicyParams() = default;

  PolicyParams(PolicyKind kind, std::size_t m, std::size_t k)
      : kind_(kind), m_(m), k_(k), theta_(param_count(kind, m, k), 0.0) {
    require(m >= 1 && k >= 2, "policy params need m >= 1 and k >= 2");
  }

  PolicyParams(PolicyKind kind, std::size_t m, std::size_t k, std::vector<double> theta)
      : kind_(kind), m_(m), k_(k), theta_(std::move(theta)) {
    require(m >= 1 && k >= 2, "policy params need m >= 1 and k >= 2");
    require(theta_.size() == param_count(kind, m, k), "policy params: wrong size");
    for (double v : theta_) require(std::isfinite(v), "policy params must be finite");
  }

  // pi_theta = ref in every slice (log ref copied into the base logits).
  static PolicyParams reference_init(PolicyKind kind, const ContextPolicy& ref) {
    const std::size_t m = ref.num_contexts(), k = ref.num_responses();
    PolicyParams p(kind, m, k);
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t y = 0; y < k; ++y) {
        const double q = ref(x, y);
        require(q > 0.0, "reference initialization needs a strictly positive reference");
        const double lq = std::log(q);
        if (kind == PolicyKind::kTabularCross) {
          for (std::size_t c = 0; c < k; ++c) p.cross(x, c)[y] = lq;
        } else {
          p.base(x)[y] = lq;
        }
      }
    return p;
  }

  static std::size_t param_count(PolicyKind kind, std::size_t m, std::size_t k) {
    switch (kind) {
      case PolicyKind::kTabularContext: return m * k;
      case PolicyKind::kTabularCross: return m * k * k;
      case PolicyKind::kSharedLupi: return m * k + k * k;
    }
    return 0;
  }

  PolicyKind kind() const noexcept { return kind_; }
  std::size_t num_contexts() const noexcept { return m_; }
  std::size_t num_responses() const noexcept { return k_; }
  bool conditioning_capable() const noexcept { return kind_ != PolicyKind::kTabularContext; }

  std::span<double> theta() noexcept { return theta_; }
  std::span<const double> theta() const noexcept { return theta_; }

  // tabular-context logits or shared-lupi base logits for context x.
  std::span<double> base(std::size_t x) {
    check_kind(kind_ != PolicyKind::kTabularCross, "base logits");
    return {theta_.data() + x * k_, k_};
  }
  std::span<const double> base(std::size_t x) const {
    check_kind(kind_ != PolicyKind::kTabularCross, "base logits");
    return {theta_.data() + x * k_, k_};
  }

  std::span<double> cross(std::size_t x, std::size_t cond) {
    check_kind(kind_ == PolicyKind::kTabularCross, "cross logits");
    return {theta_.data() + (x * k_ + cond) * k_, k_};
  }
  std::span<const double> cross(std::size_t x, std::size_t cond) const {
    check_kind(kind_ == PolicyKind::kTabularCross, "cross logits");
    return {theta_.data() + (x * k_ + cond) * k_, k_};
  }

  std::span<double> interaction(std::size_t cond) {
    check_kind(kind_ == PolicyKind::kSharedLupi, "interaction logits");
    return {theta_.data() + m_ * k_ + cond * k_, k_};
  }
  std::span<const double> interaction(std::size_t cond) const {
    check_kind(kind_ == PolicyKind::kSharedLupi, "interaction logits");
    return {theta_.data() + m_ * k_ + cond * k_, k_};
  }

  // Logits of pi(. | x) or pi(. | x, cond), written into `out` (size k).
  void logits(std::size_t x, std::optional<std::size_t> cond, std::span<double> out) const {
    require(x < m_, "policy: context index out of range");
    require(!cond || *cond < k_, "policy: conditioning response out of range");
    switch (kind_) {
      case PolicyKind::kTabularContext: {
        const auto b = base(x);
        std::copy(b.begin(), b.end(), out.begin());
        return;
      }
      case PolicyKind::kTabularCross: {
        if (!cond)
          fail(ErrorKind::kInvalidInput,
               "tabular-cross policy needs a conditioning response");
        const auto c = cross(x, *cond);
        std::copy(c.begin(), c.end(), out.begin());
        return;
      }
      case PolicyKind::kSharedLupi: {
        const auto b = base(x);
        for (std::size_t y = 0; y < k_; ++y) out[y] = b[y];
        if (cond) {
          const auto v = interaction(*cond);
          for (std::size_t y = 0; y < k_; ++y) out[y] += v[y];
        }
        return;
      }
    }
  }

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  static void check_kind(bool ok, const char* what) {
    if (!ok) fail(ErrorKind::kInvalidInput, std::string(what) + " not present for this policy kind");
  }

  PolicyKind kind_ = PolicyKind::kTabularContext;
  std::size_t m_ = 0;
  std::size_t k_ = 0;
  std::vector<double> theta_;
};

// Full log-distribution log pi(. | x[, cond]).
inline void slice_log_probs(const PolicyParams& params, std::size_t x,
                            std::optional<std::size_t> cond, std::span<double> out) {
  std::vector<double> logits(params.num_responses());
  params.logits(x, cond, logits);
  log_softmax(logits, out);
}

inline double policy_logprob(const PolicyParams& params, std::size_t x,
                             std::optional<std::size_t> cond, std::size_t y) {
  require(y < params.num_responses(), "policy_logprob: response index out of range");
  std::vector<double> lp(params.num_responses());
  slice_log_probs(params, x, cond, lp);
  return lp[y];
}

// grad += weight * d log pi(y | x[, cond]) / d theta.
inline void accumulate_logprob_grad(const PolicyParams& params, std::size_t x,
                                    std::optional<std::size_t> cond, std::size_t y,
                                    double weight, PolicyParams& grad) {
  const std::size_t k = params.num_responses();
  std::vector<double> logits(k), probs(k);
  params.logits(x, cond, logits);
  softmax(logits, probs);
  auto add = [&](std::span<double> slot) {
    for (std::size_t j = 0; j < k; ++j)
      slot[j] += weight * ((j == y ? 1.0 : 0.0) - probs[j]);
  };
  switch (params.kind()) {
    case PolicyKind::kTabularContext: add(grad.base(x)); break;
    case PolicyKind::kTabularCross: add(grad.cross(x, *cond)); break;
    case PolicyKind::kSharedLupi:
      add(grad.base(x));
      if (cond) add(grad.interaction(*cond));
      break;
  }
}

// pi_theta(. | x, y') for every (x, y'); a tabular-context policy repeats the
// same slice for every comparator.
inline CrossPolicy to_cross_policy(const PolicyParams& params) {
  const std::size_t m = params.num_contexts(), k = params.num_responses();
  Cube probs({m, k, k});
  std::vector<double> logits(k);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t c = 0; c < k; ++c) {
      std::optional<std::size_t> cond;
      if (params.kind() != PolicyKind::kTabularContext) cond = c;
      params.logits(x, cond, logits);
      softmax(logits, probs.row(x, c));
    }
  return CrossPolicy(std::move(probs));
}

enum class DeployMode { kDropPrivileged, kMarginalize };

inline std::string to_string(DeployMode mode) {
  return mode == DeployMode::kDropPrivileged ? "drop-privileged" : "marginalize";
}

inline DeployMode deploy_mode_from_string(const std::string& s) {
  if (s == "drop-privileged") return DeployMode::kDropPrivileged;
  if (s == "marginalize") return DeployMode::kMarginalize;
  fail(ErrorKind::kInvalidInput, "unknown deployment mode '" + s + "'");
}

// Context-only policy served at test time.
//   drop-privileged: softmax(u[x]) of a shared-lupi policy.
//   marginalize:     sum_{y'} ref(y'|x) pi_theta(y | x, y').
inline ContextPolicy deploy(const PolicyParams& params, const ContextPolicy& ref,
                            DeployMode mode) {
  const std::size_t m = params.num_contexts(), k = params.num_responses();
  Matrix out({m, k}, 0.0);
  std::vector<double> logits(k), probs(k);
  if (mode == DeployMode::kDropPrivileged) {
    require(params.kind() == PolicyKind::kSharedLupi,
            "drop-privileged deployment needs a shared-lupi policy");
    for (std::size_t x = 0; x < m; ++x) {
      params.logits(x, std::nullopt, logits);
      softmax(logits, out.row(x));
    }
    return ContextPolicy(std::move(out));
  }
  require(params.conditioning_capable(),
          "marginalize deployment needs a tabular-cross or shared-lupi policy");
  require(ref.num_contexts() == m && ref.num_responses() == k,
          "deploy: reference shape mismatch");
  for (std::size_t x = 0; x < m; ++x) {
    auto row = out.row(x);
    for (std::size_t c = 0; c < k; ++c) {
      const double w = ref(x, c);
      if (w == 0.0) continue;
      params.logits(x, c, logits);
      softmax(logits, probs);
      for (std::size_t y = 0; y < k; ++y) row[y] += w * probs[y];
    }
    // Renormalize away the rounding from the mixture.
    double sum = 0.0;
    for (double v : row) sum += v;
    for (double& v : row) v /= sum;
  }
  return ContextPolicy(std::move(out));
}

// E_{x ~ rho, y' ~ ref(.|x)} KL(pi(. | x, y') || ref(. | x)).
inline double kl_cross(const CrossPolicy& pi, const ContextPolicy& ref,
                       std::span<const double> rho) {
  const std::size_t m = pi.num_contexts(), k = pi.num_responses();
  require(ref.num_contexts() == m && ref.num_responses() == k, "kl_cross: shape mismatch");
  require(rho.size() == m, "kl_cross: context distribution size mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    if (rho[x] == 0.0) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double w = ref(x, c);
      if (w == 0.0) continue;
      double kl = 0.0;
      for (std::size_t y = 0; y < k; ++y) {
        const double p = pi(x, c, y);
        if (p == 0.0) continue;
        if (ref(x, y) == 0.0)
          fail(ErrorKind::kDomain, "kl_cross: reference has zero mass at (x=" +
                                       std::to_string(x) + ", y=" + std::to_string(y) +
                                       ") where the policy does not");
        kl += p * (std::log(p) - std::log(ref(x, y)));
      }
      total += rho[x] * w * kl;
    }
  }
  return total;
}

inline double kl_cross(const PolicyParams& params, const ContextPolicy& ref,
                       std::span<const double> rho) {
  return kl_cross(to_cross_policy(params), ref, rho);
}

// E_{x, y' ~ ref} E_{y ~ pi(.|x,y')} r(x, y, y') - beta * kl_cross.
inline double kl_regularized_objective(const CrossPolicy& pi, const RewardTensor& reward,
                                       double beta, const ContextPolicy& ref,
                                       std::span<const double> rho) {
  const std::size_t m = pi.num_contexts(), k = pi.num_responses();
  double expected = 0.0;
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t c = 0; c < k; ++c) {
      const double w = rho[x] * ref(x, c);
      if (w == 0.0) continue;
      for (std::size_t y = 0; y < k; ++y) expected += w * pi(x, c, y) * reward(x, y, c);
    }
  return expected - beta * kl_cross(pi, ref, rho);
}

inline double max_slice_tv(const CrossPolicy& a, const CrossPolicy& b) {
  require(a.probs().shape() == b.probs().shape(), "max_slice_tv: shape mismatch");
  double worst = 0.0;
  for (std::size_t x = 0; x < a.num_contexts(); ++x)
    for (std::size_t c = 0; c < a.num_responses(); ++c) {
      double tv = 0.0;
      for (std::size_t y = 0; y < a.num_responses(); ++y)
        tv += std::abs(a(x, c, y) - b(x, c, y));
      worst = std::max(worst, 0.5 * tv);
    }
  return worst;
}

struct KlSolveOptions {
  enum class Mode { kClosedForm, kGradientAscent };
  Mode mode = Mode::kClosedForm;
  int steps = 5000;
  double learning_rate = 0.5;
  double tv_tolerance = 1e-4;
};

// Maximizer of E[r] - beta * kl_cross over comparator-aware policies.
//
// Gradient ascent runs on tabular-cross logits started at log ref. Each
// (x, y') slice is an independent problem with gradient
//   d/dtheta_i = pi_i (A_i - sum_j pi_j A_j),  A_j = r_j - beta log(pi_j / ref_j).
// The result must land within `tv_tolerance` of the Gibbs solution in every
// slice, otherwise ConvergenceError reports the gap.
inline CrossPolicy solve_kl_regularized(const RewardTensor& reward, double beta,
                                        const ContextPolicy& ref,
                                        const KlSolveOptions& opts = {}) {
  const auto closed = gibbs_policy(reward, beta, ref).policy;
  if (opts.mode == KlSolveOptions::Mode::kClosedForm) return closed;

  require(opts.steps >= 1 && opts.learning_rate > 0.0,
          "solve_kl_regularized: need steps >= 1 and learning rate > 0");
  const std::size_t m = reward.num_contexts(), k = reward.num_responses();
  for (double q : ref.probs().data())
    require(q > 0.0, "solve_kl_regularized: gradient mode needs a strictly positive reference");

  auto params = PolicyParams::reference_init(PolicyKind::kTabularCross, ref);
  std::vector<double> probs(k), adv(k);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t c = 0; c < k; ++c) {
      auto logits = params.cross(x, c);
      for (int step = 0; step < opts.steps; ++step) {
        softmax(logits, probs);
        double mean = 0.0;
        for (std::size_t y = 0; y < k; ++y) {
          adv[y] = reward(x, y, c) - beta * (std::log(probs[y]) - std::log(ref(x, y)));
          mean += probs[y] * adv[y];
        }
        for (std::size_t y = 0; y < k; ++y)
          logits[y] += opts.learning_rate * probs[y] * (adv[y] - mean);
      }
    }
  auto solved = to_cross_policy(params);
  const double gap = max_slice_tv(solved, closed);
  if (!(gap <= opts.tv_tolerance))
    throw ConvergenceError(gap, "gradient ascent stopped " + std::to_string(gap) +
                                    " (total variation) from the closed form");
  return solved;
}

}  // namespace inspo
