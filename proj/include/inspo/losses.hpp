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
#include "inspo/policy.hpp"
#include "inspo/prefcore.hpp"

namespace inspo {

enum class Method { kDpo, kIpo, kRdpo, kOrpo, kSimpo };
enum class Conditioning { kNone, kOneSided, kCross, kAveraged, kBidirectional };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::kDpo: return "DPO";
    case Method::kIpo: return "IPO";
    case Method::kRdpo: return "RDPO";
    case Method::kOrpo: return "ORPO";
    case Method::kSimpo: return "SimPO";
  }
  return "unknown";
}

inline std::string to_string(Conditioning c) {
  switch (c) {
    case Conditioning::kNone: return "none";
    case Conditioning::kOneSided: return "one-sided";
    case Conditioning::kCross: return "cross";
    case Conditioning::kAveraged: return "averaged";
    case Conditioning::kBidirectional: return "bidirectional";
  }
  return "unknown";
}

inline Method method_from_string(const std::string& s) {
  for (Method m : {Method::kDpo, Method::kIpo, Method::kRdpo, Method::kOrpo, Method::kSimpo})
    if (to_string(m) == s) return m;
  fail(ErrorKind::kInvalidInput, "unknown method '" + s + "'");
}

inline Conditioning conditioning_from_string(const std::string& s) {
  for (Conditioning c : {Conditioning::kNone, Conditioning::kOneSided, Conditioning::kCross,
                         Conditioning::kAveraged, Conditioning::kBidirectional})
    if (to_string(c) == s) return c;
  fail(ErrorKind::kInvalidInput, "unknown conditioning '" + s + "'");
}

inline constexpr Method kAllMethods[] = {Method::kDpo, Method::kIpo, Method::kRdpo,
                                         Method::kOrpo, Method::kSimpo};
inline constexpr Conditioning kAllConditionings[] = {
    Conditioning::kNone, Conditioning::kOneSided, Conditioning::kCross,
    Conditioning::kAveraged, Conditioning::kBidirectional};

// Method, conditioning, and exactly the hyperparameters the method uses:
//   DPO beta | IPO tau | RDPO beta, alpha | ORPO lambda | SimPO beta, gamma
struct LossSpec {
  Method method = Method::kDpo;
  Conditioning conditioning = Conditioning::kNone;
  std::optional<double> beta;
  std::optional<double> tau;
  std::optional<double> alpha;
  std::optional<double> lambda;
  std::optional<double> gamma;

  static LossSpec dpo(double beta, Conditioning c = Conditioning::kNone) {
    LossSpec s;
    s.method = Method::kDpo;
    s.conditioning = c;
    s.beta = beta;
    return checked(s);
  }
  static LossSpec ipo(double tau, Conditioning c = Conditioning::kNone) {
    LossSpec s;
    s.method = Method::kIpo;
    s.conditioning = c;
    s.tau = tau;
    return checked(s);
  }
  static LossSpec rdpo(double beta, double alpha, Conditioning c = Conditioning::kNone) {
    LossSpec s;
    s.method = Method::kRdpo;
    s.conditioning = c;
    s.beta = beta;
    s.alpha = alpha;
    return checked(s);
  }
  static LossSpec orpo(double lambda, Conditioning c = Conditioning::kNone) {
    LossSpec s;
    s.method = Method::kOrpo;
    s.conditioning = c;
    s.lambda = lambda;
    return checked(s);
  }
  static LossSpec simpo(double beta, double gamma, Conditioning c = Conditioning::kNone) {
    LossSpec s;
    s.method = Method::kSimpo;
    s.conditioning = c;
    s.beta = beta;
    s.gamma = gamma;
    return checked(s);
  }

  // Reasonable stand-in hyperparameters for a method; used by sweeps and tests.
  static LossSpec defaults(Method method, Conditioning c) {
    switch (method) {
      case Method::kDpo: return dpo(0.5, c);
      case Method::kIpo: return ipo(0.5, c);
      case Method::kRdpo: return rdpo(0.5, 0.1, c);
      case Method::kOrpo: return orpo(0.5, c);
      case Method::kSimpo: return simpo(1.0, 0.2, c);
    }
    return dpo(0.5, c);
  }

  LossSpec with_conditioning(Conditioning c) const {
    LossSpec s = *this;
    s.conditioning = c;
    return s;
  }

  void validate() const {
    const bool wants_beta = method == Method::kDpo || method == Method::kRdpo ||
                            method == Method::kSimpo;
    auto check = [&](const std::optional<double>& v, bool wanted, const char* name) {
      if (wanted && !v)
        fail(ErrorKind::kInvalidInput, to_string(method) + " needs hyperparameter " + name);
      if (!wanted && v)
        fail(ErrorKind::kInvalidInput,
             to_string(method) + " does not take hyperparameter " + name);
      if (v && !std::isfinite(*v))
        fail(ErrorKind::kInvalidInput, std::string("hyperparameter ") + name + " must be finite");
    };
    check(beta, wants_beta, "beta");
    check(tau, method == Method::kIpo, "tau");
    check(alpha, method == Method::kRdpo, "alpha");
    check(lambda, method == Method::kOrpo, "lambda");
    check(gamma, method == Method::kSimpo, "gamma");
    if (beta) require(*beta > 0.0, "beta must be > 0");
    if (tau) require(*tau > 0.0, "tau must be > 0");
    if (lambda) require(*lambda >= 0.0, "lambda must be >= 0");
    if (gamma) require(*gamma >= 0.0, "gamma must be >= 0");
  }

  friend bool operator==(const LossSpec&, const LossSpec&) = default;

 private:
  static LossSpec checked(LossSpec s) {
    s.validate();
    return s;
  }
};

// Which comparator each log-probability term is conditioned on.
struct TermContexts {
  std::optional<std::size_t> winner;  // context for log pi(y_w | .)
  std::optional<std::size_t> loser;   // context for log pi(y_l | .)

  friend bool operator==(const TermContexts&, const TermContexts&) = default;
};

// One entry per summand: averaged yields the unconditioned pair followed by
// the cross pair; every other mode yields one.
inline std::vector<TermContexts> conditioning_contexts(Conditioning c,
                                                       const PreferencePair& pair) {
  switch (c) {
    case Conditioning::kNone: return {{std::nullopt, std::nullopt}};
    case Conditioning::kOneSided: return {{pair.y_l, pair.y_l}};
    case Conditioning::kCross:
    case Conditioning::kBidirectional: return {{pair.y_l, pair.y_w}};
    case Conditioning::kAveraged:
      return {{std::nullopt, std::nullopt}, {pair.y_l, pair.y_w}};
  }
  return {};
}

inline void check_compatible(const LossSpec& spec, PolicyKind kind) {
  spec.validate();
  const bool needs_plain = spec.conditioning == Conditioning::kNone ||
                           spec.conditioning == Conditioning::kAveraged;
  const bool needs_cond = spec.conditioning != Conditioning::kNone;
  if (needs_plain && kind == PolicyKind::kTabularCross)
    fail(ErrorKind::kInvalidInput, "conditioning '" + to_string(spec.conditioning) +
                                       "' needs an x-only view; tabular-cross has none");
  if (needs_cond && kind == PolicyKind::kTabularContext)
    fail(ErrorKind::kInvalidInput, "conditioning '" + to_string(spec.conditioning) +
                                       "' needs a conditioning-capable policy kind");
}

struct SampleEval {
  double margin = 0.0;
  double loss = 0.0;
};

namespace detail {

// Value of one summand plus the partial derivatives of its loss with respect
// to the two policy log-probabilities.
struct TermEval {
  double margin;
  double loss;
  double d_logp_w;
  double d_logp_l;
};

// logit(exp(a)) for a < 0, and its derivative 1 / (1 - e^a).
inline double logit_of_exp(double a) {
  const double om = -std::expm1(a);  // 1 - e^a
  if (!(om > 0.0))
    fail(ErrorKind::kDomain, "ORPO: length-normalized probability reached 1; logit undefined");
  return a - std::log(om);
}
inline double logit_of_exp_slope(double a) { return -1.0 / std::expm1(a); }

inline double ref_logprob(const ContextPolicy& ref, std::size_t x, std::size_t y) {
  const double q = ref(x, y);
  if (!(q > 0.0))
    fail(ErrorKind::kDomain, "reference assigns zero probability to response " +
                                 std::to_string(y) + " in context " + std::to_string(x));
  return std::log(q);
}

inline TermEval eval_term(const LossSpec& spec, const Spaces* spaces, double lw, double ll,
                          double rw, double rl, std::size_t y_w, std::size_t y_l) {
  const double len_w = spaces ? spaces->lengths[y_w] : 1.0;
  const double len_l = spaces ? spaces->lengths[y_l] : 1.0;
  switch (spec.method) {
    case Method::kDpo:
    case Method::kRdpo: {
      const double beta = *spec.beta;
      double m = beta * (lw - rw - ll + rl);
      if (spec.method == Method::kRdpo) m += *spec.alpha * (len_w - len_l);
      const double dm = -sigmoid(-m);
      return {m, softplus(-m), beta * dm, -beta * dm};
    }
    case Method::kSimpo: {
      const double beta = *spec.beta;
      const double m = beta * lw / len_w - beta * ll / len_l - *spec.gamma;
      const double dm = -sigmoid(-m);
      return {m, softplus(-m), dm * beta / len_w, -dm * beta / len_l};
    }
    case Method::kIpo: {
      const double h = (lw - rw) - (ll - rl);
      const double gap = h - 0.5 / *spec.tau;
      return {h, gap * gap, 2.0 * gap, -2.0 * gap};
    }
    case Method::kOrpo: {
      const double aw = lw / len_w, al = ll / len_l;
      const double m = logit_of_exp(aw) - logit_of_exp(al);
      const double lambda = *spec.lambda;
      const double dm = -lambda * sigmoid(-m);
      const double daw = -1.0 + dm * logit_of_exp_slope(aw);
      const double dal = -dm * logit_of_exp_slope(al);
      return {m, -aw + lambda * softplus(-m), daw / len_w, dal / len_l};
    }
  }
  return {0, 0, 0, 0};
}

template <typename GradSink>
SampleEval eval_sample(const LossSpec& spec, const PolicyParams& params,
                       const ContextPolicy& ref, const Spaces* spaces,
                       const PreferencePair& pair, GradSink&& sink) {
  check_pair(pair, params.num_contexts(), params.num_responses());
  const bool uses_ref = spec.method == Method::kDpo || spec.method == Method::kRdpo ||
                        spec.method == Method::kIpo;
  const double rw = uses_ref ? ref_logprob(ref, pair.x, pair.y_w) : 0.0;
  const double rl = uses_ref ? ref_logprob(ref, pair.x, pair.y_l) : 0.0;
  const auto terms = conditioning_contexts(spec.conditioning, pair);
  const double weight = 1.0 / static_cast<double>(terms.size());
  SampleEval out;
  for (const auto& ctx : terms) {
    const double lw = policy_logprob(params, pair.x, ctx.winner, pair.y_w);
    const double ll = policy_logprob(params, pair.x, ctx.loser, pair.y_l);
    const TermEval t = eval_term(spec, spaces, lw, ll, rw, rl, pair.y_w, pair.y_l);
    out.margin += weight * t.margin;
    out.loss += weight * t.loss;
    sink(ctx, weight * t.d_logp_w, weight * t.d_logp_l);
  }
  return out;
}

inline void check_inputs(const LossSpec& spec, const PolicyParams& params,
                         const ContextPolicy& ref, const Spaces* spaces) {
  check_compatible(spec, params.kind());
  require(ref.num_contexts() == params.num_contexts() &&
              ref.num_responses() == params.num_responses(),
          "loss: reference shape does not match policy");
  if (spaces)
    require(spaces->lengths.size() == params.num_responses(),
            "loss: spaces do not match policy");
}

}  // namespace detail

// Margin and loss for one pair. `spaces` supplies response lengths; pass
// nullptr to treat every response as length 1.
inline SampleEval evaluate_sample(const LossSpec& spec, const PolicyParams& params,
                                  const ContextPolicy& ref, const Spaces* spaces,
                                  const PreferencePair& pair) {
  detail::check_inputs(spec, params, ref, spaces);
  return detail::eval_sample(spec, params, ref, spaces, pair,
                             [](const TermContexts&, double, double) {});
}

// Pre-sigmoid argument of the loss (for IPO the log-ratio difference, for
// ORPO the logit difference; averaged takes the mean of both summands).
inline double per_sample_margin(const LossSpec& spec, const PolicyParams& params,
                                const ContextPolicy& ref, const Spaces* spaces,
                                const PreferencePair& pair) {
  return evaluate_sample(spec, params, ref, spaces, pair).margin;
}

inline double per_sample_loss(const LossSpec& spec, const PolicyParams& params,
                              const ContextPolicy& ref, const Spaces* spaces,
                              const PreferencePair& pair) {
  return evaluate_sample(spec, params, ref, spaces, pair).loss;
}

inline double batch_loss(const LossSpec& spec, const PolicyParams& params,
                         const ContextPolicy& ref, const Spaces* spaces,
                         std::span<const PreferencePair> batch) {
  require(!batch.empty(), "batch_loss: empty batch");
  detail::check_inputs(spec, params, ref, spaces);
  double total = 0.0;
  for (const auto& pair : batch)
    total += detail::eval_sample(spec, params, ref, spaces, pair,
                                 [](const TermContexts&, double, double) {})
                 .loss;
  return total / static_cast<double>(batch.size());
}

// Gradient of the mean batch loss with respect to every logit. The result has
// the same kind and layout as `params`.
inline PolicyParams batch_grad(const LossSpec& spec, const PolicyParams& params,
                               const ContextPolicy& ref, const Spaces* spaces,
                               std::span<const PreferencePair> batch,
                               double* loss_out = nullptr) {
  require(!batch.empty(), "batch_grad: empty batch");
  detail::check_inputs(spec, params, ref, spaces);
  PolicyParams grad(params.kind(), params.num_contexts(), params.num_responses());
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& pair : batch) {
    total += detail::eval_sample(
                 spec, params, ref, spaces, pair,
                 [&](const TermContexts& ctx, double d_w, double d_l) {
                   accumulate_logprob_grad(params, pair.x, ctx.winner, pair.y_w,
                                           scale * d_w, grad);
                   accumulate_logprob_grad(params, pair.x, ctx.loser, pair.y_l,
                                           scale * d_l, grad);
                 })
                 .loss;
  }
  if (loss_out) *loss_out = total * scale;
  return grad;
}

// Largest relative error between batch_grad and central finite differences
// of batch_loss, over parameters where |analytic| + |numeric| > 1e-10.
inline double fd_check(const LossSpec& spec, const PolicyParams& params,
                       const ContextPolicy& ref, const Spaces* spaces,
                       std::span<const PreferencePair> batch, double step) {
  require(step > 0.0, "fd_check: step must be > 0");
  const auto analytic = batch_grad(spec, params, ref, spaces, batch);
  PolicyParams probe = params;
  auto theta = probe.theta();
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + step;
    const double up = batch_loss(spec, probe, ref, spaces, batch);
    theta[i] = saved - step;
    const double down = batch_loss(spec, probe, ref, spaces, batch);
    theta[i] = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = analytic.theta()[i];
    if (std::abs(a) + std::abs(numeric) <= 1e-10) continue;
    worst = std::max(worst, std::abs(a - numeric) / std::max(std::abs(a), std::abs(numeric)));
  }
  return worst;
}

}  // namespace inspo
