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
#include <cstdint>
#include <string>
#include <vector>

#include "inspo/io.hpp"
#include "inspo/losses.hpp"
#include "inspo/objective.hpp"
#include "inspo/policy.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/random.hpp"

// Property and counterexample checks over the objective and loss modules,
// each summarized as {check_name, instances_tested, max_violation, pass}.
namespace inspo::verify {

struct CheckResult {
  std::string check_name;
  long instances_tested = 0;
  double max_violation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  io::Json details = io::Json::object();
};

struct Options {
  std::uint64_t seed = 20240601;
  int dominance_instances = 1000;   // random models for the optimality checks
  int separable_instances = 200;    // Bradley-Terry models
  int reference_policies = 3;       // references per invariance instance
  int algebra_instances = 100;      // (r, beta, ref) triples
  int kl_solve_instances = 10;      // gradient-ascent comparisons
  int gradient_seeds = 5;           // per method x conditioning
  int identity_instances = 100;     // loss-zoo identity instances

  friend bool operator==(const Options&, const Options&) = default;
};

inline io::Json to_json(const CheckResult& c) {
  return io::Json{{"check_name", c.check_name},
                  {"instances_tested", c.instances_tested},
                  {"max_violation", c.max_violation},
                  {"tolerance", c.tolerance},
                  {"pass", c.pass},
                  {"details", c.details}};
}

inline io::Json to_json(const Options& o) {
  return io::Json{{"seed", o.seed},
                  {"dominance_instances", o.dominance_instances},
                  {"separable_instances", o.separable_instances},
                  {"reference_policies", o.reference_policies},
                  {"algebra_instances", o.algebra_instances},
                  {"kl_solve_instances", o.kl_solve_instances},
                  {"gradient_seeds", o.gradient_seeds},
                  {"identity_instances", o.identity_instances}};
}

inline Options options_from_json(const io::Json& j, const std::string& path) {
  io::Reader r(j, path);
  Options o;
  o.seed = r.seed_or("seed", o.seed);
  auto count = [&](const char* key, int fallback) {
    const auto v = r.integer_or(key, fallback);
    if (v < 1) io::Reader::fail_at(r.child(key), "must be >= 1");
    return static_cast<int>(v);
  };
  o.dominance_instances = count("dominance_instances", o.dominance_instances);
  o.separable_instances = count("separable_instances", o.separable_instances);
  o.reference_policies = count("reference_policies", o.reference_policies);
  o.algebra_instances = count("algebra_instances", o.algebra_instances);
  o.kl_solve_instances = count("kl_solve_instances", o.kl_solve_instances);
  o.gradient_seeds = count("gradient_seeds", o.gradient_seeds);
  o.identity_instances = count("identity_instances", o.identity_instances);
  r.finish();
  return o;
}

// The three monotone scalarizations used by the invariance checks.
inline std::vector<PsiSpec> standard_psis() {
  return {PsiSpec::identity(), PsiSpec::log_odds(), PsiSpec::affine(2.0, -1.0)};
}

// ---------------------------------------------------------------------------
// Random instances.

struct Instance {
  Spaces spaces;
  PreferenceModel model;
  ContextPolicy ref;
};

inline std::vector<double> random_distribution(Rng& rng, std::size_t n) {
  std::vector<double> p(n);
  double sum = 0.0;
  for (double& v : p) sum += v = rng.uniform(0.05, 1.0);
  for (double& v : p) v /= sum;
  return p;
}

inline Spaces random_spaces(Rng& rng, std::size_t max_m, std::size_t max_k) {
  Spaces s;
  s.num_contexts = 1 + rng.index(max_m);
  s.num_responses = 2 + rng.index(max_k - 1);
  for (std::size_t y = 0; y < s.num_responses; ++y)
    s.lengths.push_back(1 + static_cast<int>(rng.index(4)));
  s.context_dist = random_distribution(rng, s.num_contexts);
  s.validate();
  return s;
}

inline Instance random_instance(Rng& rng, std::size_t max_m = 4, std::size_t max_k = 6) {
  auto spaces = random_spaces(rng, max_m, max_k);
  auto model = antisymmetric_random_preference(spaces, rng.next(), rng.uniform(0.2, 3.0));
  auto ref = random_policy(spaces.num_contexts, spaces.num_responses, rng.next());
  return {std::move(spaces), std::move(model), std::move(ref)};
}

inline Instance random_bt_instance(Rng& rng, std::size_t max_m = 4, std::size_t max_k = 6) {
  auto spaces = random_spaces(rng, max_m, max_k);
  Matrix reward({spaces.num_contexts, spaces.num_responses});
  for (double& v : reward.data()) v = rng.uniform(-2.0, 2.0);
  auto model = bt_preference(spaces, reward);
  auto ref = random_policy(spaces.num_contexts, spaces.num_responses, rng.next());
  return {std::move(spaces), std::move(model), std::move(ref)};
}

inline RewardTensor random_reward(Rng& rng, std::size_t m, std::size_t k, double scale) {
  Cube r({m, k, k});
  for (double& v : r.data()) v = rng.uniform(-scale, scale);
  return {std::move(r)};
}

inline PolicyParams random_params(Rng& rng, PolicyKind kind, std::size_t m, std::size_t k,
                                  double scale = 1.0) {
  PolicyParams p(kind, m, k);
  for (double& v : p.theta()) v = rng.uniform(-scale, scale);
  return p;
}

inline std::vector<PreferencePair> random_pairs(Rng& rng, std::size_t m, std::size_t k,
                                                std::size_t n) {
  std::vector<PreferencePair> out;
  for (std::size_t i = 0; i < n; ++i) {
    PreferencePair p{rng.index(m), rng.index(k), 0};
    do p.y_l = rng.index(k);
    while (p.y_l == p.y_w);
    out.push_back(p);
  }
  return out;
}

// Policy kinds able to evaluate a given conditioning mode.
inline std::vector<PolicyKind> kinds_for(Conditioning c) {
  switch (c) {
    case Conditioning::kNone: return {PolicyKind::kTabularContext, PolicyKind::kSharedLupi};
    case Conditioning::kAveraged: return {PolicyKind::kSharedLupi};
    default: return {PolicyKind::kTabularCross, PolicyKind::kSharedLupi};
  }
}

// ---------------------------------------------------------------------------
// Checks.

namespace detail {

inline CheckResult finish(std::string name, long n, double violation, double tol,
                          io::Json details = io::Json::object()) {
  return {std::move(name), n, violation, tol, violation <= tol, std::move(details)};
}

}  // namespace detail

inline std::vector<CheckResult> psi_dependence_checks() {
  using F = Prop1Fixture;
  const auto f = fixture_prop1();
  const auto id = PsiSpec::identity(), lo = PsiSpec::log_odds();
  auto scores = [&](const PsiSpec& psi, const ContextPolicy& ref) {
    return std::vector<double>{candidate_score(F::kCandidate1, 0, psi, ref, f.model),
                               candidate_score(F::kCandidate2, 0, psi, ref, f.model)};
  };
  auto deviation = [](const std::vector<double>& got, std::vector<double> want) {
    return std::max(std::abs(got[0] - want[0]), std::abs(got[1] - want[1]));
  };
  std::vector<CheckResult> out;
  const auto s_id = scores(id, f.uniform_ref);
  const auto s_lo = scores(lo, f.uniform_ref);
  const auto s_sk = scores(id, f.skewed_ref);
  out.push_back(detail::finish("psi_dependence.scores_identity_uniform", 1, deviation(s_id, {0.55, 0.56}),
                               1e-12, {{"scores", s_id}, {"expected", {0.55, 0.56}}}));
  out.push_back(detail::finish("psi_dependence.scores_log_odds_uniform", 1, deviation(s_lo, {0.41, 0.24}),
                               0.005, {{"scores", s_lo}, {"expected", {0.41, 0.24}}}));
  out.push_back(detail::finish("psi_dependence.scores_identity_skewed", 1, deviation(s_sk, {0.83, 0.56}),
                               1e-12, {{"scores", s_sk}, {"expected", {0.83, 0.56}}}));

  auto pick = [&](const PsiSpec& psi, const ContextPolicy& ref) {
    const auto pi = restricted_opt(f.model, psi, ref, f.spaces.context_dist);
    for (std::size_t y = 0; y < 4; ++y)
      if (pi(0, y) == 1.0) return y;
    return std::size_t{4};
  };
  const auto p_id = pick(id, f.uniform_ref), p_lo = pick(lo, f.uniform_ref);
  const auto p_sk = pick(id, f.skewed_ref);
  const double flip_psi = (p_id == F::kCandidate2 && p_lo == F::kCandidate1) ? 0.0 : 1.0;
  const double flip_ref = (p_id == F::kCandidate2 && p_sk == F::kCandidate1) ? 0.0 : 1.0;
  out.push_back(detail::finish("psi_dependence.flip_across_psi", 1, flip_psi, 0.0,
                               {{"identity_selects", p_id}, {"log_odds_selects", p_lo}}));
  out.push_back(detail::finish("psi_dependence.flip_across_reference", 1, flip_ref, 0.0,
                               {{"uniform_selects", p_id}, {"skewed_selects", p_sk}}));
  return out;
}

// V(global_opt) >= V(restricted_opt) - 1e-12 for each psi, and global_opt
// agrees with the per-slice argmax of psi(P) for every psi and reference.
inline std::vector<CheckResult> optimality_checks(const Options& opt) {
  Rng rng(opt.seed ^ 0x7431ULL);
  const auto psis = standard_psis();
  double dominance = 0.0, mismatches = 0.0;
  for (int i = 0; i < opt.dominance_instances; ++i) {
    const auto inst = random_instance(rng);
    const auto star = global_opt(inst.model);
    const auto& rho = inst.spaces.context_dist;
    const std::size_t m = inst.spaces.num_contexts, k = inst.spaces.num_responses;
    for (const auto& psi : psis) {
      const auto bar = restricted_opt(inst.model, psi, inst.ref, rho);
      dominance = std::max(dominance, value(bar, inst.ref, inst.model, psi, rho) -
                                          value(star, inst.ref, inst.model, psi, rho));
    }
    for (int rix = 0; rix < opt.reference_policies; ++rix) {
      const auto ref = random_policy(m, k, rng.next());
      for (const auto& psi : psis) {
        for (std::size_t x = 0; x < m; ++x)
          for (std::size_t c = 0; c < k; ++c) {
            // Weighted per-slice objective: only the argmax matters.
            std::size_t best = 0;
            double best_val = -INFINITY;
            for (std::size_t y = 0; y < k; ++y) {
              const double v = rho[x] * ref(x, c) * psi_eval(psi, inst.model(x, y, c));
              if (v > best_val) best_val = v, best = y;
            }
            if (star(x, c, best) != 1.0) mismatches += 1.0;
          }
      }
    }
  }
  return {detail::finish("optimality.global_dominates_restricted", opt.dominance_instances,
                         std::max(0.0, dominance), 1e-12,
                         {{"psis", {"identity", "log-odds", "affine(2,-1)"}}}),
          detail::finish("optimality.global_invariant_to_psi_and_reference",
                         static_cast<long>(opt.dominance_instances) * opt.reference_policies,
                         mismatches, 0.0)};
}

inline CheckResult separable_check(const Options& opt) {
  Rng rng(opt.seed ^ 0x5e9aULL);
  const auto psi = PsiSpec::log_odds();
  double worst = 0.0;
  long dependent = 0;
  for (int i = 0; i < opt.separable_instances; ++i) {
    const auto inst = random_bt_instance(rng);
    const auto& rho = inst.spaces.context_dist;
    const auto star = global_opt(inst.model);
    const auto bar = restricted_opt(inst.model, psi, inst.ref, rho);
    worst = std::max(worst, std::abs(value(star, inst.ref, inst.model, psi, rho) -
                                     value(bar, inst.ref, inst.model, psi, rho)));
    const std::size_t m = inst.spaces.num_contexts, k = inst.spaces.num_responses;
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t c = 1; c < k; ++c)
        for (std::size_t y = 0; y < k; ++y)
          if (star(x, c, y) != star(x, 0, y)) {
            ++dependent;
            break;
          }
  }
  return detail::finish("optimality.separable_coincides", opt.separable_instances,
                        std::max(worst, dependent > 0 ? 1.0 : 0.0), 1e-9,
                        {{"max_value_gap", worst}, {"comparator_dependent_slices", dependent}});
}

inline std::vector<CheckResult> gibbs_checks(const Options& opt) {
  Rng rng(opt.seed ^ 0x2b2bULL);
  double round_trip = 0.0, margin = 0.0;
  for (int i = 0; i < opt.algebra_instances; ++i) {
    const std::size_t m = 1 + rng.index(3), k = 2 + rng.index(5);
    const auto reward = random_reward(rng, m, k, 3.0);
    const double beta = rng.uniform(0.05, 2.0);
    const auto ref = random_policy(m, k, rng.next());
    const auto g = gibbs_policy(reward, beta, ref);
    const auto back = implicit_reward(g.policy, ref, beta, g.partition);
    round_trip = std::max(round_trip, max_abs_diff(back.r.data(), reward.r.data()));
    const auto& lz = g.partition.log_z;
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t w = 0; w < k; ++w)
        for (std::size_t l = 0; l < k; ++l) {
          const double lhs = beta * (std::log(g.policy(x, l, w)) - std::log(ref(x, w)) -
                                     std::log(g.policy(x, w, l)) + std::log(ref(x, l)));
          const double rhs = (reward(x, w, l) - beta * lz(x, l)) -
                             (reward(x, l, w) - beta * lz(x, w));
          margin = std::max(margin, std::abs(lhs - rhs));
        }
  }
  double tv = 0.0;
  for (int i = 0; i < opt.kl_solve_instances; ++i) {
    const std::size_t m = 1 + rng.index(3), k = 2 + rng.index(4);
    const auto reward = random_reward(rng, m, k, 1.0);
    const double beta = rng.uniform(0.5, 2.0);
    const auto ref = random_policy(m, k, rng.next(), 0.2);
    const auto closed = solve_kl_regularized(reward, beta, ref);
    KlSolveOptions ga;
    ga.mode = KlSolveOptions::Mode::kGradientAscent;
    try {
      tv = std::max(tv, max_slice_tv(solve_kl_regularized(reward, beta, ref, ga), closed));
    } catch (const ConvergenceError& e) {
      tv = std::max(tv, e.gap());
    }
  }
  return {detail::finish("gibbs.gibbs_implicit_reward_round_trip", opt.algebra_instances,
                         round_trip, 1e-9),
          detail::finish("gibbs.margin_identity", opt.algebra_instances, margin, 1e-9),
          detail::finish("gibbs.gradient_ascent_matches_closed_form", opt.kl_solve_instances,
                         tv, 1e-4)};
}

inline CheckResult gradient_check(const Options& opt) {
  Rng rng(opt.seed ^ 0x9d9dULL);
  double worst = 0.0;
  long tested = 0;
  io::Json per_combo = io::Json::object();
  for (Method method : kAllMethods)
    for (Conditioning cond : kAllConditionings) {
      const auto spec = LossSpec::defaults(method, cond);
      double combo = 0.0;
      for (int s = 0; s < opt.gradient_seeds; ++s) {
        const auto spaces = random_spaces(rng, 3, 5);
        const std::size_t m = spaces.num_contexts, k = spaces.num_responses;
        const auto ref = random_policy(m, k, rng.next());
        const auto batch = random_pairs(rng, m, k, 6);
        for (PolicyKind kind : kinds_for(cond)) {
          const auto params = random_params(rng, kind, m, k);
          combo = std::max(combo, fd_check(spec, params, ref, &spaces, batch, 1e-5));
          ++tested;
        }
      }
      per_combo[to_string(method) + "/" + to_string(cond)] = combo;
      worst = std::max(worst, combo);
    }
  return detail::finish("losses.gradient_matches_finite_differences", tested, worst, 1e-5,
                        {{"per_combination", per_combo}});
}

// Reduction (comparator-blind policy), RDPO(alpha=0) = DPO, averaged = mean of
// its summands, bidirectional = cross.
inline std::vector<CheckResult> loss_identity_checks(const Options& opt) {
  Rng rng(opt.seed ^ 0x1d1dULL);
  double reduction = 0.0, rdpo = 0.0, averaged = 0.0, bidir = 0.0;
  for (int i = 0; i < opt.identity_instances; ++i) {
    const auto spaces = random_spaces(rng, 3, 5);
    const std::size_t m = spaces.num_contexts, k = spaces.num_responses;
    const auto ref = random_policy(m, k, rng.next());
    const auto pairs = random_pairs(rng, m, k, 4);
    const auto ctx = random_params(rng, PolicyKind::kTabularContext, m, k);
    PolicyParams cross(PolicyKind::kTabularCross, m, k);
    for (std::size_t x = 0; x < m; ++x)
      for (std::size_t c = 0; c < k; ++c)
        std::copy(ctx.base(x).begin(), ctx.base(x).end(), cross.cross(x, c).begin());
    PolicyParams lupi = random_params(rng, PolicyKind::kSharedLupi, m, k);
    const auto lupi_free = [&] {
      PolicyParams p = lupi;
      for (std::size_t c = 0; c < k; ++c)
        std::fill(p.interaction(c).begin(), p.interaction(c).end(), 0.0);
      return p;
    }();
    for (Method method : kAllMethods) {
      const auto none = LossSpec::defaults(method, Conditioning::kNone);
      for (const auto& pair : pairs) {
        const double base = per_sample_loss(none, ctx, ref, &spaces, pair);
        for (Conditioning c : {Conditioning::kOneSided, Conditioning::kCross,
                               Conditioning::kBidirectional}) {
          reduction = std::max(reduction, std::abs(per_sample_loss(none.with_conditioning(c), cross,
                                                                   ref, &spaces, pair) - base));
        }
        const double lupi_none = per_sample_loss(none, lupi_free, ref, &spaces, pair);
        for (Conditioning c : kAllConditionings)
          reduction = std::max(reduction, std::abs(per_sample_loss(none.with_conditioning(c),
                                                                   lupi_free, ref, &spaces, pair) -
                                                   lupi_none));
        const auto cross_spec = none.with_conditioning(Conditioning::kCross);
        const double l_none = per_sample_loss(none, lupi, ref, &spaces, pair);
        const double l_cross = per_sample_loss(cross_spec, lupi, ref, &spaces, pair);
        const double l_avg = per_sample_loss(none.with_conditioning(Conditioning::kAveraged), lupi,
                                             ref, &spaces, pair);
        averaged = std::max(averaged, std::abs(l_avg - 0.5 * (l_none + l_cross)));
        const double l_bi = per_sample_loss(none.with_conditioning(Conditioning::kBidirectional),
                                            lupi, ref, &spaces, pair);
        bidir = std::max(bidir, std::abs(l_bi - l_cross));
      }
    }
    for (Conditioning c : kAllConditionings) {
      const auto& params = c == Conditioning::kNone ? ctx : lupi;
      for (const auto& pair : pairs) {
        const double beta = rng.uniform(0.1, 2.0);
        rdpo = std::max(rdpo, std::abs(per_sample_loss(LossSpec::rdpo(beta, 0.0, c), params, ref,
                                                       &spaces, pair) -
                                       per_sample_loss(LossSpec::dpo(beta, c), params, ref,
                                                       &spaces, pair)));
      }
    }
  }
  return {detail::finish("losses.reduction_comparator_blind", opt.identity_instances, reduction,
                         1e-12),
          detail::finish("losses.rdpo_alpha_zero_is_dpo", opt.identity_instances, rdpo, 1e-12),
          detail::finish("losses.averaged_is_mean_of_summands", opt.identity_instances, averaged,
                         1e-12),
          detail::finish("losses.bidirectional_is_cross", opt.identity_instances, bidir, 0.0,
                         {{"note", "bidirectional shares the cross formula exactly"}})};
}

inline std::vector<CheckResult> run_all(const Options& opt) {
  std::vector<CheckResult> out = psi_dependence_checks();
  for (auto& c : optimality_checks(opt)) out.push_back(std::move(c));
  out.push_back(separable_check(opt));
  for (auto& c : gibbs_checks(opt)) out.push_back(std::move(c));
  out.push_back(gradient_check(opt));
  for (auto& c : loss_identity_checks(opt)) out.push_back(std::move(c));
  return out;
}

}  // namespace inspo::verify
