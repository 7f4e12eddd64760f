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
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "inspo/io.hpp"
#include "inspo/objective.hpp"
#include "inspo/policy.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/trainer.hpp"
#include "inspo/verify.hpp"

// Experiment configuration, the train/evaluate pipeline, and seed sweeps.
namespace inspo::experiment {

using io::Json;

struct ModelSpec {
  enum class Type { kBradleyTerry, kAntisymmetricRandom, kFixture };
  Type type = Type::kAntisymmetricRandom;
  std::optional<Matrix> reward;   // bt with explicit rewards
  std::uint64_t seed = 7;         // antisymmetric-random, or bt random rewards
  double scale = 2.0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

struct ReferenceSpec {
  enum class Type { kUniform, kRandom, kExplicit };
  Type type = Type::kUniform;
  std::uint64_t seed = 0;
  double floor = 0.05;
  std::optional<Matrix> probs;

  friend bool operator==(const ReferenceSpec&, const ReferenceSpec&) = default;
};

struct EvalOptions {
  std::vector<PsiSpec> psis = {PsiSpec::identity()};
  std::vector<DeployMode> deployments = {DeployMode::kMarginalize, DeployMode::kDropPrivileged};

  friend bool operator==(const EvalOptions&, const EvalOptions&) = default;
};

struct SweepSpec {
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> betas;           // empty: keep train.loss.beta
  std::vector<double> learning_rates;  // empty: keep train.learning_rate
  int jobs = 1;

  friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct ExperimentConfig {
  Spaces spaces = Spaces::uniform(2, 5);
  ModelSpec model;
  ReferenceSpec reference;
  std::size_t dataset_size = 5000;
  std::uint64_t dataset_seed = 1;
  TrainConfig train = default_train();
  // Comparison run; by default the unconditioned DPO counterpart on a
  // tabular-context policy. Disabled with "baseline": null.
  std::optional<TrainConfig> baseline = default_baseline(default_train());
  EvalOptions evaluation;
  verify::Options verification;
  SweepSpec sweep;
  std::string output_dir = "out";

  static TrainConfig default_train() {
    TrainConfig t;
    t.loss = LossSpec::dpo(0.5, Conditioning::kCross);
    t.policy_kind = PolicyKind::kTabularCross;
    t.epochs = 3;
    t.batch_size = 16;
    t.learning_rate = 0.5;
    t.shuffle_seed = 1;
    t.eval_every = 10;
    return t;
  }

  static TrainConfig default_baseline(const TrainConfig& t) {
    TrainConfig b = t;
    b.loss = t.loss.with_conditioning(Conditioning::kNone);
    b.policy_kind = PolicyKind::kTabularContext;
    return b;
  }

  // --seed: one seed for both dataset sampling and minibatch shuffling.
  void override_seed(std::uint64_t seed) {
    dataset_seed = seed;
    train.shuffle_seed = seed;
    if (baseline) baseline->shuffle_seed = seed;
    verification.seed = seed;
  }

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline std::string psi_label(const PsiSpec& psi) {
  if (psi.kind == PsiSpec::Kind::kAffine)
    return "affine(" + io::format_double(psi.slope) + "," + io::format_double(psi.intercept) + ")";
  if (psi.kind == PsiSpec::Kind::kClippedLogOdds)
    return "clipped-log-odds(" + io::format_double(psi.epsilon) + ")";
  return psi.name();
}

// ---------------------------------------------------------------------------
// JSON.

inline Json to_json(const ModelSpec& s) {
  switch (s.type) {
    case ModelSpec::Type::kFixture: return Json{{"type", "fixture"}};
    case ModelSpec::Type::kAntisymmetricRandom:
      return Json{{"type", "antisymmetric-random"}, {"seed", s.seed}, {"scale", s.scale}};
    case ModelSpec::Type::kBradleyTerry:
      if (s.reward) return Json{{"type", "bt"}, {"reward", io::to_json(*s.reward)}};
      return Json{{"type", "bt"}, {"reward_seed", s.seed}, {"reward_scale", s.scale}};
  }
  return Json::object();
}

inline ModelSpec model_spec_from_json(const Json& j, const std::string& path) {
  io::Reader r(j, path);
  const auto type = r.string("type");
  ModelSpec s;
  if (type == "fixture") {
    s.type = ModelSpec::Type::kFixture;
  } else if (type == "antisymmetric-random") {
    s.type = ModelSpec::Type::kAntisymmetricRandom;
    s.seed = r.seed("seed");
    s.scale = r.number_or("scale", 1.0);
    if (!(s.scale >= 0.0)) io::Reader::fail_at(r.child("scale"), "must be >= 0");
  } else if (type == "bt") {
    s.type = ModelSpec::Type::kBradleyTerry;
    if (const Json* rw = r.find("reward")) {
      s.reward = io::matrix_from_json(*rw, r.child("reward"));
    } else {
      s.seed = r.seed("reward_seed");
      s.scale = r.number_or("reward_scale", 1.0);
    }
  } else {
    io::Reader::fail_at(r.child("type"), "unknown preference model type '" + type + "'");
  }
  r.finish();
  return s;
}

inline Json to_json(const ReferenceSpec& s) {
  switch (s.type) {
    case ReferenceSpec::Type::kUniform: return Json{{"type", "uniform"}};
    case ReferenceSpec::Type::kRandom:
      return Json{{"type", "random"}, {"seed", s.seed}, {"floor", s.floor}};
    case ReferenceSpec::Type::kExplicit:
      return Json{{"type", "explicit"}, {"probs", io::to_json(*s.probs)}};
  }
  return Json::object();
}

inline ReferenceSpec reference_spec_from_json(const Json& j, const std::string& path) {
  io::Reader r(j, path);
  const auto type = r.string("type");
  ReferenceSpec s;
  if (type == "uniform") {
    s.type = ReferenceSpec::Type::kUniform;
  } else if (type == "random") {
    s.type = ReferenceSpec::Type::kRandom;
    s.seed = r.seed("seed");
    s.floor = r.number_or("floor", 0.05);
  } else if (type == "explicit") {
    s.type = ReferenceSpec::Type::kExplicit;
    s.probs = io::matrix_from_json(r.at("probs"), r.child("probs"));
  } else {
    io::Reader::fail_at(r.child("type"), "unknown reference type '" + type + "'");
  }
  r.finish();
  return s;
}

inline Json to_json(const EvalOptions& e) {
  Json psis = Json::array(), modes = Json::array();
  for (const auto& p : e.psis) psis.push_back(io::to_json(p));
  for (auto d : e.deployments) modes.push_back(to_string(d));
  return Json{{"psi", psis}, {"deployment", modes}};
}

inline EvalOptions eval_options_from_json(const Json& j, const std::string& path) {
  io::Reader r(j, path);
  EvalOptions e;
  if (const Json* p = r.find("psi")) {
    if (!p->is_array() || p->empty())
      io::Reader::fail_at(r.child("psi"), "expected a non-empty array");
    e.psis.clear();
    for (std::size_t i = 0; i < p->size(); ++i)
      e.psis.push_back(io::psi_from_json((*p)[i], r.child("psi") + "[" + std::to_string(i) + "]"));
  }
  if (const Json* d = r.find("deployment")) {
    if (!d->is_array()) io::Reader::fail_at(r.child("deployment"), "expected an array");
    e.deployments.clear();
    for (std::size_t i = 0; i < d->size(); ++i) {
      const auto where = r.child("deployment") + "[" + std::to_string(i) + "]";
      e.deployments.push_back(io::validated(
          where, [&] { return deploy_mode_from_string(io::Reader::as_string((*d)[i], where)); }));
    }
  }
  r.finish();
  return e;
}

inline Json to_json(const SweepSpec& s) {
  return Json{{"seeds", s.seeds},
              {"beta", s.betas},
              {"learning_rate", s.learning_rates},
              {"jobs", s.jobs}};
}

inline SweepSpec sweep_from_json(const Json& j, const std::string& path) {
  io::Reader r(j, path);
  SweepSpec s;
  auto numbers = [&](const char* key, std::vector<double>& out) {
    if (const Json* v = r.find(key))
      if (!(v->is_array() && v->empty())) out = io::number_row(*v, r.child(key));
  };
  if (const Json* v = r.find("seeds")) {
    if (!v->is_array() || v->empty())
      io::Reader::fail_at(r.child("seeds"), "expected a non-empty array");
    s.seeds.clear();
    for (std::size_t i = 0; i < v->size(); ++i)
      s.seeds.push_back(io::Reader::as_seed((*v)[i], r.child("seeds") + "[" + std::to_string(i) + "]"));
  }
  numbers("beta", s.betas);
  numbers("learning_rate", s.learning_rates);
  s.jobs = static_cast<int>(r.integer_or("jobs", s.jobs));
  if (s.jobs < 1) io::Reader::fail_at(r.child("jobs"), "must be >= 1");
  r.finish();
  return s;
}

inline Json to_json(const ExperimentConfig& c) {
  Json j = io::header("experiment_config");
  j["spaces"] = io::to_json(c.spaces);
  j["preference_model"] = to_json(c.model);
  j["reference"] = to_json(c.reference);
  j["dataset"] = Json{{"n", c.dataset_size}, {"seed", c.dataset_seed}};
  j["train"] = io::to_json(c.train);
  j["baseline"] = c.baseline ? io::to_json(*c.baseline) : Json(nullptr);
  j["evaluation"] = to_json(c.evaluation);
  j["verification"] = verify::to_json(c.verification);
  j["sweep"] = to_json(c.sweep);
  j["output_dir"] = c.output_dir;
  return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
  io::Reader r(j, "");
  r.check_header("experiment_config");
  ExperimentConfig c;
  if (const Json* m = r.find("preference_model")) c.model = model_spec_from_json(*m, "preference_model");
  if (const Json* s = r.find("spaces")) {
    c.spaces = io::spaces_from_json(*s, "spaces");
  } else if (c.model.type == ModelSpec::Type::kFixture) {
    c.spaces = Spaces::uniform(1, 4);
  }
  if (const Json* ref = r.find("reference")) c.reference = reference_spec_from_json(*ref, "reference");
  if (const Json* d = r.find("dataset")) {
    io::Reader dr(*d, "dataset");
    const auto n = dr.integer_or("n", static_cast<std::int64_t>(c.dataset_size));
    if (n < 1) io::Reader::fail_at("dataset.n", "must be >= 1");
    c.dataset_size = static_cast<std::size_t>(n);
    c.dataset_seed = dr.seed_or("seed", c.dataset_seed);
    dr.finish();
  }
  if (const Json* t = r.find("train")) c.train = io::train_config_from_json(*t, "train", c.train);
  if (const Json* b = r.find("baseline")) {
    if (b->is_null())
      c.baseline.reset();
    else
      c.baseline = io::train_config_from_json(*b, "baseline", ExperimentConfig::default_baseline(c.train));
  } else {
    c.baseline = ExperimentConfig::default_baseline(c.train);
  }
  if (const Json* e = r.find("evaluation")) c.evaluation = eval_options_from_json(*e, "evaluation");
  if (const Json* v = r.find("verification")) c.verification = verify::options_from_json(*v, "verification");
  if (const Json* s = r.find("sweep")) c.sweep = sweep_from_json(*s, "sweep");
  c.output_dir = r.string_or("output_dir", c.output_dir);
  r.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Building the ground truth.

struct World {
  Spaces spaces;
  PreferenceModel model;
  ContextPolicy ref;
};

inline World build_world(const ExperimentConfig& c) {
  const Spaces& s = c.spaces;
  PreferenceModel model;
  ContextPolicy ref;
  switch (c.model.type) {
    case ModelSpec::Type::kFixture: {
      auto f = fixture_prop1();
      require(s.num_contexts == 1 && s.num_responses == 4,
              "fixture preference model needs 1 context and 4 responses");
      model = f.model;
      ref = f.uniform_ref;
      break;
    }
    case ModelSpec::Type::kAntisymmetricRandom:
      model = antisymmetric_random_preference(s, c.model.seed, c.model.scale);
      break;
    case ModelSpec::Type::kBradleyTerry: {
      Matrix reward({s.num_contexts, s.num_responses});
      if (c.model.reward) {
        reward = *c.model.reward;
      } else {
        Rng rng(c.model.seed);
        for (double& v : reward.data()) v = rng.uniform(-c.model.scale, c.model.scale);
      }
      model = bt_preference(s, reward);
      break;
    }
  }
  check_compatible(s, model);
  if (c.model.type != ModelSpec::Type::kFixture || c.reference.type != ReferenceSpec::Type::kUniform) {
    switch (c.reference.type) {
      case ReferenceSpec::Type::kUniform: ref = uniform_policy(s.num_contexts, s.num_responses); break;
      case ReferenceSpec::Type::kRandom:
        ref = random_policy(s.num_contexts, s.num_responses, c.reference.seed, c.reference.floor);
        break;
      case ReferenceSpec::Type::kExplicit: ref = ContextPolicy(*c.reference.probs); break;
    }
  }
  check_compatible(s, ref);
  return {s, std::move(model), std::move(ref)};
}

// ---------------------------------------------------------------------------
// Evaluation.

struct NamedContextPolicy {
  std::string name;
  ContextPolicy policy;
};

// Value of each policy under each psi; cross policies use the full
// comparator-aware value.
struct PolicyTable {
  std::vector<std::string> names;
  std::vector<std::optional<ContextPolicy>> context;
  std::vector<std::optional<CrossPolicy>> cross;

  void add(std::string name, ContextPolicy p) {
    names.push_back(std::move(name));
    context.emplace_back(std::move(p));
    cross.emplace_back();
  }
  void add(std::string name, CrossPolicy p) {
    names.push_back(std::move(name));
    context.emplace_back();
    cross.emplace_back(std::move(p));
  }

  Json values(const World& w, const std::vector<PsiSpec>& psis) const {
    Json out = Json::object();
    for (const auto& psi : psis) {
      Json row = Json::object();
      for (std::size_t i = 0; i < names.size(); ++i)
        row[names[i]] = context[i]
                            ? value(*context[i], w.ref, w.model, psi, w.spaces.context_dist)
                            : value(*cross[i], w.ref, w.model, psi, w.spaces.context_dist);
      out[psi_label(psi)] = std::move(row);
    }
    return out;
  }
};

inline Json win_rate_matrix(const World& w, const std::vector<NamedContextPolicy>& policies) {
  Json names = Json::array(), matrix = Json::array();
  for (const auto& a : policies) {
    names.push_back(a.name);
    Json row = Json::array();
    for (const auto& b : policies)
      row.push_back(win_rate(a.policy, b.policy, w.model, w.spaces.context_dist));
    matrix.push_back(std::move(row));
  }
  return Json{{"policies", names}, {"matrix", matrix}};
}

inline Json to_json(const Metrics& m) {
  return Json{{"loss", m.loss}, {"accuracy", m.accuracy}, {"margin", m.margin}};
}

// ---------------------------------------------------------------------------
// Training pipeline.

inline ContextPolicy context_view(const PolicyParams& p) {
  require(p.kind() == PolicyKind::kTabularContext, "context_view needs a tabular-context policy");
  Matrix m({p.num_contexts(), p.num_responses()});
  for (std::size_t x = 0; x < p.num_contexts(); ++x) softmax(p.base(x), m.row(x));
  return ContextPolicy(std::move(m));
}

struct RunResult {
  PreferenceDataset dataset;
  TrainResult trained;
  std::optional<TrainResult> baseline;
  Json report;
  double value_trained = 0.0;   // first psi
  double value_baseline = 0.0;  // first psi; NaN without a baseline
  Metrics heldout;
  std::map<std::string, double> win_rate_vs_reference;
};

// Sample data, hold out 10%, train (and the baseline), then evaluate every
// policy exactly against the ground truth.
inline RunResult run_training(const ExperimentConfig& c) {
  const World w = build_world(c);
  const auto& rho = w.spaces.context_dist;
  RunResult out;
  out.dataset = sample_dataset(w.spaces, w.model, w.ref, c.dataset_size, c.dataset_seed);
  const auto split = split_holdout(out.dataset, c.dataset_seed);
  require(!split.train.empty(), "training split is empty");
  out.trained = train(c.train, split.train, w.ref, w.spaces);
  if (c.baseline) out.baseline = train(*c.baseline, split.train, w.ref, w.spaces);

  const auto& fitted = out.trained.params;
  const auto& eval_set = split.heldout.empty() ? split.train : split.heldout;
  out.heldout = metrics(fitted, c.train.loss, eval_set, w.ref, w.spaces);

  PolicyTable table;
  table.add("reference", w.ref);
  table.add("trained", to_cross_policy(fitted));
  std::vector<NamedContextPolicy> served{{"reference", w.ref}};
  for (auto mode : c.evaluation.deployments) {
    const bool ok = mode == DeployMode::kDropPrivileged
                        ? fitted.kind() == PolicyKind::kSharedLupi
                        : fitted.conditioning_capable();
    const std::string name = "deployed/" + to_string(mode);
    if (!ok) continue;
    auto dep = deploy(fitted, w.ref, mode);
    table.add(name, dep);
    served.push_back({name, std::move(dep)});
  }
  if (fitted.kind() == PolicyKind::kTabularContext) served.push_back({"trained", context_view(fitted)});
  const auto star = global_opt(w.model);
  table.add("global_opt", star);
  served.push_back({"global_opt/marginalize", [&] {
                      Matrix mix({w.spaces.num_contexts, w.spaces.num_responses}, 0.0);
                      for (std::size_t x = 0; x < w.spaces.num_contexts; ++x)
                        for (std::size_t cnd = 0; cnd < w.spaces.num_responses; ++cnd)
                          for (std::size_t y = 0; y < w.spaces.num_responses; ++y)
                            mix(x, y) += w.ref(x, cnd) * star(x, cnd, y);
                      return ContextPolicy(std::move(mix));
                    }()});
  std::vector<ContextPolicy> restricted;
  for (const auto& psi : c.evaluation.psis) {
    restricted.push_back(restricted_opt(w.model, psi, w.ref, rho));
    table.add("restricted_opt/" + psi_label(psi), restricted.back());
  }
  served.push_back({"restricted_opt/" + psi_label(c.evaluation.psis.front()), restricted.front()});
  if (out.baseline) {
    table.add("baseline", to_cross_policy(out.baseline->params));
    const auto& bp = out.baseline->params;
    ContextPolicy bdep = bp.kind() == PolicyKind::kTabularContext
                             ? context_view(bp)
                             : deploy(bp, w.ref, bp.kind() == PolicyKind::kSharedLupi
                                                     ? DeployMode::kDropPrivileged
                                                     : DeployMode::kMarginalize);
    served.push_back({"baseline", std::move(bdep)});
  }

  Json values = table.values(w, c.evaluation.psis);
  const std::string first = psi_label(c.evaluation.psis.front());
  out.value_trained = values[first]["trained"].get<double>();
  out.value_baseline = out.baseline ? values[first]["baseline"].get<double>() : std::nan("");

  double order_violation = 0.0;
  for (std::size_t i = 0; i < c.evaluation.psis.size(); ++i) {
    const auto label = psi_label(c.evaluation.psis[i]);
    order_violation = std::max(order_violation, values[label]["restricted_opt/" + label].get<double>() -
                                                    values[label]["global_opt"].get<double>());
  }

  const Json wr = win_rate_matrix(w, served);
  for (std::size_t i = 0; i < served.size(); ++i)
    out.win_rate_vs_reference[served[i].name] = wr["matrix"][i][0].get<double>();

  Json report = io::header("experiment_report");
  report["config"] = to_json(c);
  report["dataset"] = Json{{"n", out.dataset.size()},
                           {"seed", out.dataset.seed},
                           {"train_size", split.train.size()},
                           {"heldout_size", split.heldout.size()}};
  report["final_metrics"] = Json{{"train", to_json(Metrics{out.trained.curves.loss.back(),
                                                           out.trained.curves.accuracy.back(),
                                                           out.trained.curves.margin.back()})},
                                 {"heldout", to_json(out.heldout)}};
  if (out.baseline) {
    const auto& bc = out.baseline->curves;
    report["baseline_final_metrics"] =
        Json{{"train", to_json(Metrics{bc.loss.back(), bc.accuracy.back(), bc.margin.back()})},
             {"heldout", to_json(metrics(out.baseline->params, c.baseline->loss, eval_set, w.ref,
                                         w.spaces))}};
  }
  if (c.train.loss.conditioning == Conditioning::kBidirectional)
    report["notes"] = "bidirectional conditioning is evaluated with the cross formula";
  report["values"] = values;
  report["value_gap_vs_baseline"] =
      out.baseline ? Json(out.value_trained - out.value_baseline) : Json(nullptr);
  report["win_rates"] = wr;
  report["checks"] = Json::array(
      {Json{{"check_name", "global_opt_value_dominates_restricted_opt"},
            {"instances_tested", c.evaluation.psis.size()},
            {"max_violation", std::max(0.0, order_violation)},
            {"pass", order_violation <= 1e-12}}});
  out.report = std::move(report);
  return out;
}


// ---------------------------------------------------------------------------
// Evaluating stored policies.

// A policy file: policy_params, context_policy, or cross_policy JSON.
struct LoadedPolicy {
  std::string name;
  std::optional<ContextPolicy> context;
  std::optional<CrossPolicy> cross;
  ContextPolicy served;  // what a deployed system would sample from
};

// Policy used at deployment: comparator-free kinds as-is, shared-lupi drops
// the privileged head, tabular-cross marginalizes over the reference.
inline ContextPolicy served_policy(const PolicyParams& p, const ContextPolicy& ref) {
  switch (p.kind()) {
    case PolicyKind::kTabularContext: return context_view(p);
    case PolicyKind::kSharedLupi: return deploy(p, ref, DeployMode::kDropPrivileged);
    case PolicyKind::kTabularCross: return deploy(p, ref, DeployMode::kMarginalize);
  }
  return context_view(p);
}

inline LoadedPolicy load_policy(const std::string& name, const Json& j, const ContextPolicy& ref) {
  const std::string type = j.is_object() && j.contains("type") && j["type"].is_string()
                               ? j["type"].get<std::string>()
                               : std::string();
  LoadedPolicy out{name, std::nullopt, std::nullopt, ContextPolicy()};
  if (type == "policy_params") {
    const auto params = io::policy_params_from_json(j);
    require(params.num_contexts() == ref.num_contexts() && params.num_responses() == ref.num_responses(),
            "policy '" + name + "' does not match the configured spaces");
    out.cross = to_cross_policy(params);
    out.served = served_policy(params, ref);
  } else if (type == "context_policy") {
    out.context = io::context_policy_from_json(j);
    out.served = *out.context;
  } else if (type == "cross_policy") {
    out.cross = io::cross_policy_from_json(j);
    Matrix mix({ref.num_contexts(), ref.num_responses()}, 0.0);
    for (std::size_t x = 0; x < ref.num_contexts(); ++x)
      for (std::size_t c = 0; c < ref.num_responses(); ++c)
        for (std::size_t y = 0; y < ref.num_responses(); ++y)
          mix(x, y) += ref(x, c) * (*out.cross)(x, c, y);
    out.served = ContextPolicy(std::move(mix));
  } else {
    io::Reader::fail_at(name, "expected a policy_params, context_policy or cross_policy document");
  }
  check_compatible(Spaces::uniform(ref.num_contexts(), ref.num_responses()), out.served);
  return out;
}

struct Evaluation {
  Json report;
  std::string values_csv;
};

inline Evaluation evaluate_policies(const ExperimentConfig& c, const std::vector<LoadedPolicy>& policies) {
  const World w = build_world(c);
  PolicyTable table;
  std::vector<NamedContextPolicy> served{{"reference", w.ref}};
  table.add("reference", w.ref);
  for (const auto& p : policies) {
    check_compatible(w.spaces, p.served);
    if (p.context)
      table.add(p.name, *p.context);
    else
      table.add(p.name, *p.cross);
    served.push_back({p.name, p.served});
  }
  table.add("global_opt", global_opt(w.model));
  for (const auto& psi : c.evaluation.psis)
    table.add("restricted_opt/" + psi_label(psi),
              restricted_opt(w.model, psi, w.ref, w.spaces.context_dist));
  Evaluation e;
  e.report = io::header("evaluation");
  e.report["values"] = table.values(w, c.evaluation.psis);
  e.report["win_rates"] = win_rate_matrix(w, served);
  e.values_csv = "psi,policy,value\n";
  for (const auto& [label, row] : e.report["values"].items())
    for (const auto& [name, v] : row.items())
      e.values_csv += label + "," + name + "," + io::format_double(v.get<double>()) + "\n";
  return e;
}

// ---------------------------------------------------------------------------
// Verification report.

inline Json verify_report(const verify::Options& opt, const std::vector<verify::CheckResult>& checks) {
  Json j = io::header("verify_report");
  j["options"] = verify::to_json(opt);
  Json list = Json::array();
  bool ok = true;
  for (const auto& c : checks) {
    list.push_back(verify::to_json(c));
    ok = ok && c.pass;
  }
  j["checks"] = std::move(list);
  j["all_pass"] = ok;
  return j;
}

// ---------------------------------------------------------------------------
// Sweeps.

struct SweepCell {
  std::uint64_t seed = 0;
  std::optional<double> beta;
  std::optional<double> learning_rate;

  std::string key() const {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "seed-%06llu", static_cast<unsigned long long>(seed));
    std::string k = buf;
    if (beta) k += "_beta-" + io::format_double(*beta);
    if (learning_rate) k += "_lr-" + io::format_double(*learning_rate);
    return k;
  }
};

struct SweepRow {
  SweepCell cell;
  RunResult result;
};

inline std::vector<SweepCell> sweep_cells(const SweepSpec& s) {
  std::vector<SweepCell> cells;
  const std::vector<std::optional<double>> no_value{std::nullopt};
  auto opts = [&](const std::vector<double>& v) {
    if (v.empty()) return no_value;
    std::vector<std::optional<double>> out(v.begin(), v.end());
    return out;
  };
  for (auto seed : s.seeds)
    for (auto beta : opts(s.betas))
      for (auto lr : opts(s.learning_rates)) cells.push_back({seed, beta, lr});
  std::sort(cells.begin(), cells.end(),
            [](const SweepCell& a, const SweepCell& b) { return a.key() < b.key(); });
  return cells;
}

inline ExperimentConfig cell_config(const ExperimentConfig& base, const SweepCell& cell) {
  ExperimentConfig c = base;
  c.override_seed(cell.seed);
  auto apply = [&](TrainConfig& t) {
    if (cell.beta) {
      require(t.loss.beta.has_value(),
              "sweep over beta needs a method that takes beta (" + to_string(t.loss.method) + ")");
      t.loss.beta = *cell.beta;
    }
    if (cell.learning_rate) t.learning_rate = *cell.learning_rate;
  };
  apply(c.train);
  if (c.baseline && c.baseline->loss.beta) apply(*c.baseline);
  return c;
}

// Runs every cell, up to `jobs` at a time. Rows come back in cell-key order.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base, int jobs) {
  const auto cells = sweep_cells(base.sweep);
  std::vector<SweepRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        rows[i] = {cells[i], run_training(cell_config(base, cells[i]))};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out =
      "cell,seed,beta,learning_rate,value_trained,value_baseline,value_gap,heldout_accuracy,"
      "win_rate_trained_vs_reference\n";
  for (const auto& row : rows) {
    const auto& r = row.result;
    const auto cfg_beta = r.report["config"]["train"]["loss"].contains("beta")
                              ? io::format_double(r.report["config"]["train"]["loss"]["beta"].get<double>())
                              : std::string();
    const double lr = r.report["config"]["train"]["learning_rate"].get<double>();
    double wr = std::nan("");
    for (const char* name : {"deployed/marginalize", "deployed/drop-privileged", "trained"})
      if (auto it = r.win_rate_vs_reference.find(name); it != r.win_rate_vs_reference.end()) {
        wr = it->second;
        break;
      }
    out += row.cell.key() + "," + std::to_string(row.cell.seed) + "," + cfg_beta + "," +
           io::format_double(lr) + "," + io::format_double(r.value_trained) + "," +
           io::format_double(r.value_baseline) + "," +
           io::format_double(r.value_trained - r.value_baseline) + "," +
           io::format_double(r.heldout.accuracy) + "," + io::format_double(wr) + "\n";
  }
  return out;
}

inline Json sweep_summary(const std::vector<SweepRow>& rows) {
  double sum = 0.0;
  std::size_t wins = 0, counted = 0;
  for (const auto& row : rows) {
    const double gap = row.result.value_trained - row.result.value_baseline;
    if (std::isnan(gap)) continue;
    sum += gap;
    ++counted;
    if (gap > 0.0) ++wins;
  }
  Json j = io::header("sweep_summary");
  j["cells"] = rows.size();
  j["mean_value_gap"] = counted ? Json(sum / static_cast<double>(counted)) : Json(nullptr);
  j["cells_with_positive_gap"] = wins;
  return j;
}

// ---------------------------------------------------------------------------
// Output files.

inline void write_training_outputs(const std::filesystem::path& dir, const RunResult& r) {
  std::filesystem::create_directories(dir);
  io::write_json_file((dir / "params.json").string(), io::to_json(r.trained.params));
  io::write_text_file((dir / "curves.csv").string(), io::curves_csv(r.trained.curves));
  io::write_json_file((dir / "report.json").string(), r.report);
  if (r.baseline) {
    io::write_json_file((dir / "baseline_params.json").string(), io::to_json(r.baseline->params));
    io::write_text_file((dir / "baseline_curves.csv").string(), io::curves_csv(r.baseline->curves));
  }
}

}  // namespace inspo::experiment
