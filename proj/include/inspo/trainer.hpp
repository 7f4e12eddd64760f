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
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "inspo/error.hpp"
#include "inspo/losses.hpp"
#include "inspo/policy.hpp"
#include "inspo/prefcore.hpp"
#include "inspo/random.hpp"

namespace inspo {

struct OptimizerSpec {
  enum class Type { kSgd, kSgdMomentum, kAdam };
  Type type = Type::kSgd;
  double momentum = 0.9;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static OptimizerSpec sgd() { return {}; }
  static OptimizerSpec sgd_momentum(double mu) { return {Type::kSgdMomentum, mu}; }
  static OptimizerSpec adam(double b1 = 0.9, double b2 = 0.999, double eps = 1e-8) {
    return {Type::kAdam, 0.9, b1, b2, eps};
  }

  void validate() const {
    if (type == Type::kSgdMomentum)
      require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
    if (type == Type::kAdam) {
      require(beta1 >= 0.0 && beta1 < 1.0, "adam beta1 must lie in [0, 1)");
      require(beta2 >= 0.0 && beta2 < 1.0, "adam beta2 must lie in [0, 1)");
      require(epsilon > 0.0, "adam epsilon must be > 0");
    }
  }

  friend bool operator==(const OptimizerSpec&, const OptimizerSpec&) = default;
};

inline std::string to_string(OptimizerSpec::Type t) {
  switch (t) {
    case OptimizerSpec::Type::kSgd: return "sgd";
    case OptimizerSpec::Type::kSgdMomentum: return "sgd-momentum";
    case OptimizerSpec::Type::kAdam: return "adam";
  }
  return "unknown";
}

struct TrainConfig {
  LossSpec loss = LossSpec::dpo(0.5, Conditioning::kCross);
  PolicyKind policy_kind = PolicyKind::kTabularCross;
  int epochs = 3;
  std::size_t batch_size = 1;
  double learning_rate = 0.5;  // eta; zero leaves the parameters untouched
  OptimizerSpec optimizer;
  std::uint64_t shuffle_seed = 0;
  bool reference_init = true;
  long eval_every = 50;

  void validate() const {
    loss.validate();
    check_compatible(loss, policy_kind);
    require(epochs >= 1, "epochs must be >= 1");
    require(batch_size >= 1, "batch_size must be >= 1");
    require(learning_rate >= 0.0 && std::isfinite(learning_rate),
            "learning rate must be finite and >= 0");
    require(eval_every >= 1, "eval_every must be >= 1");
    optimizer.validate();
  }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

struct Metrics {
  double loss = 0.0;
  double accuracy = 0.0;  // fraction of pairs with margin strictly > 0
  double margin = 0.0;
};

struct TrainingCurves {
  std::vector<long> step;
  std::vector<double> loss;
  std::vector<double> accuracy;
  std::vector<double> margin;

  std::size_t size() const noexcept { return step.size(); }

  void push(long s, const Metrics& m) {
    step.push_back(s);
    loss.push_back(m.loss);
    accuracy.push_back(m.accuracy);
    margin.push_back(m.margin);
  }

  friend bool operator==(const TrainingCurves&, const TrainingCurves&) = default;
};

struct TrainResult {
  PolicyParams params;
  TrainingCurves curves;
};

// Exact dataset means of the per-pair loss, margin > 0 indicator and margin.
inline Metrics metrics(const PolicyParams& params, const LossSpec& spec,
                       std::span<const PreferencePair> data, const ContextPolicy& ref,
                       const Spaces& spaces) {
  require(!data.empty(), "metrics: empty dataset");
  Metrics out;
  for (const auto& pair : data) {
    const auto e = evaluate_sample(spec, params, ref, &spaces, pair);
    out.loss += e.loss;
    out.margin += e.margin;
    out.accuracy += e.margin > 0.0 ? 1.0 : 0.0;
  }
  const double n = static_cast<double>(data.size());
  out.loss /= n;
  out.accuracy /= n;
  out.margin /= n;
  return out;
}

inline Metrics metrics(const PolicyParams& params, const LossSpec& spec,
                       const PreferenceDataset& data, const ContextPolicy& ref,
                       const Spaces& spaces) {
  return metrics(params, spec, std::span<const PreferencePair>(data.pairs), ref, spaces);
}

struct DatasetSplit {
  PreferenceDataset train;
  PreferenceDataset heldout;
};

// Shuffle with `seed`, then the last floor(n / 10) pairs become held out.
inline DatasetSplit split_holdout(const PreferenceDataset& data, std::uint64_t seed) {
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t held = data.size() / 10;
  const std::size_t kept = data.size() - held;
  DatasetSplit split{{data.seed, {}}, {data.seed, {}}};
  split.train.pairs.reserve(kept);
  split.heldout.pairs.reserve(held);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < kept ? split.train : split.heldout).pairs.push_back(data.pairs[order[i]]);
  return split;
}

namespace detail {

class Optimizer {
 public:
  Optimizer(const OptimizerSpec& spec, double lr, std::size_t n)
      : spec_(spec), lr_(lr), first_(n, 0.0), second_(n, 0.0) {}

  // Descent step on theta along grad.
  void step(std::span<double> theta, std::span<const double> grad) {
    ++t_;
    switch (spec_.type) {
      case OptimizerSpec::Type::kSgd:
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr_ * grad[i];
        return;
      case OptimizerSpec::Type::kSgdMomentum:
        for (std::size_t i = 0; i < theta.size(); ++i) {
          first_[i] = spec_.momentum * first_[i] + grad[i];
          theta[i] -= lr_ * first_[i];
        }
        return;
      case OptimizerSpec::Type::kAdam: {
        const double c1 = 1.0 - std::pow(spec_.beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(spec_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < theta.size(); ++i) {
          first_[i] = spec_.beta1 * first_[i] + (1.0 - spec_.beta1) * grad[i];
          second_[i] = spec_.beta2 * second_[i] + (1.0 - spec_.beta2) * grad[i] * grad[i];
          theta[i] -= lr_ * (first_[i] / c1) / (std::sqrt(second_[i] / c2) + spec_.epsilon);
        }
        return;
      }
    }
  }

 private:
  OptimizerSpec spec_;
  double lr_;
  long t_ = 0;
  std::vector<double> first_;
  std::vector<double> second_;
};

}  // namespace detail

// Mini-batch training of the chosen loss. Metrics over `data` are logged at
// step 0, every `eval_every` steps, and after the final step.
inline TrainResult train(const TrainConfig& config, const PreferenceDataset& data,
                         const ContextPolicy& ref, const Spaces& spaces) {
  config.validate();
  require(!data.empty(), "train: dataset is empty");
  const std::size_t m = spaces.num_contexts, k = spaces.num_responses;
  require(ref.num_contexts() == m && ref.num_responses() == k,
          "train: reference shape does not match spaces");

  PolicyParams params = config.reference_init
                            ? PolicyParams::reference_init(config.policy_kind, ref)
                            : PolicyParams(config.policy_kind, m, k);
  TrainingCurves curves;
  curves.push(0, metrics(params, config.loss, data, ref, spaces));

  detail::Optimizer opt(config.optimizer, config.learning_rate, params.theta().size());
  Rng rng(config.shuffle_seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<PreferencePair> batch;
  batch.reserve(config.batch_size);

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(data.pairs[order[i]]);
      double loss = 0.0;
      const auto grad = batch_grad(config.loss, params, ref, &spaces, batch, &loss);
      if (!std::isfinite(loss))
        throw DivergedError(step + 1, "training diverged: non-finite loss at step " +
                                          std::to_string(step + 1));
      opt.step(params.theta(), grad.theta());
      ++step;
      for (double v : params.theta())
        if (!std::isfinite(v))
          throw DivergedError(step, "training diverged: non-finite parameter at step " +
                                        std::to_string(step));
      if (step % config.eval_every == 0)
        curves.push(step, metrics(params, config.loss, data, ref, spaces));
    }
  }
  if (curves.step.back() != step) curves.push(step, metrics(params, config.loss, data, ref, spaces));
  return {std::move(params), std::move(curves)};
}

// E_{x ~ rho, y_a ~ a, y_b ~ b} P[x][y_a][y_b].
inline double win_rate(const ContextPolicy& a, const ContextPolicy& b,
                       const PreferenceModel& pref, std::span<const double> rho) {
  const std::size_t m = pref.num_contexts(), k = pref.num_responses();
  require(a.num_contexts() == m && a.num_responses() == k && b.num_contexts() == m &&
              b.num_responses() == k && rho.size() == m,
          "win_rate: shape mismatch");
  double total = 0.0;
  for (std::size_t x = 0; x < m; ++x) {
    double acc = 0.0;
    for (std::size_t ya = 0; ya < k; ++ya)
      for (std::size_t yb = 0; yb < k; ++yb) acc += a(x, ya) * b(x, yb) * pref(x, ya, yb);
    total += rho[x] * acc;
  }
  return total;
}

}  // namespace inspo
