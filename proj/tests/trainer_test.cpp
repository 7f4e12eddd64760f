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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "inspo/objective.hpp"
#include "inspo/trainer.hpp"

namespace inspo {
namespace {

struct SeparableWorld {
  Spaces spaces = Spaces::uniform(3, 4);
  PreferenceModel model;
  ContextPolicy ref = uniform_policy(3, 4);

  SeparableWorld() {
    Matrix r({3, 4});
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 4; ++y) r(x, y) = std::log(9.0) * static_cast<double>((x + y) % 4);
    model = bt_preference(spaces, r);
  }
};

TrainConfig base_config() {
  TrainConfig c;
  c.loss = LossSpec::dpo(0.5, Conditioning::kCross);
  c.policy_kind = PolicyKind::kTabularCross;
  c.epochs = 1;
  c.batch_size = 16;
  c.learning_rate = 0.5;
  c.eval_every = 10;
  return c;
}

TEST(TrainConfig, ValidateRules) {
  auto c = base_config();
  EXPECT_NO_THROW(c.validate());
  c.policy_kind = PolicyKind::kTabularContext;
  EXPECT_THROW(c.validate(), Error);
  c = base_config();
  c.epochs = 0;
  EXPECT_THROW(c.validate(), Error);
  c = base_config();
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), Error);
  c = base_config();
  c.optimizer = OptimizerSpec::sgd_momentum(1.0);
  EXPECT_THROW(c.validate(), Error);
  c.optimizer = OptimizerSpec::adam(0.9, 1.0);
  EXPECT_THROW(c.validate(), Error);
}

TEST(Train, ZeroLearningRateLeavesParamsAndCurvesFlat) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 400, 1);
  auto c = base_config();
  c.learning_rate = 0.0;
  const auto r = train(c, data, w.ref, w.spaces);
  const auto init = PolicyParams::reference_init(c.policy_kind, w.ref);
  EXPECT_TRUE(std::equal(r.params.theta().begin(), r.params.theta().end(), init.theta().begin()));
  for (std::size_t i = 0; i < r.curves.size(); ++i) {
    EXPECT_EQ(r.curves.loss[i], r.curves.loss[0]);
    EXPECT_EQ(r.curves.accuracy[i], r.curves.accuracy[0]);
  }
}

TEST(Train, LoggingCadence) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 400, 1);
  auto c = base_config();
  c.eval_every = 7;
  const auto r = train(c, data, w.ref, w.spaces);
  // 400 pairs / batch 16 = 25 steps: logged at 0, 7, 14, 21, 25.
  EXPECT_EQ(r.curves.step, (std::vector<long>{0, 7, 14, 21, 25}));
  EXPECT_EQ(r.curves.loss.size(), r.curves.step.size());
  EXPECT_EQ(r.curves.margin.size(), r.curves.step.size());
}

TEST(Train, Deterministic) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 800, 2);
  auto c = base_config();
  c.epochs = 2;
  c.optimizer = OptimizerSpec::adam();
  c.learning_rate = 0.05;
  const auto a = train(c, data, w.ref, w.spaces);
  const auto b = train(c, data, w.ref, w.spaces);
  EXPECT_EQ(a.curves, b.curves);
  EXPECT_TRUE(std::equal(a.params.theta().begin(), a.params.theta().end(), b.params.theta().begin()));
  c.shuffle_seed = 99;
  EXPECT_NE(train(c, data, w.ref, w.spaces).curves, a.curves);
}

TEST(Train, AccuracyImprovesOnSeparableData) {
  SeparableWorld w;
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto data = sample_dataset(w.spaces, w.model, w.ref, 5000, seed);
    auto c = base_config();
    c.loss = LossSpec::dpo(0.5);
    c.policy_kind = PolicyKind::kTabularContext;
    c.epochs = 3;
    c.shuffle_seed = seed;
    const auto r = train(c, data, w.ref, w.spaces);
    EXPECT_GE(r.curves.accuracy.back(), r.curves.accuracy.front());
    EXPECT_GE(r.curves.accuracy.back(), 0.85) << "seed " << seed;
  }
}

TEST(Train, EveryOptimizerLowersLoss) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 1000, 4);
  for (const auto& [opt, lr] : {std::pair{OptimizerSpec::sgd(), 0.5},
                                std::pair{OptimizerSpec::sgd_momentum(0.9), 0.05},
                                std::pair{OptimizerSpec::adam(), 0.05}}) {
    auto c = base_config();
    c.optimizer = opt;
    c.learning_rate = lr;
    const auto r = train(c, data, w.ref, w.spaces);
    EXPECT_LT(r.curves.loss.back(), r.curves.loss.front()) << to_string(opt.type);
  }
}

TEST(Train, ZeroInitStartsUniform) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 100, 5);
  auto c = base_config();
  c.reference_init = false;
  c.learning_rate = 0.0;
  const auto r = train(c, data, w.ref, w.spaces);
  for (double v : r.params.theta()) EXPECT_EQ(v, 0.0);
}

TEST(Train, DivergenceReportsStep) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 200, 6);
  auto c = base_config();
  c.loss = LossSpec::ipo(0.5, Conditioning::kCross);
  c.learning_rate = 1e300;
  try {
    train(c, data, w.ref, w.spaces);
    FAIL() << "expected divergence";
  } catch (const DivergedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDiverged);
    EXPECT_GE(e.step(), 1);
  }
}

TEST(Train, IncompatibleKindRejected) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 50, 7);
  auto c = base_config();
  c.loss = LossSpec::dpo(0.5);
  try {
    train(c, data, w.ref, w.spaces);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(Metrics, ReferenceInitHasZeroAccuracy) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 300, 8);
  const auto p = PolicyParams::reference_init(PolicyKind::kTabularContext, w.ref);
  const auto m = metrics(p, LossSpec::dpo(0.5), data, w.ref, w.spaces);
  EXPECT_NEAR(m.loss, std::log(2.0), 1e-12);
  EXPECT_EQ(m.accuracy, 0.0);
  EXPECT_EQ(m.margin, 0.0);
}

TEST(Metrics, PerfectSeparationHasFullAccuracy) {
  SeparableWorld w;
  auto data = sample_dataset(w.spaces, w.model, w.ref, 300, 9);
  // Relabel so the higher-reward response always wins.
  auto reward = [](const PreferencePair& p, std::size_t y) { return (p.x + y) % 4; };
  for (auto& pair : data.pairs)
    if (reward(pair, pair.y_w) < reward(pair, pair.y_l)) std::swap(pair.y_w, pair.y_l);
  PolicyParams p(PolicyKind::kTabularCross, 3, 4);
  for (const auto& pair : data.pairs) p.cross(pair.x, pair.y_l)[pair.y_w] = 10.0;
  const auto m = metrics(p, LossSpec::dpo(0.5, Conditioning::kCross), data, w.ref, w.spaces);
  EXPECT_EQ(m.accuracy, 1.0);
}

TEST(Split, HoldsOutLastTenth) {
  SeparableWorld w;
  const auto data = sample_dataset(w.spaces, w.model, w.ref, 1005, 10);
  const auto s = split_holdout(data, 3);
  EXPECT_EQ(s.heldout.size(), 100u);
  EXPECT_EQ(s.train.size(), 905u);
  const auto again = split_holdout(data, 3);
  EXPECT_EQ(s.heldout.pairs, again.heldout.pairs);
  EXPECT_NE(split_holdout(data, 4).heldout.pairs, s.heldout.pairs);
}

TEST(WinRate, SelfIsHalf) {
  const auto spaces = Spaces::uniform(2, 4);
  const auto p = antisymmetric_random_preference(spaces, 3, 2.0);
  const auto a = random_policy(2, 4, 1);
  EXPECT_NEAR(win_rate(a, a, p, spaces.context_dist), 0.5, 1e-12);
}

TEST(WinRate, BestResponseAgainstUniform) {
  const auto spaces = Spaces::uniform(1, 2);
  Matrix r({1, 2});
  r(0, 0) = std::log(9.0);
  const auto p = bt_preference(spaces, r);
  const std::vector<std::size_t> best{0};
  EXPECT_NEAR(win_rate(deterministic_policy(2, best), uniform_policy(1, 2), p, spaces.context_dist),
              0.7, 1e-12);
}

TEST(WinRate, Antisymmetric) {
  const auto spaces = Spaces::uniform(3, 5);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto p = antisymmetric_random_preference(spaces, seed, 2.0);
    const auto a = random_policy(3, 5, seed + 100), b = random_policy(3, 5, seed + 200);
    EXPECT_NEAR(win_rate(a, b, p, spaces.context_dist) + win_rate(b, a, p, spaces.context_dist), 1.0,
                1e-12);
  }
}

}  // namespace
}  // namespace inspo
