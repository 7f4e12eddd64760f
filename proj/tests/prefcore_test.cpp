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
#include <map>
#include <utility>

#include "inspo/prefcore.hpp"

namespace inspo {
namespace {

Matrix reward_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix r({rows.size(), rows.begin()->size()});
  std::size_t x = 0;
  for (const auto& row : rows) {
    std::size_t y = 0;
    for (double v : row) r(x, y++) = v;
    ++x;
  }
  return r;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an inspo::Error";
  return ErrorKind::kIo;
}

TEST(Spaces, ValidateRejectsBadDistribution) {
  Spaces s = Spaces::uniform(2, 3);
  EXPECT_NO_THROW(s.validate());
  s.context_dist = {0.7, 0.4};
  EXPECT_THROW(s.validate(), Error);
  s = Spaces::uniform(2, 3);
  s.lengths = {1, 0, 2};
  EXPECT_THROW(s.validate(), Error);
  EXPECT_THROW(Spaces::uniform(1, 1).validate(), Error);
}

TEST(PreferenceModel, RejectsComplementViolation) {
  Cube p({1, 2, 2}, 0.5);
  p(0, 0, 1) = 0.7;
  p(0, 1, 0) = 0.4;
  EXPECT_EQ(kind_of([&] { PreferenceModel m(p); }), ErrorKind::kInvalidInput);
}

TEST(PreferenceModel, RejectsNonHalfDiagonal) {
  Cube p({1, 2, 2}, 0.5);
  p(0, 0, 0) = 0.6;
  EXPECT_THROW(PreferenceModel{p}, Error);
}

TEST(PreferenceModel, RejectsOutOfRange) {
  Cube p({1, 2, 2}, 0.5);
  p(0, 0, 1) = 1.2;
  p(0, 1, 0) = -0.2;
  EXPECT_THROW(PreferenceModel{p}, Error);
}

TEST(BtPreference, ZeroRewardsGiveIndifference) {
  const auto s = Spaces::uniform(1, 3);
  const auto p = bt_preference(s, reward_rows({{0, 0, 0}}));
  for (double v : p.probs().data()) EXPECT_EQ(v, 0.5);
}

TEST(BtPreference, LogThreeGivesThreeQuarters) {
  const auto p = bt_preference(Spaces::uniform(1, 2), reward_rows({{std::log(3.0), 0.0}}));
  EXPECT_NEAR(p(0, 0, 1), 0.75, 1e-15);
  EXPECT_NEAR(p(0, 1, 0), 0.25, 1e-15);
}

TEST(BtPreference, LogNineGivesNineTenths) {
  const auto p = bt_preference(Spaces::uniform(1, 2), reward_rows({{2.1972246, 0.0}}));
  EXPECT_NEAR(p(0, 0, 1), 0.9, 1e-8);
}

TEST(BtPreference, TranslationInvariantPerContext) {
  const auto s = Spaces::uniform(2, 4);
  const auto r = reward_rows({{0.3, -1.2, 2.0, 0.1}, {1.0, 1.5, -0.5, 0.0}});
  auto shifted = r;
  for (std::size_t y = 0; y < 4; ++y) {
    shifted(0, y) += 5.0;
    shifted(1, y) -= 2.5;
  }
  const auto a = bt_preference(s, r), b = bt_preference(s, shifted);
  EXPECT_LE(max_abs_diff(a.probs().data(), b.probs().data()), 1e-12);
}

TEST(BtPreference, NonFiniteRewardIsInvalidInput) {
  EXPECT_EQ(kind_of([] {
              bt_preference(Spaces::uniform(1, 2), reward_rows({{NAN, 0.0}}));
            }),
            ErrorKind::kInvalidInput);
}

TEST(AntisymmetricRandom, ZeroScaleIsIndifferent) {
  const auto p = antisymmetric_random_preference(Spaces::uniform(2, 3), 7, 0.0);
  for (double v : p.probs().data()) EXPECT_EQ(v, 0.5);
}

TEST(AntisymmetricRandom, ComplementExactForManySeeds) {
  const auto s = Spaces::uniform(3, 5);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto p = antisymmetric_random_preference(s, seed, 3.0);
    for (std::size_t x = 0; x < 3; ++x)
      for (std::size_t y = 0; y < 5; ++y)
        for (std::size_t y2 = 0; y2 < 5; ++y2)
          ASSERT_NEAR(p(x, y, y2) + p(x, y2, y), 1.0, 1e-15);
  }
}

TEST(AntisymmetricRandom, DeterministicAndMatchesIndependentGenerator) {
  const auto s = Spaces::uniform(2, 3);
  const auto a = antisymmetric_random_preference(s, 7, 1.0);
  const auto b = antisymmetric_random_preference(s, 7, 1.0);
  EXPECT_EQ(a.probs(), b.probs());

  // Re-run the documented draw order: s row-major over (x, y, y'), each
  // uniform in [-scale, scale] from the 53-bit mantissa of mt19937_64.
  std::mt19937_64 eng(7);
  double raw[2][3][3];
  for (auto& plane : raw)
    for (auto& row : plane)
      for (double& v : row) v = -1.0 + 2.0 * (static_cast<double>(eng() >> 11) * 0x1.0p-53);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 3; ++y)
      for (std::size_t y2 = 0; y2 < 3; ++y2) {
        const double asym = 0.5 * (raw[x][y][y2] - raw[x][y2][y]);
        EXPECT_DOUBLE_EQ(a(x, y, y2), y == y2 ? 0.5 : 1.0 / (1.0 + std::exp(-2.0 * asym)));
      }
}

TEST(AntisymmetricRandom, DifferentSeedsDiffer) {
  const auto s = Spaces::uniform(2, 3);
  EXPECT_NE(antisymmetric_random_preference(s, 1, 1.0).probs(),
            antisymmetric_random_preference(s, 2, 1.0).probs());
}

TEST(Fixture, ListedEntries) {
  using F = Prop1Fixture;
  const auto f = fixture_prop1();
  EXPECT_EQ(f.model(0, F::kCandidate1, F::kRefA), 0.9);
  EXPECT_EQ(f.model(0, F::kCandidate1, F::kRefB), 0.2);
  EXPECT_EQ(f.model(0, F::kCandidate2, F::kRefA), 0.56);
  EXPECT_EQ(f.model(0, F::kCandidate2, F::kRefB), 0.56);
  EXPECT_NEAR(f.model(0, F::kRefA, F::kCandidate1), 0.1, 1e-15);
  EXPECT_EQ(f.model(0, F::kCandidate1, F::kCandidate2), 0.5);
  EXPECT_EQ(f.skewed_ref(0, F::kRefA), 0.9);
  EXPECT_EQ(f.skewed_ref(0, F::kRefB), 0.1);
  EXPECT_EQ(f.uniform_ref(0, F::kRefA), 0.5);
  EXPECT_EQ(f.uniform_ref(0, F::kCandidate1), 0.0);
  ASSERT_EQ(f.psis.size(), 2u);
}

TEST(Policies, RandomPolicyHasFloorAndNormalizes) {
  const auto p = random_policy(3, 4, 11, 0.05);
  for (std::size_t x = 0; x < 3; ++x) {
    double sum = 0.0;
    for (double v : p.row(x)) {
      EXPECT_GT(v, 0.0);
      sum += v;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Policies, ContextPolicyRejectsUnnormalizedRows) {
  Matrix m({1, 2}, 0.6);
  EXPECT_THROW(ContextPolicy{m}, Error);
}

TEST(SampleDataset, DeterministicPerSeed) {
  const auto s = Spaces::uniform(2, 4);
  const auto p = antisymmetric_random_preference(s, 3, 1.0);
  const auto ref = uniform_policy(2, 4);
  const auto a = sample_dataset(s, p, ref, 500, 17);
  const auto b = sample_dataset(s, p, ref, 500, 17);
  EXPECT_EQ(a.pairs, b.pairs);
  EXPECT_EQ(a.seed, 17u);
  EXPECT_NE(a.pairs, sample_dataset(s, p, ref, 500, 18).pairs);
  for (const auto& pair : a.pairs) EXPECT_NE(pair.y_w, pair.y_l);
}

TEST(SampleDataset, IndifferenceGivesFairCoin) {
  const auto s = Spaces::uniform(1, 3);
  const auto p = bt_preference(s, reward_rows({{0, 0, 0}}));
  const auto data = sample_dataset(s, p, uniform_policy(1, 3), 10000, 5);
  std::map<std::pair<std::size_t, std::size_t>, int> wins, total;
  for (const auto& pr : data.pairs) {
    const auto key = std::minmax(pr.y_w, pr.y_l);
    ++total[key];
    if (pr.y_w == key.first) ++wins[key];
  }
  ASSERT_EQ(total.size(), 3u);
  for (const auto& [key, n] : total) {
    const double sigma = std::sqrt(0.25 / n);
    EXPECT_NEAR(static_cast<double>(wins[key]) / n, 0.5, 3.0 * sigma);
  }
}

TEST(SampleDataset, BradleyTerryWinRateNearNinety) {
  const auto s = Spaces::uniform(1, 2);
  const auto p = bt_preference(s, reward_rows({{std::log(9.0), 0.0}}));
  const auto data = sample_dataset(s, p, uniform_policy(1, 2), 10000, 8);
  int wins = 0;
  for (const auto& pr : data.pairs) wins += pr.y_w == 0 ? 1 : 0;
  EXPECT_NEAR(wins / 10000.0, 0.9, 4.0 * std::sqrt(0.09 / 10000.0));
}

TEST(SampleDataset, FrequenciesConvergeToPreferenceEntries) {
  const auto s = Spaces::uniform(1, 4);
  const auto p = antisymmetric_random_preference(s, 21, 2.0);
  const auto data = sample_dataset(s, p, uniform_policy(1, 4), 10000, 2);
  std::map<std::pair<std::size_t, std::size_t>, int> wins, total;
  for (const auto& pr : data.pairs) {
    const auto key = std::minmax(pr.y_w, pr.y_l);
    ++total[key];
    if (pr.y_w == key.first) ++wins[key];
  }
  for (const auto& [key, n] : total) {
    const double q = p(0, key.first, key.second);
    EXPECT_NEAR(static_cast<double>(wins[key]) / n, q, 4.0 * std::sqrt(q * (1 - q) / n));
  }
}

TEST(SampleDataset, ContextDistributionRespected) {
  Spaces s = Spaces::uniform(2, 3);
  s.context_dist = {0.0, 1.0};
  const auto p = antisymmetric_random_preference(s, 1, 1.0);
  const auto data = sample_dataset(s, p, uniform_policy(2, 3), 200, 4);
  for (const auto& pr : data.pairs) EXPECT_EQ(pr.x, 1u);
}

TEST(SampleDataset, DegenerateReferenceNamesContext) {
  const auto s = Spaces::uniform(2, 3);
  const auto p = antisymmetric_random_preference(s, 1, 1.0);
  Matrix ref({2, 3}, 1.0 / 3.0);
  ref(1, 0) = 1.0;
  ref(1, 1) = 0.0;
  ref(1, 2) = 0.0;
  try {
    sample_dataset(s, p, ContextPolicy(ref), 10, 1);
    FAIL() << "expected generation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kGeneration);
    EXPECT_NE(std::string(e.what()).find("context 1"), std::string::npos) << e.what();
  }
}

TEST(SampleDataset, ZeroSizeRejected) {
  const auto s = Spaces::uniform(1, 2);
  const auto p = antisymmetric_random_preference(s, 1, 1.0);
  EXPECT_THROW(sample_dataset(s, p, uniform_policy(1, 2), 0, 1), Error);
}

}  // namespace
}  // namespace inspo
