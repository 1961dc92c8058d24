// Copyright 2026 The regtrap Authors
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

#include <numeric>

#include "regtrap/population.hpp"
#include "support.hpp"

namespace regtrap {
namespace {

constexpr const char* kHeader = "id,tau,mu_abil,b0,sigma_stress,e_max,max_final_backlog,weight\n";

TEST(Archetypes, StrategicRowIsAccepted) {
  const auto a = parse_archetypes(std::string(kHeader) + "PSICO_01,2,0.78,0.85,0.05,14,6,1\n", "t");
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0].tau, 2);
  EXPECT_EQ(horizon_label(a[0].tau), "Strategic");
  EXPECT_EQ(a[0].max_final_backlog, 6);
}

TEST(Archetypes, TauThreeIsOutOfRange) {
  try {
    parse_archetypes(std::string(kHeader) + "X,3,0.5,0.6,0.1,10,2,1\n", "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParameterOutOfRange);
  }
}

TEST(Archetypes, WeightsMustSumToOne) {
  try {
    parse_archetypes(std::string(kHeader) + "X,0,0.5,0.6,0.1,10,2,0.49\nY,0,0.5,0.6,0.1,10,2,0.49\n", "t");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WeightsDoNotSumToOne);
  }
}

TEST(Archetypes, CanonicalTextRoundTrips) {
  const auto& a = test::reference_archetypes();
  const std::string text = write_archetypes(a);
  EXPECT_EQ(write_archetypes(parse_archetypes(text, "rt")), text);
}

TEST(Apportion, EvenSplit) {
  EXPECT_EQ(apportion({0.5, 0.5}, 4, {"a", "b"}), (std::vector<std::size_t>{2, 2}));
}

TEST(Apportion, RemainderGoesByFractionThenId) {
  const double t = 1.0 / 3.0;
  EXPECT_EQ(apportion({t, t, t}, 4, {"a", "b", "c"}), (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(apportion({t, t, t}, 4, {"c", "a", "b"}), (std::vector<std::size_t>{1, 2, 1}));
}

TEST(Apportion, ReferenceCohortCounts) {
  const auto& arch = test::reference_archetypes();
  std::vector<double> w;
  std::vector<std::string> ids;
  for (const auto& a : arch) {
    w.push_back(a.weight);
    ids.push_back(a.id);
  }
  const std::vector<std::size_t> expected{109, 118, 106, 97, 101, 87, 97, 102, 109, 97, 101, 110, 109};
  EXPECT_EQ(apportion(w, 1343, ids), expected);
}

TEST(Population, SpawnIsContiguousByArchetype) {
  const std::vector<Archetype> arch{test::archetype("a", 0, 0.5, 0.6, 0.1, 10, 2, 0.25),
                                    test::archetype("b", 2, 0.7, 0.8, 0.1, 10, 2, 0.75)};
  const auto agents = spawn_population(arch, 8, 5);
  ASSERT_EQ(agents.size(), 8u);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    EXPECT_EQ(agents[i].agent_id, i);
    EXPECT_EQ(agents[i].archetype, i < 2 ? 0u : 1u);
    EXPECT_DOUBLE_EQ(agents[i].belonging, i < 2 ? 0.6 : 0.8);
    EXPECT_DOUBLE_EQ(agents[i].stress, 0.0);
    EXPECT_EQ(agents[i].statuses.size(), 5u);
  }
}

TEST(Ability, CenterAndClamp) {
  EXPECT_DOUBLE_EQ(ability_from_draw(0.78, 0.1, 0.0), 0.78);
  EXPECT_DOUBLE_EQ(ability_from_draw(0.05, 0.1, -3.0), 0.0);
  EXPECT_DOUBLE_EQ(ability_from_draw(0.95, 0.1, 3.0), 1.0);
}

TEST(Ability, SampleMeanMatchesCenter) {
  Rng rng(12345);
  const auto a = test::archetype("x", 0, 0.42);
  double s = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += sample_ability(a, rng);
  EXPECT_NEAR(s / n, 0.42, 0.002);
}

TEST(EventLog, PhasesMustNotGoBackwards) {
  EventLog log;
  log.append({3, EventType::Enrolled, 0});
  EXPECT_THROW(log.append({2, EventType::Enrolled, 1}), Error);
  log.append({3, EventType::Expired, 0});
  log.append({4, EventType::ExamFailed, 1});
  EXPECT_EQ(log.expiry_count(), 1);
  EXPECT_EQ(log.failures_by_course(2), (std::vector<int>{0, 1}));
}

TEST(Rng, SubstreamsAreReproducibleAndDistinct) {
  Rng a = Rng::substream(1, 0), b = Rng::substream(1, 0), c = Rng::substream(1, 1),
      d = Rng::substream(2, 0);
  const double x = a.uniform();
  EXPECT_EQ(x, b.uniform());
  EXPECT_NE(x, c.uniform());
  EXPECT_NE(x, d.uniform());
}

TEST(Rng, BelowStaysInRange) {
  Rng r(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[r.below(7)];
  for (int h : hits) EXPECT_GT(h, 850);
}

}  // namespace
}  // namespace regtrap
