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

#include <cmath>

#include "oracles.hpp"
#include "regtrap/dynamics.hpp"
#include "support.hpp"

namespace regtrap {
namespace {

using test::course;

const DynamicsParams kP;

TEST(Learning, Increment) {
  EXPECT_NEAR(learning_increment(0.5, 2.0, 0.5, 0.0, kP), 2.0, 1e-12);
  EXPECT_NEAR(learning_increment(0.5, 2.0, 0.5, 1.0, kP), 2.0 / 1.3, 1e-12);
  EXPECT_NEAR(learning_increment(0.5, 2.0, 0.5, 1.0, kP), 1.5384615384615383, 1e-9);
  EXPECT_EQ(learning_increment(0.9, 0.0, 0.3, 0.7, kP), 0.0);
}

TEST(Effort, CapacityAndFatigue) {
  std::vector<CourseParams> cs;
  for (int i = 0; i < 6; ++i) cs.push_back(course("c" + std::to_string(i), 0.5, 2.5));
  const auto cur = Curriculum::build(cs);
  const std::vector<std::size_t> four{0, 1, 2, 3}, six{0, 1, 2, 3, 4, 5};
  const auto ok = effective_effort(cur, four, 14.0, false, kP);
  EXPECT_FALSE(ok.overload);
  EXPECT_EQ(ok.ability_multiplier, 1.0);
  EXPECT_EQ(ok.effort, (std::vector<double>{2.5, 2.5, 2.5, 2.5}));
  EXPECT_TRUE(effective_effort(cur, six, 14.0, false, kP).overload);  // 15 > 14
  const auto tired = effective_effort(cur, four, 14.0, true, kP);
  EXPECT_NEAR(0.8 * tired.ability_multiplier, 0.6, 1e-12);
}

TEST(Exam, PassProbability) {
  EXPECT_DOUBLE_EQ(pass_probability(2.0, 2.0, 0.15), 0.5);
  EXPECT_NEAR(pass_probability(2.15, 2.0, 0.15), 1.0 / (1.0 + std::exp(-1.0)), 1e-9);
  EXPECT_NEAR(pass_probability(2.15, 2.0, 0.15), 0.7310585786300049, 1e-9);
  double last = 0.0;
  for (double l = 0.0; l < 10.0; l += 0.1) {
    const double p = pass_probability(l, 5.0, 0.15);
    EXPECT_GE(p, last);
    EXPECT_LE(p, 1.0);
    last = p;
  }
}

TEST(Threshold, CoinFlipCourseSitsAtReferenceLearning) {
  const auto c = course("A", 0.8, 1.88, 0.5, 1.875);
  const double lref = oracle::reference_learning(1.875, 0.56, 1.88, 0.8, 0.2, 0.3);
  EXPECT_NEAR(reference_learning(c, 0.56, kP), lref, 1e-12);
  EXPECT_NEAR(regularisation_threshold(c, 0.56, kP), lref, 1e-12);
}

TEST(Threshold, CertainPassIsClamped) {
  const auto c = course("P", 0.3, 2.9, 1.0, 3.0);
  const double lref = oracle::reference_learning(3.0, 0.56, 2.9, 0.3, 0.2, 0.3);
  EXPECT_NEAR(regularisation_threshold(c, 0.56, kP), lref - 0.15 * std::log(199.0), 1e-9);
}

TEST(Threshold, ReferenceAgentsReproducePassRates) {
  const auto& cur = test::reference_curriculum();
  const double mean_ability = population_mean_ability(test::reference_archetypes());
  for (const char* id : {"01_calculo_i", "07_fundamentos_de_quimica_general", "13_fisica_iii",
                         "19_topografia_y_geodesia", "25_estabilidad_iii", "31_obras_basicas_viales",
                         "37_diseno_y_construccion_de_pavimentos",
                         "42_economia_y_evaluacion_de_proyectos"}) {
    const auto& c = cur.course(cur.index_of(id));
    const double lref = oracle::reference_learning(c.reg_time, mean_ability, c.workload,
                                                   c.difficulty, 0.2, 0.3);
    const double rate = oracle::simulated_pass_rate(
        lref, regularisation_threshold(c, mean_ability, kP), 0.15, 100000, 77);
    EXPECT_NEAR(rate, c.pass_rate, 0.01) << id;
  }
}

TEST(Psych, DecayOnly) {
  const auto s = update_psych({0.5, 0.6}, {}, 0.1, kP);
  EXPECT_NEAR(s.stress, 0.49, 1e-12);
  EXPECT_NEAR(s.belonging, 0.6, 1e-12);
}

TEST(Psych, OneExpiry) {
  PeriodTally t;
  t.expiries = 1;
  const auto s = update_psych({0.0, 0.6}, t, 0.10, kP);
  EXPECT_NEAR(s.stress, 0.15, 1e-12);
  EXPECT_NEAR(s.belonging, 0.55, 1e-12);
}

TEST(Psych, FailureAndSuccess) {
  PeriodTally t;
  t.failures = 1;
  t.successes = 1;
  const auto s = update_psych({0.2, 0.6}, t, 0.10, kP);
  EXPECT_NEAR(s.stress, 0.2 * 0.98 + 0.05, 1e-12);
  EXPECT_NEAR(s.belonging, 0.58, 1e-12);
}

TEST(Psych, StaysInUnitInterval) {
  PeriodTally bad;
  bad.failures = 10;
  bad.expiries = 10;
  const auto s = update_psych({0.9, 0.1}, bad, 0.15, kP);
  EXPECT_EQ(s.stress, 1.0);
  EXPECT_EQ(s.belonging, 0.0);
  PeriodTally good;
  good.successes = 10;
  EXPECT_EQ(update_psych({0.1, 0.5}, good, 0.15, kP).stress, 0.0);
}

TEST(Withdrawal, LogisticWithReferenceBetas) {
  EXPECT_NEAR(withdrawal_probability(1.0, 0.0, 0, 0, kP.withdrawal_betas),
              1.0 / (1.0 + std::exp(8.3)), 1e-9);
  EXPECT_NEAR(withdrawal_probability(1.0, 0.0, 0, 0, kP.withdrawal_betas), 2.4845508183933e-4, 1e-9);
  EXPECT_NEAR(withdrawal_logit(0.0, 1.0, 5, 4, kP.withdrawal_betas), 0.4, 1e-12);
  EXPECT_NEAR(withdrawal_probability(0.0, 1.0, 5, 4, kP.withdrawal_betas), 0.598687660112452, 1e-9);
  double last = 1.0;
  for (double b = 0.0; b <= 1.0; b += 0.05) {
    const double p = withdrawal_probability(b, 0.5, 2, 3, kP.withdrawal_betas);
    EXPECT_LT(p, last);
    last = p;
  }
}

struct TerminalFixture : ::testing::Test {
  AgentState a;
  Rng rng{1};
  void SetUp() override {
    a.statuses.assign(3, CourseStatus{});
    a.belonging = 0.7;
    a.stress = 0.1;
  }
};

TEST_F(TerminalFixture, AllCreditedGraduates) {
  for (auto& s : a.statuses) s.state = CourseState::Credited;
  a.belonging = 0.0;  // graduation is checked first
  EXPECT_EQ(check_terminal(a, kP, 0.0, rng).outcome, Outcome::Graduated);
}

TEST_F(TerminalFixture, LowBelongingDepletes) {
  a.belonging = 0.14;
  const auto d = check_terminal(a, kP, 0.0, rng);
  EXPECT_EQ(d.outcome, Outcome::Dropout);
  EXPECT_EQ(d.trigger, DropoutTrigger::Depletion);
}

TEST_F(TerminalFixture, HighStressDepletes) {
  a.stress = 0.86;
  EXPECT_EQ(check_terminal(a, kP, 0.0, rng).trigger, DropoutTrigger::Depletion);
}

TEST_F(TerminalFixture, FourIdlePeriodsStagnate) {
  a.periods_without_progress = 3;
  DynamicsParams never = kP;
  never.withdrawal_betas = {-50, 0, 0, 0, 0};
  EXPECT_EQ(check_terminal(a, never, 0.0, rng).outcome, Outcome::Active);
  a.periods_without_progress = 4;
  EXPECT_EQ(check_terminal(a, never, 0.0, rng).trigger, DropoutTrigger::Stagnation);
}

TEST_F(TerminalFixture, CertainHazardIsExogenous) {
  DynamicsParams never = kP;
  never.withdrawal_betas = {-50, 0, 0, 0, 0};
  EXPECT_EQ(check_terminal(a, never, 1.0, rng).trigger, DropoutTrigger::Exogenous);
}

EventLog log_of(std::initializer_list<Event> events) {
  EventLog l;
  for (const auto& e : events) l.append(e);
  return l;
}

TEST(Attribution, ManyExpiriesAreNormative) {
  EventLog l;
  for (int p = 0; p < 6; ++p) l.append({p, EventType::Expired, p % 3});
  l.append({9, EventType::Withdrew, kNoCourse, DropoutTrigger::Voluntary});
  EXPECT_EQ(attribute_cause(l, 3, kP), DropoutCause::Normative);
}

TEST(Attribution, RepeatedFailuresAreAcademic) {
  EventLog l;
  l.append({1, EventType::Expired, 2});
  l.append({2, EventType::Expired, 2});
  for (int k = 0; k < 3; ++k) l.append({3 + k, EventType::ExamFailed, 0});
  for (int k = 0; k < 4; ++k) l.append({6 + k, EventType::ExamFailed, 1});
  l.append({10, EventType::Withdrew, kNoCourse, DropoutTrigger::Voluntary});
  EXPECT_EQ(attribute_cause(l, 3, kP), DropoutCause::Academic);
}

TEST(Attribution, ResidualIsOther) {
  const auto l = log_of({{1, EventType::Expired, 0}, {2, EventType::ExamFailed, 1},
                         {3, EventType::ExamFailed, 1},
                         {4, EventType::Withdrew, kNoCourse, DropoutTrigger::Voluntary}});
  EXPECT_EQ(attribute_cause(l, 3, kP), DropoutCause::Other);
}

TEST(Attribution, DepletionInAnExpiryPeriodIsNormative) {
  const auto same = log_of({{5, EventType::Expired, 0},
                            {5, EventType::Withdrew, kNoCourse, DropoutTrigger::Depletion}});
  EXPECT_EQ(attribute_cause(same, 3, kP), DropoutCause::Normative);
  const auto earlier = log_of({{4, EventType::Expired, 0},
                               {5, EventType::Withdrew, kNoCourse, DropoutTrigger::Depletion}});
  EXPECT_EQ(attribute_cause(earlier, 3, kP), DropoutCause::Other);
}

TEST(Attribution, NoExitNoCause) {
  EXPECT_EQ(attribute_cause(log_of({{1, EventType::Expired, 0}}), 3, kP), DropoutCause::None);
}

}  // namespace
}  // namespace regtrap
