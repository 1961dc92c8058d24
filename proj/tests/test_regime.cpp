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

#include "oracles.hpp"
#include "regtrap/regime.hpp"
#include "regtrap/rng.hpp"

namespace regtrap {
namespace {

CourseStatus in(CourseState s, int ttl = 0, double learning = 0.0) {
  CourseStatus c;
  c.state = s;
  c.ttl = ttl;
  c.learning = learning;
  return c;
}

void expect_illegal(auto&& fn) {
  try {
    fn();
    FAIL() << "transition accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IllegalTransition);
  }
}

TEST(Regime, EnrollFromNull) {
  const auto s = regime::enroll(in(CourseState::Null));
  EXPECT_EQ(s.state, CourseState::Enrolled);
  EXPECT_EQ(s.learning, 0.0);
  EXPECT_EQ(s.enrolment_count, 1);
}

TEST(Regime, ReenrollAfterExpiryResetsLearning) {
  const auto s = regime::enroll(in(CourseState::Expired, 0, 3.7));
  EXPECT_EQ(s.state, CourseState::Enrolled);
  EXPECT_EQ(s.learning, 0.0);
}

TEST(Regime, EnrollFromCreditedIsIllegal) {
  expect_illegal([] { regime::enroll(in(CourseState::Credited)); });
}

TEST(Regime, RegularizeSetsTtl) {
  EXPECT_EQ(regime::regularize(in(CourseState::Enrolled), 2).ttl, 2);
  EXPECT_EQ(regime::regularize(in(CourseState::Enrolled), 3).ttl, 3);
  expect_illegal([] { regime::regularize(in(CourseState::Regular, 2), 2); });
}

TEST(Regime, DecayOnlyInExamWindowsAndOnlyWhenRegular) {
  EXPECT_EQ(regime::decay_ttl(in(CourseState::Regular, 2), true).ttl, 1);
  EXPECT_EQ(regime::decay_ttl(in(CourseState::Regular, 1), false).ttl, 1);
  EXPECT_EQ(regime::decay_ttl(in(CourseState::Enrolled), true), in(CourseState::Enrolled));
}

TEST(Regime, ExpiryAtZeroTtl) {
  auto [a, ea] = regime::check_expiry(in(CourseState::Regular, 0));
  EXPECT_TRUE(ea);
  EXPECT_EQ(a.state, CourseState::Expired);
  auto [b, eb] = regime::check_expiry(in(CourseState::Regular, 1));
  EXPECT_FALSE(eb);
  EXPECT_EQ(b.state, CourseState::Regular);
  auto [c, ec] = regime::check_expiry(in(CourseState::Credited, 0));
  EXPECT_FALSE(ec);
  EXPECT_EQ(c.state, CourseState::Credited);
}

TEST(Regime, ExpiryIgnoresLearning) {
  auto [s, expired] = regime::check_expiry(in(CourseState::Regular, 0, 1e6));
  EXPECT_TRUE(expired);
  EXPECT_EQ(s.learning, 1e6);
}

TEST(Regime, CreditOnlyFromRegular) {
  EXPECT_EQ(regime::credit(in(CourseState::Regular, 1)).state, CourseState::Credited);
  expect_illegal([] { regime::credit(in(CourseState::Enrolled)); });
  expect_illegal([] { regime::credit(in(CourseState::Credited)); });
}

TEST(Regime, ExhaustiveTransitionTableMatchesLegalSet) {
  const auto r = oracle::exhaustive_transitions();
  EXPECT_EQ(r.cases, 5 * 5 * 2 * 4 * 6);
  EXPECT_EQ(r.mismatches, 0) << r.first_mismatch;
}

// Random walks: TTL stays within [0, T_exp], Credited is absorbing, and a
// course never expires without first sitting at TTL 0.
TEST(Regime, RandomWalkInvariants) {
  Rng rng(99);
  for (int walk = 0; walk < 2000; ++walk) {
    const int t_exp = 1 + static_cast<int>(rng.below(4));
    CourseStatus s;
    bool credited = false;
    for (int step = 0; step < 40; ++step) {
      const auto op = oracle::kOps[rng.below(6)];
      const auto next = oracle::actual(s, op, t_exp);
      if (!next) continue;
      if (op == oracle::Op::CheckExpiry && next->state == CourseState::Expired &&
          s.state != CourseState::Expired)
        EXPECT_EQ(s.ttl, 0);
      s = *next;
      EXPECT_GE(s.ttl, 0);
      EXPECT_LE(s.ttl, t_exp);
      if (credited) EXPECT_EQ(s.state, CourseState::Credited);
      credited = s.state == CourseState::Credited;
      if (op == oracle::Op::Enroll) EXPECT_EQ(s.learning, 0.0);  // learning only accrues while Enrolled
      if (s.state == CourseState::Enrolled) s.learning += 1.0;
    }
  }
}

}  // namespace
}  // namespace regtrap
