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

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "regtrap/analytics.hpp"
#include "support.hpp"

namespace regtrap {
namespace {

std::vector<SurvivalObservation> events_at(const std::vector<int>& times) {
  std::vector<SurvivalObservation> obs;
  for (int t : times) obs.push_back({t, true});
  return obs;
}

// Product-limit by brute force: for each event time u <= t, count who is
// still at risk and who fails at u.
double km_oracle(const std::vector<SurvivalObservation>& obs, int t) {
  double s = 1.0;
  for (int u = 0; u <= t; ++u) {
    int at_risk = 0, d = 0;
    for (const auto& o : obs) {
      at_risk += o.time >= u;
      d += o.time == u && o.event;
    }
    if (d > 0) s *= 1.0 - static_cast<double>(d) / at_risk;
  }
  return s;
}

TEST(KaplanMeier, Examples) {
  const auto c = kaplan_meier({{2, true}, {3, false}, {5, true}, {5, true}, {8, false}});
  EXPECT_DOUBLE_EQ(survival_at(c, 1), 1.0);
  EXPECT_DOUBLE_EQ(survival_at(c, 2), 0.8);
  EXPECT_DOUBLE_EQ(survival_at(c, 4), 0.8);
  EXPECT_NEAR(survival_at(c, 5), 0.8 * (1.0 - 2.0 / 3.0), 1e-15);
  EXPECT_NEAR(survival_at(c, 100), 0.8 / 3.0, 1e-15);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0].at_risk, 5u);
  EXPECT_EQ(c[3].time, 5);
  EXPECT_EQ(c[3].at_risk, 3u);
  EXPECT_EQ(c[3].events, 2u);
  EXPECT_EQ(c[4].censored, 1u);
}

TEST(KaplanMeier, AllCensoredStaysAtOne) {
  const auto c = kaplan_meier({{3, false}, {7, false}});
  EXPECT_EQ(survival_at(c, 10), 1.0);
}

TEST(KaplanMeier, RejectsEmptyAndNegative) {
  EXPECT_THROW(kaplan_meier({}), Error);
  try {
    kaplan_meier({{-1, true}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
}

// Without censoring the estimator is one minus the empirical CDF. Every
// sample of size <= 5 over times 1..4.
TEST(KaplanMeier, EqualsEmpiricalCdfExhaustively) {
  int cases = 0;
  for (int n = 1; n <= 5; ++n) {
    std::vector<int> times(static_cast<std::size_t>(n), 1);
    while (true) {
      const auto c = kaplan_meier(events_at(times));
      for (int t = 0; t <= 5; ++t)
        ASSERT_NEAR(survival_at(c, t), oracle::one_minus_ecdf(times, t), 1e-12);
      ++cases;
      std::size_t k = 0;
      while (k < times.size() && times[k] == 4) times[k++] = 1;
      if (k == times.size()) break;
      ++times[k];
    }
  }
  EXPECT_EQ(cases, 4 + 16 + 64 + 256 + 1024);
}

TEST(KaplanMeier, MatchesBruteForceWithCensoring) {
  Rng rng(5);
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<SurvivalObservation> obs(1 + rng.below(25));
    for (auto& o : obs) o = {static_cast<int>(rng.below(12)), rng.bernoulli(0.6)};
    const auto c = kaplan_meier(obs);
    for (int t = 0; t <= 12; ++t) ASSERT_NEAR(survival_at(c, t), km_oracle(obs, t), 1e-12);
  }
}

TEST(KruskalWallis, TwoSeparatedGroups) {
  const auto r = kruskal_wallis({{1, 2, 3}, {4, 5, 6}});
  EXPECT_NEAR(r.statistic, 27.0 / 7.0, 1e-9);
  EXPECT_EQ(r.df, 1.0);
  EXPECT_NEAR(r.p_value, 0.04953461343562649, 1e-12);
}

TEST(KruskalWallis, TieCorrection) {
  const auto r = kruskal_wallis({{1, 2, 2, 3}, {2, 3, 4, 4}, {5, 5, 6, 1}});
  EXPECT_NEAR(r.statistic, 3.4523381294964057, 1e-12);
  EXPECT_NEAR(r.p_value, 0.1779648776472164, 1e-12);
}

TEST(KruskalWallis, IdenticalGroupsGiveZero) {
  const auto r = kruskal_wallis({{1, 2, 3}, {1, 2, 3}});
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(KruskalWallis, Degenerate) {
  EXPECT_THROW(kruskal_wallis({{1, 2}}), Error);
  try {
    kruskal_wallis({{2, 2}, {2}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateInput);
  }
  try {
    kruskal_wallis({{1}, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyInput);
  }
}

TEST(KruskalWallis, RankStatisticIgnoresMonotoneTransforms) {
  Rng rng(8);
  std::vector<std::vector<double>> g(3), h(3);
  for (std::size_t k = 0; k < 3; ++k)
    for (int i = 0; i < 9; ++i) {
      const double v = std::round(rng.normal(k * 0.4, 1.0) * 4.0) / 4.0;
      g[k].push_back(v);
      h[k].push_back(std::exp(v) * 3.0 + 1.0);
    }
  EXPECT_NEAR(kruskal_wallis(g).statistic, kruskal_wallis(h).statistic, 1e-9);
}

TEST(KruskalWallis, SizeUnderTheNull) {
  Rng rng(2024);
  int reject = 0;
  const int sims = 2000;
  for (int s = 0; s < sims; ++s) {
    std::vector<std::vector<double>> g(3, std::vector<double>(20));
    for (auto& grp : g)
      for (auto& v : grp) v = rng.normal();
    reject += kruskal_wallis(g).p_value < 0.05;
  }
  EXPECT_NEAR(static_cast<double>(reject) / sims, 0.05, 0.015);
}

TEST(ChiSquare, PerfectAssociation) {
  const auto r = chi_square_independence({{10, 0}, {0, 10}});
  EXPECT_NEAR(r.statistic, 20.0, 1e-12);
  EXPECT_EQ(r.df, 1.0);
  EXPECT_NEAR(r.p_value, 7.744216431044088e-06, 1e-15);
}

TEST(ChiSquare, ProportionalTableIsZero) {
  const auto r = chi_square_independence({{2, 4, 6}, {5, 10, 15}});
  EXPECT_NEAR(r.statistic, 0.0, 1e-12);
  EXPECT_NEAR(r.p_value, 1.0, 1e-12);
}

TEST(ChiSquare, TransposeInvariant) {
  const auto a = chi_square_independence({{3, 9, 4}, {7, 2, 8}});
  const auto b = chi_square_independence({{3, 7}, {9, 2}, {4, 8}});
  EXPECT_NEAR(a.statistic, b.statistic, 1e-12);
  EXPECT_EQ(a.df, b.df);
}

TEST(ChiSquare, ZeroMarginal) {
  try {
    chi_square_independence({{0, 0}, {3, 4}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroMarginal);
  }
  EXPECT_THROW(chi_square_independence({{1, 2}}), Error);
}

TEST(ChiSquare, ThirteenByTwoHasTwelveDegrees) {
  std::vector<std::vector<double>> t;
  for (int i = 0; i < 13; ++i) t.push_back({1.0 + i, 20.0 - i});
  EXPECT_EQ(chi_square_independence(t).df, 12.0);
}

TEST(Bonferroni, AllArchetypePairs) {
  EXPECT_DOUBLE_EQ(bonferroni_threshold(0.05, 13 * 12 / 2), 0.05 / 78);
  EXPECT_THROW(bonferroni_threshold(0.05, 0), Error);
}

TEST(PairedT, MatchesReference) {
  const auto r = paired_t_greater({3.1, 2.4, 5.0, 4.2, 3.9, 4.4}, {2.9, 2.5, 4.1, 3.6, 3.9, 3.8});
  EXPECT_NEAR(r.statistic, 2.2837506959778495, 1e-10);
  EXPECT_NEAR(r.p_value, 0.035601675111526995, 1e-10);
  EXPECT_EQ(r.df, 5.0);
}

TEST(PairedT, ZeroSpread) {
  EXPECT_EQ(paired_t_greater({2, 3}, {1, 2}).p_value, 0.0);
  EXPECT_EQ(paired_t_greater({1, 2}, {1, 2}).p_value, 1.0);
  EXPECT_THROW(paired_t_greater({1}, {0}), Error);
}

TEST(Bootstrap, ConstantInput) {
  const auto ci = bootstrap_ci({0.3, 0.3, 0.3}, 500, 0.95, 1);
  EXPECT_DOUBLE_EQ(ci.lo, 0.3);
  EXPECT_DOUBLE_EQ(ci.hi, 0.3);
}

TEST(Bootstrap, StaysWithinTheData) {
  const auto ci = bootstrap_ci({0, 1, 0, 1, 1}, 2000, 0.95, 3);
  EXPECT_GE(ci.lo, 0.0);
  EXPECT_LE(ci.hi, 1.0);
  EXPECT_LT(ci.lo, ci.hi);
}

TEST(Bootstrap, MatchesIndexResampling) {
  const std::vector<double> x{0.12, 0.31, 0.08, 0.27, 0.19, 0.22, 0.15};
  const int draws = 999;
  const auto idx = bootstrap_indices(x.size(), draws, 42);
  std::vector<double> means;
  for (const auto& row : idx) {
    double s = 0;
    for (auto i : row) s += x[i];
    means.push_back(s / x.size());
  }
  std::sort(means.begin(), means.end());
  auto q = [&](double p) {
    const double h = (means.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(h);
    return means[lo] + (h - lo) * (means[std::min(lo + 1, means.size() - 1)] - means[lo]);
  };
  const auto ci = bootstrap_ci(x, draws, 0.9, 42);
  EXPECT_NEAR(ci.lo, q(0.05), 1e-12);
  EXPECT_NEAR(ci.hi, q(0.95), 1e-12);
}

TEST(Bootstrap, NeedsTwoReplications) {
  try {
    bootstrap_ci({0.2}, 100, 0.95, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientReplications);
  }
}

TEST(Quantiles, FiveNumber) {
  const auto f = five_number({5, 1, 3, 2, 4});
  EXPECT_EQ(f.min, 1);
  EXPECT_EQ(f.q1, 2);
  EXPECT_EQ(f.median, 3);
  EXPECT_EQ(f.q3, 4);
  EXPECT_EQ(f.max, 5);
  EXPECT_EQ(f.mean, 3);
  EXPECT_DOUBLE_EQ(median({1, 2, 3, 4}), 2.5);
}

TerminalRecord rec(std::size_t id, std::size_t arch, Outcome o, int expiries, int tte,
                   DropoutCause cause = DropoutCause::None) {
  TerminalRecord t;
  t.agent_id = id;
  t.archetype = arch;
  t.outcome = o;
  t.cause = cause;
  t.expiries = expiries;
  t.time_to_event = tte;
  t.censored = o == Outcome::Active;
  return t;
}

TEST(Summary, HandCase) {
  ExperimentResult ex;
  ex.archetype_ids = {"X", "Y"};
  ex.horizon = 61;
  ex.replications.push_back({1, 61,
                             {rec(0, 0, Outcome::Dropout, 5, 10, DropoutCause::Normative),
                              rec(1, 0, Outcome::Active, 1, 61),
                              rec(2, 1, Outcome::Graduated, 0, 40)},
                             {}});
  const auto s = summarize(ex);
  const auto& g = s.global;
  EXPECT_DOUBLE_EQ(g.dropout_rate, 1.0 / 3);
  EXPECT_DOUBLE_EQ(g.graduation_rate, 1.0 / 3);
  EXPECT_DOUBLE_EQ(g.active_rate, 1.0 / 3);
  EXPECT_EQ(*g.normative_share, 1.0);
  EXPECT_EQ(*g.other_share, 0.0);
  EXPECT_DOUBLE_EQ(g.mean_expiries, 2.0);
  EXPECT_EQ(*g.mean_expiries_dropout, 5.0);
  EXPECT_EQ(*g.mean_expiries_active, 1.0);
  EXPECT_EQ(*g.median_time_to_event, 10.0);
  EXPECT_FALSE(g.dropout_ci.has_value());
  EXPECT_EQ(g.min_archetype_dropout, 0.0);
  EXPECT_EQ(g.max_archetype_dropout, 0.5);
  EXPECT_EQ(s.archetypes[0].dropout_rate, 0.5);
  EXPECT_EQ(s.archetypes[1].graduated_rate, 1.0);
  EXPECT_EQ(s.expiry_histogram, (std::map<int, std::size_t>{{0, 1}, {1, 1}, {5, 1}}));
  EXPECT_NEAR(survival_at(s.survival, 10), 2.0 / 3, 1e-15);
  EXPECT_NEAR(survival_at(s.survival, 61), 2.0 / 3, 1e-15);
}

TEST(Summary, NoDropouts) {
  ExperimentResult ex;
  ex.archetype_ids = {"X"};
  ex.horizon = 8;
  ex.replications.push_back({1, 8, {rec(0, 0, Outcome::Graduated, 0, 8)}, {}});
  ex.replications.push_back({2, 8, {rec(0, 0, Outcome::Active, 2, 8)}, {}});
  const auto s = summarize(ex);
  EXPECT_FALSE(s.global.normative_share.has_value());
  EXPECT_FALSE(s.global.median_time_to_event.has_value());
  ASSERT_TRUE(s.global.dropout_ci.has_value());
  EXPECT_EQ(s.global.dropout_ci->lo, 0.0);
  EXPECT_EQ(s.global.dropout_ci->hi, 0.0);
}

TEST(Summary, EmptyExperiment) {
  EXPECT_THROW(summarize(ExperimentResult{}), Error);
}

TEST(Summary, ReferencePopulation) {
  Scenario sc;
  sc.n_agents = 200;
  const auto a = run_experiment(test::reference_curriculum(), test::reference_archetypes(), sc, {1, 2, 3});
  const auto b = run_experiment(test::reference_curriculum(), test::reference_archetypes(), sc, {4, 5});
  const auto sa = summarize(a), sb = summarize(b);
  const auto& g = sa.global;
  ASSERT_TRUE(g.normative_share.has_value());
  EXPECT_NEAR(*g.normative_share + *g.academic_share + *g.other_share, 1.0, 1e-12);
  EXPECT_NEAR(g.dropout_rate + g.graduation_rate + g.active_rate, 1.0, 1e-12);
  EXPECT_EQ(sa.archetypes.size(), 13u);
  EXPECT_LE(g.dropout_ci->lo, g.dropout_rate);
  EXPECT_GE(g.dropout_ci->hi, g.dropout_rate);

  const auto m = summarize(merge(a, b));
  EXPECT_EQ(m.global.total_agents, 1000u);
  EXPECT_EQ(m.global.dropouts, sa.global.dropouts + sb.global.dropouts);
  EXPECT_NEAR(m.global.mean_expiries, (600 * sa.global.mean_expiries + 400 * sb.global.mean_expiries) / 1000,
              1e-12);

  const auto tests = archetype_tests(a);
  ASSERT_EQ(tests.size(), 3u + 78u);
  EXPECT_DOUBLE_EQ(tests.back().alpha, 0.05 / 78);
  EXPECT_EQ(tests[2].result.df, 12.0);
}

TEST(Summary, MergeRejectsDifferentPopulations) {
  ExperimentResult a, b;
  a.archetype_ids = {"X"};
  b.archetype_ids = {"Y"};
  EXPECT_THROW(merge(a, b), Error);
}

}  // namespace
}  // namespace regtrap
