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

#pragma once

// Learning, exams, psychological state, terminal states and dropout
// attribution.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "regtrap/curriculum.hpp"
#include "regtrap/error.hpp"
#include "regtrap/population.hpp"
#include "regtrap/rng.hpp"

namespace regtrap {

struct DynamicsParams {
  double sigma_abil = 0.1;
  double beta_stress = 0.3;
  double fatigue_factor = 0.75;
  double gamma_decay = 0.98;
  double delta_B_fail = -0.02;
  double delta_B_expiry = -0.05;
  double expiry_stress_multiplier = 1.5;   // x sigma_stress
  double success_stress_relief = -0.5;     // x sigma_stress
  double sigma_exam = 0.15;
  double belonging_floor = 0.15;
  double stress_ceiling = 0.85;
  int stagnation_periods = 4;
  std::array<double, 5> withdrawal_betas{-5.2, -3.1, 2.8, 0.4, 0.2};
  int normative_expiry_threshold = 5;
  int academic_failure_threshold = 3;      // failures in one course
  int academic_course_threshold = 2;       // courses at that many failures
  double reference_stress = 0.2;
  double pass_rate_clamp = 0.995;

  void validate() const {
    if (!(gamma_decay > 0.0 && gamma_decay <= 1.0))
      throw Error(ErrorKind::ConfigInvalid, "gamma_decay must lie in (0, 1]");
    if (!(sigma_exam > 0.0)) throw Error(ErrorKind::ConfigInvalid, "sigma_exam must be > 0");
    if (!(sigma_abil >= 0.0)) throw Error(ErrorKind::ConfigInvalid, "sigma_abil must be >= 0");
    if (!(fatigue_factor > 0.0 && fatigue_factor <= 1.0))
      throw Error(ErrorKind::ConfigInvalid, "fatigue_factor must lie in (0, 1]");
    if (stagnation_periods < 1)
      throw Error(ErrorKind::ConfigInvalid, "stagnation_periods must be >= 1");
    if (!(pass_rate_clamp > 0.5 && pass_rate_clamp < 1.0))
      throw Error(ErrorKind::ConfigInvalid, "pass_rate_clamp must lie in (0.5, 1)");
  }
};

/// Learning gained in one period: ability-weighted effort over difficulty,
/// discounted by stress.
inline double learning_increment(double ability, double effort, double difficulty, double stress,
                                 const DynamicsParams& p) {
  return ability * effort / (difficulty * (1.0 + p.beta_stress * stress));
}

struct EffortPlan {
  std::vector<double> effort;     // per portfolio entry, same order
  double ability_multiplier = 1.0;
  bool overload = false;          // sets the fatigue flag for next period
};

/// Each course gets its full workload as effort. A fatigued agent learns at
/// reduced ability this period; exceeding capacity fatigues the next one.
inline EffortPlan effective_effort(const Curriculum& cur, std::span<const std::size_t> portfolio,
                                   double e_max, bool fatigued, const DynamicsParams& p) {
  EffortPlan plan;
  double total = 0.0;
  for (std::size_t i : portfolio) {
    plan.effort.push_back(cur.course(i).workload);
    total += cur.course(i).workload;
  }
  plan.ability_multiplier = fatigued ? p.fatigue_factor : 1.0;
  plan.overload = total > e_max;
  return plan;
}

inline double pass_probability(double learning, double theta, double sigma_exam) {
  return 1.0 / (1.0 + std::exp(-(learning - theta) / sigma_exam));
}

/// Learning accumulated by the reference agent: population-mean ability,
/// reference stress, effort equal to the workload for reg_time periods.
inline double reference_learning(const CourseParams& c, double reference_ability,
                                 const DynamicsParams& p) {
  return c.reg_time *
         learning_increment(reference_ability, c.workload, c.difficulty, p.reference_stress, p);
}

/// Threshold that gives the reference agent a pass probability equal to the
/// course's historical pass rate. A pass rate of 1 is clamped before the logit.
inline double regularisation_threshold(const CourseParams& c, double reference_ability,
                                       const DynamicsParams& p) {
  const double rho = std::min(c.pass_rate, p.pass_rate_clamp);
  return reference_learning(c, reference_ability, p) - p.sigma_exam * std::log(rho / (1.0 - rho));
}

/// Weighted mean of archetype base abilities.
inline double population_mean_ability(const std::vector<Archetype>& archetypes) {
  double s = 0.0, w = 0.0;
  for (const auto& a : archetypes) {
    s += a.weight * a.mu_abil;
    w += a.weight;
  }
  return s / w;
}

struct PeriodTally {
  int failures = 0;
  int expiries = 0;
  int successes = 0;
};

struct PsychState {
  double stress = 0.0;
  double belonging = 0.0;
};

/// One end-of-period update of stress and belonging, both clamped to [0, 1].
/// Successes relieve stress and leave belonging unchanged.
inline PsychState update_psych(PsychState s, const PeriodTally& t, double sigma_stress,
                               const DynamicsParams& p) {
  double stress = s.stress * p.gamma_decay + t.failures * sigma_stress +
                  t.expiries * p.expiry_stress_multiplier * sigma_stress +
                  t.successes * p.success_stress_relief * sigma_stress;
  double belonging = s.belonging + t.failures * p.delta_B_fail + t.expiries * p.delta_B_expiry;
  return {std::clamp(stress, 0.0, 1.0), std::clamp(belonging, 0.0, 1.0)};
}

inline double withdrawal_logit(double belonging, double stress, int expiries, int semesters,
                               const std::array<double, 5>& b) {
  return b[0] + b[1] * belonging + b[2] * stress + b[3] * expiries + b[4] * semesters;
}

inline double withdrawal_probability(double belonging, double stress, int expiries, int semesters,
                                     const std::array<double, 5>& betas) {
  return 1.0 / (1.0 + std::exp(-withdrawal_logit(belonging, stress, expiries, semesters, betas)));
}

struct TerminalDecision {
  Outcome outcome = Outcome::Active;
  DropoutTrigger trigger = DropoutTrigger::None;
};

inline bool all_credited(const AgentState& a) {
  return std::all_of(a.statuses.begin(), a.statuses.end(),
                     [](const CourseStatus& s) { return s.state == CourseState::Credited; });
}

/// End-of-period exit check, in order: graduation, depletion, stagnation,
/// voluntary withdrawal, optional exogenous hazard. Consumes one uniform for
/// the voluntary draw and one more when `exogenous_hazard` > 0.
inline TerminalDecision check_terminal(const AgentState& a, const DynamicsParams& p,
                                       double exogenous_hazard, Rng& rng) {
  if (all_credited(a)) return {Outcome::Graduated, DropoutTrigger::None};
  if (a.belonging < p.belonging_floor || a.stress > p.stress_ceiling)
    return {Outcome::Dropout, DropoutTrigger::Depletion};
  if (a.periods_without_progress >= p.stagnation_periods)
    return {Outcome::Dropout, DropoutTrigger::Stagnation};
  const double pw = withdrawal_probability(a.belonging, a.stress, a.events.expiry_count(),
                                           a.semesters_enrolled, p.withdrawal_betas);
  if (rng.uniform() < pw) return {Outcome::Dropout, DropoutTrigger::Voluntary};
  if (exogenous_hazard > 0.0 && rng.uniform() < exogenous_hazard)
    return {Outcome::Dropout, DropoutTrigger::Exogenous};
  return {};
}

/// Proximate cause of a dropout, read from the event log alone.
///
/// Normative: at least `normative_expiry_threshold` expiries, or a depletion
/// exit in a period that itself contained an expiry. Academic: fewer
/// expiries than that and at least `academic_course_threshold` courses with
/// `academic_failure_threshold` or more failures. Otherwise Other.
inline DropoutCause attribute_cause(const EventLog& log, std::size_t n_courses,
                                    const DynamicsParams& p) {
  const Event* exit = nullptr;
  for (const auto& e : log)
    if (e.type == EventType::Withdrew) exit = &e;
  if (exit == nullptr) return DropoutCause::None;

  const int expiries = log.expiry_count();
  if (expiries >= p.normative_expiry_threshold) return DropoutCause::Normative;
  if (exit->trigger == DropoutTrigger::Depletion) {
    for (const auto& e : log)
      if (e.type == EventType::Expired && e.phase == exit->phase) return DropoutCause::Normative;
  }
  const auto failures = log.failures_by_course(n_courses);
  const auto heavy = std::count_if(failures.begin(), failures.end(), [&](int f) {
    return f >= p.academic_failure_threshold;
  });
  if (heavy >= p.academic_course_threshold) return DropoutCause::Academic;
  return DropoutCause::Other;
}

}  // namespace regtrap
