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

// Period loop, replications and experiments.
//
// Each agent owns an RNG substream derived from (replication seed, agent id)
// and agents never read each other's state, except through the optional
// per-course enrolment caps (agents are always processed in id order).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "regtrap/behavior.hpp"
#include "regtrap/curriculum.hpp"
#include "regtrap/dynamics.hpp"
#include "regtrap/population.hpp"
#include "regtrap/regime.hpp"
#include "regtrap/rng.hpp"
#include "regtrap/scenario.hpp"

namespace regtrap {

/// Rules in force after policy levers are applied to a scenario.
struct EffectiveRules {
  int t_exp = 2;
  int exam_slots = 2;
  double exogenous_hazard = 0.0;
  UtilityWeights weights;
  DynamicsParams dynamics;
  ChoiceRules choice;
};

struct World {
  const Curriculum* curriculum = nullptr;
  const std::vector<Archetype>* archetypes = nullptr;
  PhaseCalendar calendar;
  EffectiveRules rules;
  std::vector<double> thresholds;  // per course position
  std::vector<int> capacity;       // per course, -1 = unlimited
  std::vector<int> enrolled_now;   // agents currently Enrolled, per course
  std::vector<AgentState> agents;
  std::vector<Rng> streams;        // per agent
  std::uint64_t seed = 0;
};

/// Policy levers: T_exp feeds regularisation; bridging support halves the
/// psychological cost of an expiry and gives expired courses a +w2
/// re-enrolment bonus; flexible scheduling adds one exam slot per window.
inline World& apply_policy(const Scenario& s, World& w) {
  EffectiveRules r;
  r.t_exp = s.t_exp;
  r.exam_slots = s.exam_slots + (s.flexible_scheduling ? 1 : 0);
  r.exogenous_hazard = s.exogenous_hazard;
  r.weights = s.weights;
  r.dynamics = s.dynamics;
  if (s.bridging_support) {
    r.dynamics.delta_B_expiry *= 0.5;
    r.dynamics.expiry_stress_multiplier *= 0.5;
  }
  r.choice.t_exp = s.t_exp;
  r.choice.expired_priority = s.bridging_support;
  r.choice.exact_limit = static_cast<std::size_t>(s.exact_enumeration_limit);
  r.choice.bottleneck_threshold = static_cast<std::size_t>(s.bottleneck_threshold);
  w.rules = r;
  w.calendar = s.calendar;
  return w;
}

/// The world keeps pointers to `cur` and `archetypes`; both must outlive it.
inline World make_world(const Curriculum& cur, const std::vector<Archetype>& archetypes,
                        const Scenario& s, std::uint64_t seed) {
  s.validate();
  validate(archetypes);
  World w;
  w.curriculum = &cur;
  w.archetypes = &archetypes;
  w.seed = seed;
  apply_policy(s, w);
  const double mean_ability = population_mean_ability(archetypes);
  for (const auto& c : cur.courses())
    w.thresholds.push_back(regularisation_threshold(c, mean_ability, w.rules.dynamics));
  w.capacity.assign(cur.size(), -1);
  for (const auto& [id, cap] : s.course_capacity) {
    if (!cur.contains(id))
      throw Error(ErrorKind::ConfigInvalid, "course_capacity." + id + ": unknown course");
    w.capacity[cur.index_of(id)] = cap;
  }
  w.enrolled_now.assign(cur.size(), 0);
  w.agents = spawn_population(archetypes, static_cast<std::size_t>(s.n_agents), cur.size());
  w.streams.reserve(w.agents.size());
  for (const auto& a : w.agents) w.streams.push_back(Rng::substream(seed, a.agent_id));
  return w;
}

namespace detail {

inline void step_agent(World& w, AgentState& agent, int phase) {
  const Curriculum& cur = *w.curriculum;
  const Archetype& arch = (*w.archetypes)[agent.archetype];
  const EffectiveRules& r = w.rules;
  const DynamicsParams& dp = r.dynamics;
  Rng& rng = w.streams[agent.agent_id];
  auto log = [&](EventType t, int course = kNoCourse) { agent.events.append({phase, t, course}); };

  const double ability = sample_ability(arch, rng, dp.sigma_abil);

  // (1) feasibility and portfolio; one noise draw per scored course, in
  // ascending course order
  const auto feasible = feasible_set(agent, arch, cur, phase, w.calendar);
  std::vector<double> noise(cur.size(), 0.0);
  {
    std::size_t k = 0;
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const bool in_feasible = k < feasible.size() && feasible[k] == i;
      if (in_feasible) ++k;
      if (in_feasible || agent.statuses[i].state == CourseState::Regular)
        noise[i] = r.weights.noise_sd * rng.normal();
    }
  }
  auto portfolio = select_portfolio(agent, arch, cur, feasible, r.weights, r.choice, noise);

  // (2) enrolments
  std::vector<std::size_t> working;
  for (std::size_t i : portfolio) {
    CourseStatus& st = agent.statuses[i];
    if (st.state == CourseState::Null || st.state == CourseState::Expired) {
      if (w.capacity[i] >= 0 && w.enrolled_now[i] >= w.capacity[i]) continue;
      const bool again = st.state == CourseState::Expired;
      st = regime::enroll(st);
      ++w.enrolled_now[i];
      log(again ? EventType::Reenrolled : EventType::Enrolled, static_cast<int>(i));
    }
    working.push_back(i);
  }

  // (3) effort and learning
  const EffortPlan plan = effective_effort(cur, working, arch.e_max, agent.fatigued, dp);
  agent.fatigued = plan.overload;
  if (plan.overload) log(EventType::Overloaded);
  PeriodTally tally;
  bool progress = false;
  for (std::size_t k = 0; k < working.size(); ++k) {
    const std::size_t i = working[k];
    agent.statuses[i].learning += learning_increment(ability * plan.ability_multiplier,
                                                     plan.effort[k], cur.course(i).difficulty,
                                                     agent.stress, dp);
  }

  // (4) regularisation
  for (std::size_t i : working) {
    CourseStatus& st = agent.statuses[i];
    if (st.learning >= w.thresholds[i]) {
      st = regime::regularize(st, r.t_exp);
      --w.enrolled_now[i];
      log(EventType::Regularized, static_cast<int>(i));
      progress = true;
    }
  }

  // (5) exam window: sit, credit, then decay and expire
  if (w.calendar.is_exam_window(phase)) {
    const auto sitting = select_exams(agent, arch, cur, r.exam_slots, r.weights, r.choice, noise);
    for (std::size_t i : sitting) {
      CourseStatus& st = agent.statuses[i];
      const double p = pass_probability(st.learning, w.thresholds[i], dp.sigma_exam);
      if (rng.uniform() < p) {
        st = regime::credit(st);
        log(EventType::ExamPassed, static_cast<int>(i));
        ++tally.successes;
        progress = true;
      } else {
        ++st.exam_failures;
        log(EventType::ExamFailed, static_cast<int>(i));
        ++tally.failures;
      }
    }
    for (std::size_t i = 0; i < cur.size(); ++i) {
      CourseStatus& st = agent.statuses[i];
      if (st.state != CourseState::Regular) continue;
      auto [next, expired] = regime::check_expiry(regime::decay_ttl(st, true));
      st = next;
      if (expired) {
        log(EventType::Expired, static_cast<int>(i));
        ++tally.expiries;
      }
    }
  }

  // (6) psychological update
  const PsychState ps =
      update_psych({agent.stress, agent.belonging}, tally, arch.sigma_stress, dp);
  agent.stress = ps.stress;
  agent.belonging = ps.belonging;

  // (7) terminal check
  agent.periods_without_progress = progress ? 0 : agent.periods_without_progress + 1;
  if (w.calendar.closes_semester(phase)) ++agent.semesters_enrolled;
  const TerminalDecision d = check_terminal(agent, dp, r.exogenous_hazard, rng);
  if (d.outcome == Outcome::Active) return;
  agent.outcome = d.outcome;
  agent.time_to_event = phase + 1;
  if (d.outcome == Outcome::Dropout) {
    agent.trigger = d.trigger;
    agent.events.append({phase, EventType::Withdrew, kNoCourse, d.trigger});
    agent.cause = attribute_cause(agent.events, cur.size(), dp);
  }
  // A departing agent frees its seats.
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (agent.statuses[i].state == CourseState::Enrolled) --w.enrolled_now[i];
}

}  // namespace detail

/// Advances every Active agent by one period, in ascending agent id.
inline void run_period(World& w, int phase) {
  for (auto& agent : w.agents)
    if (agent.active()) detail::step_agent(w, agent, phase);
}

struct TerminalRecord {
  std::size_t agent_id = 0;
  std::size_t archetype = 0;
  Outcome outcome = Outcome::Active;
  DropoutTrigger trigger = DropoutTrigger::None;
  DropoutCause cause = DropoutCause::None;
  int expiries = 0;
  int exam_failures = 0;
  int heavy_failure_courses = 0;  // courses at or above the academic failure threshold
  int credited = 0;
  int pending_finals = 0;
  int time_to_event = 0;
  bool censored = false;
  double stress = 0.0;
  double belonging = 0.0;

  friend bool operator==(const TerminalRecord&, const TerminalRecord&) = default;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  int horizon = 0;
  std::vector<TerminalRecord> records;
  std::vector<EventLog> logs;  // empty unless requested
};

struct ExperimentResult {
  std::vector<std::string> archetype_ids;
  int horizon = 0;
  std::vector<ReplicationResult> replications;  // ascending seed

  std::size_t record_count() const {
    std::size_t n = 0;
    for (const auto& r : replications) n += r.records.size();
    return n;
  }
};

inline TerminalRecord terminal_record(const AgentState& a, int horizon, const DynamicsParams& dp,
                                      std::size_t n_courses) {
  TerminalRecord t;
  t.agent_id = a.agent_id;
  t.archetype = a.archetype;
  t.outcome = a.outcome;
  t.trigger = a.trigger;
  t.cause = a.cause;
  t.expiries = a.events.expiry_count();
  t.exam_failures = a.events.count(EventType::ExamFailed);
  const auto f = a.events.failures_by_course(n_courses);
  t.heavy_failure_courses = static_cast<int>(
      std::count_if(f.begin(), f.end(), [&](int x) { return x >= dp.academic_failure_threshold; }));
  t.credited = a.count_in(CourseState::Credited);
  t.pending_finals = a.pending_finals();
  t.censored = a.outcome == Outcome::Active;
  t.time_to_event = t.censored ? horizon : a.time_to_event;
  t.stress = a.stress;
  t.belonging = a.belonging;
  return t;
}

/// Runs the full horizon for one seed. Bitwise deterministic in
/// (inputs, seed).
inline ReplicationResult run_replication(const Curriculum& cur,
                                         const std::vector<Archetype>& archetypes,
                                         const Scenario& s, std::uint64_t seed,
                                         bool keep_event_logs = false) {
  World w = make_world(cur, archetypes, s, seed);
  for (int phase = 0; phase < w.calendar.horizon; ++phase) run_period(w, phase);
  ReplicationResult out;
  out.seed = seed;
  out.horizon = w.calendar.horizon;
  out.records.reserve(w.agents.size());
  for (const auto& a : w.agents)
    out.records.push_back(terminal_record(a, w.calendar.horizon, w.rules.dynamics, cur.size()));
  if (keep_event_logs)
    for (auto& a : w.agents) out.logs.push_back(std::move(a.events));
  return out;
}

/// Runs every seed (duplicates collapsed) on up to `jobs` threads. The
/// result is ordered by seed, so it does not depend on scheduling or on the
/// order of `seeds`.
inline ExperimentResult run_experiment(const Curriculum& cur,
                                       const std::vector<Archetype>& archetypes,
                                       const Scenario& s, std::vector<std::uint64_t> seeds,
                                       int jobs = 1, bool keep_event_logs = false) {
  if (seeds.empty()) throw Error(ErrorKind::ConfigInvalid, "no seeds given");
  s.validate();
  validate(archetypes);
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());

  ExperimentResult ex;
  for (const auto& a : archetypes) ex.archetype_ids.push_back(a.id);
  ex.horizon = s.calendar.horizon;
  ex.replications.resize(seeds.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t k = next++; k < seeds.size(); k = next++) {
      try {
        ex.replications[k] = run_replication(cur, archetypes, s, seeds[k], keep_event_logs);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(seeds.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return ex;
}

}  // namespace regtrap
