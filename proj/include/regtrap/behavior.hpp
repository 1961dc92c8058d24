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

// Bounded-rational choice: which courses to work on this period, and which
// pending finals to sit in an exam window.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "regtrap/calendar.hpp"
#include "regtrap/curriculum.hpp"
#include "regtrap/error.hpp"
#include "regtrap/population.hpp"

namespace regtrap {

struct UtilityWeights {
  double w1 = 2.0;        // urgency
  double w2 = 1.5;        // bottleneck
  double w3 = 0.5;        // workload
  double epsilon = 0.1;
  double noise_sd = 0.1;

  void validate() const {
    if (w1 < 0 || w2 < 0 || w3 < 0 || noise_sd < 0)
      throw Error(ErrorKind::ConfigInvalid, "utility weights must be nonnegative");
    if (!(epsilon > 0)) throw Error(ErrorKind::ConfigInvalid, "epsilon must be > 0");
  }
};

/// Scenario-derived knobs the choice model needs.
struct ChoiceRules {
  int t_exp = 2;
  bool expired_priority = false;       // bridging support: +w2 for re-enrolling expired courses
  std::size_t exact_limit = 20;        // exact search up to this many candidates
  std::size_t bottleneck_threshold = 3;
};

inline double utility_strategic(const CourseParams& c, bool bottleneck, double ttl,
                                const UtilityWeights& w, double noise) {
  return w.w1 / (ttl + w.epsilon) + (bottleneck ? w.w2 : 0.0) - w.w3 / c.workload + noise;
}

inline double utility_myopic(const CourseParams& c, double noise) {
  return 1.0 / (c.difficulty * c.workload) + noise;
}

/// Extra urgency a two-period planner sees for a pending final: the urgency
/// term it will carry one window from now if left unsat. Applied at every
/// TTL so urgency keeps rising as the deadline nears.
inline double lookahead_bonus(int ttl, const UtilityWeights& w) {
  return w.w1 / (static_cast<double>(ttl - 1) + w.epsilon);
}

/// Utility of course `i` for an agent of archetype `a` given its status.
/// Non-Regular courses carry no urgency (TTL taken as T_exp).
inline double course_utility(const Archetype& a, const Curriculum& cur, std::size_t i,
                             const CourseStatus& st, const UtilityWeights& w,
                             const ChoiceRules& rules, double noise) {
  const CourseParams& c = cur.course(i);
  double u;
  if (a.myopic()) {
    u = utility_myopic(c, noise);
  } else {
    const bool regular = st.state == CourseState::Regular;
    const double ttl = regular ? static_cast<double>(st.ttl) : static_cast<double>(rules.t_exp);
    u = utility_strategic(c, cur.is_bottleneck(i, rules.bottleneck_threshold), ttl, w, noise);
    if (a.tau >= 2 && regular) u += lookahead_bonus(st.ttl, w);
  }
  if (rules.expired_priority && st.state == CourseState::Expired) u += w.w2;
  return u;
}

/// Stage 1: courses the agent may work on this period, ascending position.
///
/// Candidates are Null, Expired or Enrolled courses with all prerequisites
/// credited and offered this semester. When the agent holds more pending
/// finals than its archetype's max_final_backlog, only courses already
/// Enrolled remain eligible.
inline std::vector<std::size_t> feasible_set(const AgentState& agent, const Archetype& a,
                                             const Curriculum& cur, int phase,
                                             const PhaseCalendar& cal) {
  const bool blocked = agent.pending_finals() > a.max_final_backlog;
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    const CourseState s = agent.statuses[i].state;
    if (s == CourseState::Credited || s == CourseState::Regular) continue;
    if (blocked && s != CourseState::Enrolled) continue;
    if (!offered_in(cur.course(i), phase, cal)) continue;
    if (!cur.prerequisites_met(agent.statuses, i)) continue;
    out.push_back(i);
  }
  return out;
}

struct PortfolioItem {
  std::size_t course = 0;
  double workload = 0.0;
  double utility = 0.0;
};

namespace detail {

// Depth-first include/exclude search with a fractional-relaxation bound.
// Exact: the bound never underestimates the best completion.
class PortfolioSearch {
 public:
  PortfolioSearch(std::vector<PortfolioItem> items, double capacity)
      : items_(std::move(items)), capacity_(capacity), take_(items_.size(), false) {}

  std::vector<std::size_t> run() {
    recurse(0, 0.0, 0.0);
    std::vector<std::size_t> out;
    for (std::size_t k : best_set_) out.push_back(items_[k].course);
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  double bound(std::size_t k, double load, double value) const {
    double room = capacity_ - load;
    for (; k < items_.size(); ++k) {
      if (items_[k].workload <= room) {
        room -= items_[k].workload;
        value += items_[k].utility;
      } else {
        return value + items_[k].utility * room / items_[k].workload;
      }
    }
    return value;
  }

  void recurse(std::size_t k, double load, double value) {
    if (value > best_) {
      best_ = value;
      best_set_.clear();
      for (std::size_t j = 0; j < k; ++j)
        if (take_[j]) best_set_.push_back(j);
    }
    if (k == items_.size()) return;
    if (bound(k, load, value) <= best_) return;
    if (load + items_[k].workload <= capacity_) {
      take_[k] = true;
      recurse(k + 1, load + items_[k].workload, value + items_[k].utility);
      take_[k] = false;
    }
    recurse(k + 1, load, value);
  }

  std::vector<PortfolioItem> items_;
  double capacity_;
  std::vector<bool> take_;
  double best_ = 0.0;
  std::vector<std::size_t> best_set_;
};

inline void order_by_density(std::vector<PortfolioItem>& items) {
  std::stable_sort(items.begin(), items.end(), [](const PortfolioItem& a, const PortfolioItem& b) {
    const double da = a.utility / a.workload, db = b.utility / b.workload;
    if (da != db) return da > db;
    return a.course < b.course;
  });
}

}  // namespace detail

/// Greedy by utility/workload density; the approximation used above the
/// exact-search limit.
inline std::vector<std::size_t> select_portfolio_greedy(std::vector<PortfolioItem> items,
                                                        double capacity) {
  std::erase_if(items, [](const PortfolioItem& p) { return !(p.utility > 0.0); });
  detail::order_by_density(items);
  std::vector<std::size_t> out;
  double load = 0.0;
  for (const auto& p : items)
    if (load + p.workload <= capacity) {
      load += p.workload;
      out.push_back(p.course);
    }
  std::sort(out.begin(), out.end());
  return out;
}

/// Stage 3: utility-maximal subset with total workload <= capacity.
///
/// Exact for up to `exact_limit` candidates, greedy by density above. Items
/// with nonpositive utility never improve a portfolio and are dropped, so
/// among equal-valued portfolios the smaller one wins.
inline std::vector<std::size_t> select_portfolio(std::vector<PortfolioItem> items, double capacity,
                                                 std::size_t exact_limit = 20) {
  if (items.size() > exact_limit) return select_portfolio_greedy(std::move(items), capacity);
  std::erase_if(items, [](const PortfolioItem& p) { return !(p.utility > 0.0); });
  detail::order_by_density(items);
  return detail::PortfolioSearch(std::move(items), capacity).run();
}

inline double portfolio_workload(const Curriculum& cur, std::span<const std::size_t> courses) {
  double s = 0.0;
  for (std::size_t i : courses) s += cur.course(i).workload;
  return s;
}

struct ExamCandidate {
  std::size_t course = 0;
  double score = 0.0;
};

/// Up to `slots` candidates by descending score, ties by ascending course.
/// The result is in ascending course order.
inline std::vector<std::size_t> select_exams(std::vector<ExamCandidate> candidates, int slots) {
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const ExamCandidate& a, const ExamCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.course < b.course;
                   });
  const std::size_t take = std::min(candidates.size(), static_cast<std::size_t>(std::max(0, slots)));
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < take; ++k) out.push_back(candidates[k].course);
  std::sort(out.begin(), out.end());
  return out;
}

/// Scores the agent's pending finals with its own utility and picks `slots`.
/// `noise` is indexed by course position.
inline std::vector<std::size_t> select_exams(const AgentState& agent, const Archetype& a,
                                             const Curriculum& cur, int slots,
                                             const UtilityWeights& w, const ChoiceRules& rules,
                                             std::span<const double> noise) {
  std::vector<ExamCandidate> cands;
  for (std::size_t i = 0; i < cur.size(); ++i)
    if (agent.statuses[i].state == CourseState::Regular)
      cands.push_back({i, course_utility(a, cur, i, agent.statuses[i], w, rules, noise[i])});
  return select_exams(std::move(cands), slots);
}

/// Builds portfolio candidates for `feasible` and runs the selection.
inline std::vector<std::size_t> select_portfolio(const AgentState& agent, const Archetype& a,
                                                 const Curriculum& cur,
                                                 std::span<const std::size_t> feasible,
                                                 const UtilityWeights& w, const ChoiceRules& rules,
                                                 std::span<const double> noise) {
  std::vector<PortfolioItem> items;
  items.reserve(feasible.size());
  for (std::size_t i : feasible)
    items.push_back({i, cur.course(i).workload,
                     course_utility(a, cur, i, agent.statuses[i], w, rules, noise[i])});
  return select_portfolio(std::move(items), a.e_max, rules.exact_limit);
}

}  // namespace regtrap
