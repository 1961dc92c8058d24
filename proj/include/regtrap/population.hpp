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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "regtrap/error.hpp"
#include "regtrap/regime.hpp"
#include "regtrap/rng.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

struct Archetype {
  std::string id;
  int tau = 0;                 // planning horizon, {0, 1, 2}
  double mu_abil = 0.5;        // [0.3, 0.8]
  double b0 = 0.6;             // [0.4, 0.9]
  double sigma_stress = 0.1;   // [0.05, 0.15]
  double e_max = 10.0;         // [8, 14]
  int max_final_backlog = 4;   // > 0
  double weight = 1.0;         // (0, 1]

  bool myopic() const { return tau == 0; }
};

inline std::string_view horizon_label(int tau) {
  switch (tau) {
    case 0: return "Myopic";
    case 1: return "Moderate";
    default: return "Strategic";
  }
}

inline void validate(const Archetype& a) {
  auto fail = [&](std::string_view field, const std::string& v, std::string_view range) {
    throw Error(ErrorKind::ParameterOutOfRange, "archetype '" + a.id + "': " +
                                                    std::string(field) + " = " + v + " outside " +
                                                    std::string(range));
  };
  if (a.tau < 0 || a.tau > 2) fail("tau", std::to_string(a.tau), "{0,1,2}");
  if (!(a.mu_abil >= 0.3 && a.mu_abil <= 0.8))
    fail("mu_abil", table::exact(a.mu_abil), "[0.3, 0.8]");
  if (!(a.b0 >= 0.4 && a.b0 <= 0.9)) fail("b0", table::exact(a.b0), "[0.4, 0.9]");
  if (!(a.sigma_stress >= 0.05 && a.sigma_stress <= 0.15))
    fail("sigma_stress", table::exact(a.sigma_stress), "[0.05, 0.15]");
  if (!(a.e_max >= 8.0 && a.e_max <= 14.0)) fail("e_max", table::exact(a.e_max), "[8, 14]");
  if (a.max_final_backlog < 1)
    fail("max_final_backlog", std::to_string(a.max_final_backlog), "[1, inf)");
  if (!(a.weight > 0.0 && a.weight <= 1.0)) fail("weight", table::exact(a.weight), "(0, 1]");
}

inline constexpr double kWeightTolerance = 1e-9;

/// Validates a whole archetype list, including the weight partition.
inline void validate(const std::vector<Archetype>& list) {
  if (list.empty()) throw Error(ErrorKind::ConfigInvalid, "no archetypes");
  double sum = 0.0;
  for (const auto& a : list) {
    validate(a);
    sum += a.weight;
  }
  for (std::size_t i = 0; i < list.size(); ++i)
    for (std::size_t j = i + 1; j < list.size(); ++j)
      if (list[i].id == list[j].id)
        throw Error(ErrorKind::ConfigInvalid, "duplicate archetype id '" + list[i].id + "'");
  if (std::abs(sum - 1.0) > kWeightTolerance)
    throw Error(ErrorKind::WeightsDoNotSumToOne, "archetype weights sum to " + table::exact(sum));
}

inline std::vector<Archetype> parse_archetypes(std::string_view text, std::string_view source) {
  const table::Table t = table::parse(text, source);
  const std::size_t c_id = t.column("id", source), c_tau = t.column("tau", source),
                    c_mu = t.column("mu_abil", source), c_b0 = t.column("b0", source),
                    c_ss = t.column("sigma_stress", source), c_em = t.column("e_max", source),
                    c_bl = t.column("max_final_backlog", source),
                    c_w = t.column("weight", source);
  std::vector<Archetype> out;
  for (const auto& r : t.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(r.line);
    Archetype a;
    a.id = r.cells[c_id];
    a.tau = static_cast<int>(table::to_int(r.cells[c_tau], where + " tau"));
    a.mu_abil = table::to_double(r.cells[c_mu], where + " mu_abil");
    a.b0 = table::to_double(r.cells[c_b0], where + " b0");
    a.sigma_stress = table::to_double(r.cells[c_ss], where + " sigma_stress");
    a.e_max = table::to_double(r.cells[c_em], where + " e_max");
    a.max_final_backlog =
        static_cast<int>(table::to_int(r.cells[c_bl], where + " max_final_backlog"));
    a.weight = table::to_double(r.cells[c_w], where + " weight");
    out.push_back(std::move(a));
  }
  validate(out);
  const double sum = std::accumulate(out.begin(), out.end(), 0.0,
                                     [](double s, const Archetype& a) { return s + a.weight; });
  // Leave weights that already sum to 1 up to rounding alone, so that
  // written tables read back bit for bit.
  if (std::abs(sum - 1.0) > 1e-12)
    for (auto& a : out) a.weight /= sum;
  return out;
}

inline std::vector<Archetype> load_archetypes(const std::string& path) {
  return parse_archetypes(table::read_file(path), path);
}

inline std::string write_archetypes(const std::vector<Archetype>& list) {
  table::Writer w{"id", "tau", "mu_abil", "b0", "sigma_stress", "e_max", "max_final_backlog",
                  "weight"};
  for (const auto& a : list)
    w.row({a.id, std::to_string(a.tau), table::exact(a.mu_abil), table::exact(a.b0),
           table::exact(a.sigma_stress), table::exact(a.e_max),
           std::to_string(a.max_final_backlog), table::exact(a.weight)});
  return w.str();
}

// ---------------------------------------------------------------------------
// Per-agent state

enum class EventType {
  Enrolled,
  Reenrolled,
  Regularized,
  ExamPassed,
  ExamFailed,
  Expired,
  Overloaded,
  Withdrew,
};

enum class DropoutTrigger { None, Depletion, Stagnation, Voluntary, Exogenous };
enum class DropoutCause { None, Normative, Academic, Other };
enum class Outcome { Active, Graduated, Dropout };

inline std::string_view to_string(EventType e) {
  switch (e) {
    case EventType::Enrolled: return "Enrolled";
    case EventType::Reenrolled: return "Reenrolled";
    case EventType::Regularized: return "Regularized";
    case EventType::ExamPassed: return "ExamPassed";
    case EventType::ExamFailed: return "ExamFailed";
    case EventType::Expired: return "Expired";
    case EventType::Overloaded: return "Overloaded";
    case EventType::Withdrew: return "Withdrew";
  }
  return "?";
}

inline std::string_view to_string(DropoutTrigger t) {
  switch (t) {
    case DropoutTrigger::None: return "none";
    case DropoutTrigger::Depletion: return "depletion";
    case DropoutTrigger::Stagnation: return "stagnation";
    case DropoutTrigger::Voluntary: return "voluntary";
    case DropoutTrigger::Exogenous: return "exogenous";
  }
  return "?";
}

inline std::string_view to_string(DropoutCause c) {
  switch (c) {
    case DropoutCause::None: return "none";
    case DropoutCause::Normative: return "normative";
    case DropoutCause::Academic: return "academic";
    case DropoutCause::Other: return "other";
  }
  return "?";
}

inline std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Active: return "active";
    case Outcome::Graduated: return "graduated";
    case Outcome::Dropout: return "dropout";
  }
  return "?";
}

inline constexpr int kNoCourse = -1;

struct Event {
  int phase = 0;
  EventType type = EventType::Enrolled;
  int course = kNoCourse;
  DropoutTrigger trigger = DropoutTrigger::None;

  friend bool operator==(const Event&, const Event&) = default;
};

/// Append-only, phase-ordered history. Attribution reads only from here.
class EventLog {
 public:
  void append(const Event& e) {
    if (!events_.empty() && e.phase < events_.back().phase)
      throw Error(ErrorKind::IllegalTransition, "event log phases must be nondecreasing");
    events_.push_back(e);
  }

  const std::vector<Event>& events() const { return events_; }
  std::size_t size() const { return events_.size(); }
  auto begin() const { return events_.begin(); }
  auto end() const { return events_.end(); }

  int count(EventType t) const {
    return static_cast<int>(
        std::count_if(events_.begin(), events_.end(), [t](const Event& e) { return e.type == t; }));
  }

  int expiry_count() const { return count(EventType::Expired); }

  /// ExamFailed counts per course position.
  std::vector<int> failures_by_course(std::size_t n_courses) const {
    std::vector<int> f(n_courses, 0);
    for (const auto& e : events_)
      if (e.type == EventType::ExamFailed && e.course >= 0 &&
          static_cast<std::size_t>(e.course) < n_courses)
        ++f[static_cast<std::size_t>(e.course)];
    return f;
  }

 private:
  std::vector<Event> events_;
};

struct AgentState {
  std::size_t agent_id = 0;
  std::size_t archetype = 0;  // index into the archetype list
  double stress = 0.0;
  double belonging = 0.0;
  bool fatigued = false;
  std::vector<CourseStatus> statuses;
  EventLog events;
  Outcome outcome = Outcome::Active;
  DropoutTrigger trigger = DropoutTrigger::None;
  DropoutCause cause = DropoutCause::None;
  int periods_without_progress = 0;
  int semesters_enrolled = 0;
  int time_to_event = 0;  // periods elapsed when the outcome was fixed

  bool active() const { return outcome == Outcome::Active; }

  int count_in(CourseState s) const {
    return static_cast<int>(std::count_if(statuses.begin(), statuses.end(),
                                          [s](const CourseStatus& c) { return c.state == s; }));
  }

  /// Regular-but-uncredited courses (pending finals).
  int pending_finals() const { return count_in(CourseState::Regular); }
};

/// Largest-remainder apportionment of `n` over `weights`. Remainders are
/// handed out by descending fractional part, then by ascending `order_key`.
inline std::vector<std::size_t> apportion(const std::vector<double>& weights, std::size_t n,
                                          const std::vector<std::string>& order_key) {
  const std::size_t k = weights.size();
  std::vector<std::size_t> counts(k);
  std::vector<double> frac(k);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double quota = weights[i] * static_cast<double>(n);
    // Guard against quotas like 108.99999999999999 that are integral in exact arithmetic.
    double whole = std::floor(quota + 1e-9);
    counts[i] = static_cast<std::size_t>(whole);
    frac[i] = std::max(0.0, quota - whole);
    assigned += counts[i];
  }
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return order_key[a] < order_key[b];
  });
  for (std::size_t j = 0; assigned < n; j = (j + 1) % k) {
    ++counts[idx[j]];
    ++assigned;
  }
  return counts;
}

/// Deterministic population: agents are numbered contiguously in archetype
/// list order, each starting with zero stress and its archetype's B0.
inline std::vector<AgentState> spawn_population(const std::vector<Archetype>& archetypes,
                                                std::size_t n_agents, std::size_t n_courses) {
  if (n_agents < 1) throw Error(ErrorKind::ConfigInvalid, "n_agents must be >= 1");
  std::vector<double> w;
  std::vector<std::string> ids;
  for (const auto& a : archetypes) {
    w.push_back(a.weight);
    ids.push_back(a.id);
  }
  const auto counts = apportion(w, n_agents, ids);
  std::vector<AgentState> agents;
  agents.reserve(n_agents);
  for (std::size_t a = 0; a < archetypes.size(); ++a)
    for (std::size_t k = 0; k < counts[a]; ++k) {
      AgentState s;
      s.agent_id = agents.size();
      s.archetype = a;
      s.belonging = archetypes[a].b0;
      s.statuses.assign(n_courses, CourseStatus{});
      agents.push_back(std::move(s));
    }
  return agents;
}

/// Period ability from a standard-normal draw `z`, clamped to [0, 1].
inline double ability_from_draw(double mu_abil, double sigma_abil, double z) {
  return std::clamp(mu_abil + sigma_abil * z, 0.0, 1.0);
}

inline double sample_ability(const Archetype& a, Rng& rng, double sigma_abil = 0.1) {
  return ability_from_draw(a.mu_abil, sigma_abil, rng.normal());
}

}  // namespace regtrap
