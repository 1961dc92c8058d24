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

// Delimited-text serialization of terminal records and event logs.

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "regtrap/curriculum.hpp"
#include "regtrap/engine.hpp"
#include "regtrap/error.hpp"
#include "regtrap/population.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

namespace detail {

template <typename E, std::size_t N>
E enum_from(std::string_view s, const E (&all)[N], std::string_view what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw Error(ErrorKind::ConfigInvalid, std::string(what) + ": unknown value '" + std::string(s) + "'");
}

inline constexpr Outcome kOutcomes[] = {Outcome::Active, Outcome::Graduated, Outcome::Dropout};
inline constexpr DropoutTrigger kTriggers[] = {DropoutTrigger::None, DropoutTrigger::Depletion,
                                               DropoutTrigger::Stagnation,
                                               DropoutTrigger::Voluntary,
                                               DropoutTrigger::Exogenous};
inline constexpr DropoutCause kCauses[] = {DropoutCause::None, DropoutCause::Normative,
                                           DropoutCause::Academic, DropoutCause::Other};
inline constexpr EventType kEventTypes[] = {
    EventType::Enrolled,   EventType::Reenrolled, EventType::Regularized, EventType::ExamPassed,
    EventType::ExamFailed, EventType::Expired,    EventType::Overloaded,  EventType::Withdrew};

}  // namespace detail

inline const std::vector<std::string>& record_columns() {
  static const std::vector<std::string> cols{
      "agent_id",      "archetype", "outcome",  "trigger",        "cause",
      "expiries",      "exam_failures", "heavy_failure_courses", "credited",
      "pending_finals", "time_to_event", "censored", "stress", "belonging"};
  return cols;
}

/// One replication's terminal records. Archetypes are written by id.
inline std::string write_records(const ReplicationResult& rep,
                                 const std::vector<std::string>& archetype_ids) {
  table::Writer w(record_columns());
  for (const auto& r : rep.records)
    w.row({std::to_string(r.agent_id), archetype_ids.at(r.archetype),
           std::string(to_string(r.outcome)), std::string(to_string(r.trigger)),
           std::string(to_string(r.cause)), std::to_string(r.expiries),
           std::to_string(r.exam_failures), std::to_string(r.heavy_failure_courses),
           std::to_string(r.credited), std::to_string(r.pending_finals),
           std::to_string(r.time_to_event), r.censored ? "1" : "0", table::exact(r.stress),
           table::exact(r.belonging)});
  return w.str();
}

inline std::vector<TerminalRecord> parse_records(std::string_view text, std::string_view source,
                                                 const std::vector<std::string>& archetype_ids) {
  const table::Table t = table::parse(text, source);
  std::vector<std::size_t> c;
  for (const auto& name : record_columns()) c.push_back(t.column(name, source));
  std::vector<TerminalRecord> out;
  for (const auto& row : t.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(row.line);
    auto cell = [&](std::size_t k) -> const std::string& { return row.cells[c[k]]; };
    auto integer = [&](std::size_t k) {
      return static_cast<int>(table::to_int(cell(k), where + " " + record_columns()[k]));
    };
    TerminalRecord r;
    r.agent_id = static_cast<std::size_t>(table::to_int(cell(0), where + " agent_id"));
    auto it = std::find(archetype_ids.begin(), archetype_ids.end(), cell(1));
    if (it == archetype_ids.end())
      throw Error(ErrorKind::ConfigInvalid, where + ": unknown archetype '" + cell(1) + "'");
    r.archetype = static_cast<std::size_t>(it - archetype_ids.begin());
    r.outcome = detail::enum_from(cell(2), detail::kOutcomes, where + " outcome");
    r.trigger = detail::enum_from(cell(3), detail::kTriggers, where + " trigger");
    r.cause = detail::enum_from(cell(4), detail::kCauses, where + " cause");
    r.expiries = integer(5);
    r.exam_failures = integer(6);
    r.heavy_failure_courses = integer(7);
    r.credited = integer(8);
    r.pending_finals = integer(9);
    r.time_to_event = integer(10);
    r.censored = integer(11) != 0;
    r.stress = table::to_double(cell(12), where + " stress");
    r.belonging = table::to_double(cell(13), where + " belonging");
    out.push_back(r);
  }
  return out;
}

/// Every replication in one long table, keyed by seed.
inline std::string write_all_records(const ExperimentResult& ex) {
  std::vector<std::string> cols{"seed"};
  cols.insert(cols.end(), record_columns().begin(), record_columns().end());
  table::Writer w(cols);
  for (const auto& rep : ex.replications) {
    const table::Table t = table::parse(write_records(rep, ex.archetype_ids), "records");
    for (const auto& row : t.rows) {
      std::vector<std::string> cells{std::to_string(rep.seed)};
      cells.insert(cells.end(), row.cells.begin(), row.cells.end());
      w.row(cells);
    }
  }
  return w.str();
}

inline std::string write_events(const ReplicationResult& rep, const Curriculum& cur) {
  table::Writer w{"agent_id", "phase", "event", "course", "trigger"};
  for (std::size_t a = 0; a < rep.logs.size(); ++a)
    for (const auto& e : rep.logs[a])
      w.row({std::to_string(rep.records.at(a).agent_id), std::to_string(e.phase),
             std::string(to_string(e.type)),
             e.course == kNoCourse ? "" : cur.course(static_cast<std::size_t>(e.course)).id,
             e.trigger == DropoutTrigger::None ? "" : std::string(to_string(e.trigger))});
  return w.str();
}

}  // namespace regtrap
