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
#include <cstddef>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "regtrap/calendar.hpp"
#include "regtrap/error.hpp"
#include "regtrap/regime.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

enum class Parity { Odd, Even, All };

inline std::string_view to_string(Parity p) {
  switch (p) {
    case Parity::Odd: return "odd";
    case Parity::Even: return "even";
    case Parity::All: return "all";
  }
  return "?";
}

inline Parity parity_from_string(std::string_view s) {
  if (s == "odd") return Parity::Odd;
  if (s == "even") return Parity::Even;
  if (s == "all") return Parity::All;
  throw Error(ErrorKind::ParameterOutOfRange,
              "offered_parity must be odd, even or all, got '" + std::string(s) + "'");
}

struct CourseParams {
  std::string id;
  std::string name;
  double difficulty = 0.5;     // [0.3, 0.8]
  double workload = 2.0;       // course-units, [1.5, 3.5]
  double pass_rate = 0.75;     // [0.5, 1.0]
  double reg_time = 2.0;       // periods, > 0
  std::vector<std::string> prerequisites;
  Parity offered = Parity::All;
};

/// Throws ParameterOutOfRange naming the first field outside its range.
inline void validate(const CourseParams& c) {
  auto check = [&](std::string_view field, double v, double lo, double hi) {
    if (!(v >= lo && v <= hi))
      throw Error(ErrorKind::ParameterOutOfRange,
                  "course '" + c.id + "': " + std::string(field) + " = " + table::exact(v) +
                      " outside [" + table::exact(lo) + ", " + table::exact(hi) + "]");
  };
  check("difficulty", c.difficulty, 0.3, 0.8);
  check("workload", c.workload, 1.5, 3.5);
  check("pass_rate", c.pass_rate, 0.5, 1.0);
  if (!(c.reg_time > 0.0))
    throw Error(ErrorKind::ParameterOutOfRange,
                "course '" + c.id + "': reg_time_periods = " + table::exact(c.reg_time) +
                    " must be > 0");
}

/// Immutable prerequisite DAG. Courses are kept in ascending id order and
/// addressed by that position everywhere else in the library.
class Curriculum {
 public:
  static Curriculum build(std::vector<CourseParams> courses) {
    if (courses.empty()) throw Error(ErrorKind::ConfigInvalid, "curriculum has no courses");
    std::sort(courses.begin(), courses.end(),
              [](const CourseParams& a, const CourseParams& b) { return a.id < b.id; });
    Curriculum cur;
    for (std::size_t i = 0; i < courses.size(); ++i) {
      validate(courses[i]);
      if (!cur.index_.emplace(courses[i].id, i).second)
        throw Error(ErrorKind::ConfigInvalid, "duplicate course id '" + courses[i].id + "'");
    }
    cur.prereqs_.resize(courses.size());
    cur.dependents_.resize(courses.size());
    for (std::size_t i = 0; i < courses.size(); ++i) {
      auto& c = courses[i];
      std::sort(c.prerequisites.begin(), c.prerequisites.end());
      c.prerequisites.erase(std::unique(c.prerequisites.begin(), c.prerequisites.end()),
                            c.prerequisites.end());
      for (const auto& p : c.prerequisites) {
        if (p == c.id)
          throw Error(ErrorKind::CycleDetected, "cycle: " + c.id + " -> " + c.id);
        auto it = cur.index_.find(p);
        if (it == cur.index_.end())
          throw Error(ErrorKind::DanglingPrerequisite,
                      "course '" + c.id + "' lists unknown prerequisite '" + p + "'");
        cur.prereqs_[i].push_back(it->second);
        cur.dependents_[it->second].push_back(i);
        ++cur.edge_count_;
      }
    }
    cur.courses_ = std::move(courses);
    cur.topo_ = cur.kahn_order();
    return cur;
  }

  std::size_t size() const { return courses_.size(); }
  std::size_t edge_count() const { return edge_count_; }
  const CourseParams& course(std::size_t i) const { return courses_.at(i); }
  const std::vector<CourseParams>& courses() const { return courses_; }
  std::span<const std::size_t> prerequisites_of(std::size_t i) const { return prereqs_.at(i); }
  std::span<const std::size_t> dependents_of(std::size_t i) const { return dependents_.at(i); }
  const std::vector<std::size_t>& topological_order() const { return topo_; }

  std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end())
      throw Error(ErrorKind::UnknownCourse, "unknown course '" + std::string(id) + "'");
    return it->second;
  }

  bool contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

  /// Number of courses that list `i` as a prerequisite.
  std::size_t downstream_count(std::size_t i) const { return dependents_.at(i).size(); }
  std::size_t downstream_count(std::string_view id) const { return downstream_count(index_of(id)); }

  bool is_bottleneck(std::size_t i, std::size_t threshold = 3) const {
    return downstream_count(i) >= threshold;
  }

  /// True iff every prerequisite of course `i` is Credited in `statuses`
  /// (indexed by course position).
  bool prerequisites_met(std::span<const CourseStatus> statuses, std::size_t i) const {
    for (std::size_t p : prereqs_.at(i))
      if (statuses[p].state != CourseState::Credited) return false;
    return true;
  }

  bool prerequisites_met(const std::map<std::string, CourseStatus>& statuses,
                         std::string_view id) const {
    const std::size_t i = index_of(id);
    for (std::size_t p : prereqs_[i]) {
      auto it = statuses.find(courses_[p].id);
      if (it == statuses.end() || it->second.state != CourseState::Credited) return false;
    }
    return true;
  }

 private:
  std::vector<std::size_t> kahn_order() const {
    const std::size_t n = courses_.size();
    std::vector<std::size_t> indeg(n);
    for (std::size_t i = 0; i < n; ++i) indeg[i] = prereqs_[i].size();
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i)
      if (indeg[i] == 0) ready.push(i);
    std::vector<std::size_t> order;
    while (!ready.empty()) {
      const std::size_t u = ready.top();
      ready.pop();
      order.push_back(u);
      for (std::size_t v : dependents_[u])
        if (--indeg[v] == 0) ready.push(v);
    }
    if (order.size() != n) throw Error(ErrorKind::CycleDetected, "cycle: " + describe_cycle(indeg));
    return order;
  }

  // Walks prerequisite edges among the nodes Kahn could not remove; every
  // such node has a remaining prerequisite, so the walk must revisit a node.
  std::string describe_cycle(const std::vector<std::size_t>& indeg) const {
    std::size_t start = 0;
    while (indeg[start] == 0) ++start;
    std::vector<int> seen_at(courses_.size(), -1);
    std::vector<std::size_t> path;
    std::size_t u = start;
    while (seen_at[u] < 0) {
      seen_at[u] = static_cast<int>(path.size());
      path.push_back(u);
      for (std::size_t p : prereqs_[u])
        if (indeg[p] != 0) {
          u = p;
          break;
        }
    }
    // path[seen_at[u]..] is the cycle in prerequisite direction; print it
    // in dependency direction (prerequisite -> dependent).
    std::vector<std::size_t> cyc(path.begin() + seen_at[u], path.end());
    std::reverse(cyc.begin(), cyc.end());
    std::rotate(cyc.begin(), std::min_element(cyc.begin(), cyc.end()), cyc.end());
    std::string s;
    for (std::size_t v : cyc) s += courses_[v].id + " -> ";
    return s + courses_[cyc.front()].id;
  }

  std::vector<CourseParams> courses_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::size_t>> prereqs_;
  std::vector<std::vector<std::size_t>> dependents_;
  std::vector<std::size_t> topo_;
  std::size_t edge_count_ = 0;
};

inline bool offered_in(const CourseParams& c, int phase_index, const PhaseCalendar& cal) {
  if (c.offered == Parity::All) return true;
  const bool odd_semester = cal.semester_of(phase_index) % 2 == 1;
  return (c.offered == Parity::Odd) == odd_semester;
}

inline const std::vector<std::string>& curriculum_columns() {
  static const std::vector<std::string> cols{"id",       "name",         "difficulty",
                                             "workload", "pass_rate",    "reg_time_periods",
                                             "prerequisites", "offered_parity"};
  return cols;
}

inline Curriculum parse_curriculum(std::string_view text, std::string_view source) {
  const table::Table t = table::parse(text, source);
  if (t.header != curriculum_columns())
    throw Error(ErrorKind::ConfigInvalid,
                std::string(source) + ": curriculum header must be exactly "
                                      "id,name,difficulty,workload,pass_rate,reg_time_periods,"
                                      "prerequisites,offered_parity");
  std::vector<CourseParams> courses;
  for (const auto& r : t.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(r.line);
    CourseParams c;
    c.id = r.cells[0];
    c.name = r.cells[1];
    c.difficulty = table::to_double(r.cells[2], where + " difficulty");
    c.workload = table::to_double(r.cells[3], where + " workload");
    c.pass_rate = table::to_double(r.cells[4], where + " pass_rate");
    c.reg_time = table::to_double(r.cells[5], where + " reg_time_periods");
    const std::string& pre = r.cells[6];
    std::size_t start = 0;
    while (start < pre.size()) {
      auto end = pre.find(';', start);
      if (end == std::string::npos) end = pre.size();
      std::string id = table::trim(std::string_view(pre).substr(start, end - start));
      if (!id.empty()) c.prerequisites.push_back(std::move(id));
      start = end + 1;
    }
    c.offered = parity_from_string(r.cells[7]);
    if (c.id.empty()) throw Error(ErrorKind::ConfigInvalid, where + ": empty course id");
    courses.push_back(std::move(c));
  }
  return Curriculum::build(std::move(courses));
}

inline Curriculum load_curriculum(const std::string& path) {
  return parse_curriculum(table::read_file(path), path);
}

/// Canonical text form: sorted by id, shortest round-trip numbers, no comments.
inline std::string write_curriculum(const Curriculum& cur) {
  table::Writer w(curriculum_columns());
  for (const auto& c : cur.courses()) {
    std::string pre;
    for (const auto& p : c.prerequisites) pre += (pre.empty() ? "" : ";") + p;
    w.row({c.id, c.name, table::exact(c.difficulty), table::exact(c.workload),
           table::exact(c.pass_rate), table::exact(c.reg_time), pre,
           std::string(to_string(c.offered))});
  }
  return w.str();
}

}  // namespace regtrap
