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

// The regularity state machine for one (agent, course) pair.
//
//   Null -> Enrolled -> Regular -> Credited
//                          |
//                          +-> Expired -> Enrolled (learning reset)
//
// Regular carries a TTL counted in exam windows. Expiry looks only at the
// state and the TTL, never at learning progress.

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>

#include "regtrap/error.hpp"

namespace regtrap {

enum class CourseState { Null, Enrolled, Regular, Credited, Expired };

inline std::string_view to_string(CourseState s) {
  switch (s) {
    case CourseState::Null: return "Null";
    case CourseState::Enrolled: return "Enrolled";
    case CourseState::Regular: return "Regular";
    case CourseState::Credited: return "Credited";
    case CourseState::Expired: return "Expired";
  }
  return "?";
}

struct CourseStatus {
  CourseState state = CourseState::Null;
  int ttl = 0;
  double learning = 0.0;
  int exam_failures = 0;
  int enrolment_count = 0;

  friend bool operator==(const CourseStatus&, const CourseStatus&) = default;
};

namespace regime {

namespace detail {
[[noreturn]] inline void illegal(std::string_view op, CourseState from) {
  throw Error(ErrorKind::IllegalTransition,
              std::string(op) + " from " + std::string(to_string(from)));
}
}  // namespace detail

/// Null|Expired -> Enrolled. Re-enrolment after expiry wipes learning.
inline CourseStatus enroll(CourseStatus s) {
  if (s.state != CourseState::Null && s.state != CourseState::Expired)
    detail::illegal("enroll", s.state);
  if (s.state == CourseState::Expired) s.learning = 0.0;
  s.state = CourseState::Enrolled;
  s.ttl = 0;
  ++s.enrolment_count;
  return s;
}

/// Enrolled -> Regular with a fresh TTL. The learning threshold is the
/// caller's check.
inline CourseStatus regularize(CourseStatus s, int ttl_windows) {
  if (s.state != CourseState::Enrolled) detail::illegal("regularize", s.state);
  if (ttl_windows < 1)
    throw Error(ErrorKind::ParameterOutOfRange, "T_exp must be positive");
  s.state = CourseState::Regular;
  s.ttl = ttl_windows;
  return s;
}

/// One exam window elapses for a pending regularity.
inline CourseStatus decay_ttl(CourseStatus s, bool phase_is_exam_window) {
  if (s.state == CourseState::Regular && phase_is_exam_window) s.ttl = std::max(0, s.ttl - 1);
  return s;
}

inline std::pair<CourseStatus, bool> check_expiry(CourseStatus s) {
  if (s.state == CourseState::Regular && s.ttl == 0) {
    s.state = CourseState::Expired;
    return {s, true};
  }
  return {s, false};
}

/// Regular -> Credited (final exam passed). Credited is terminal.
inline CourseStatus credit(CourseStatus s) {
  if (s.state != CourseState::Regular) detail::illegal("credit", s.state);
  s.state = CourseState::Credited;
  s.ttl = 0;
  return s;
}

}  // namespace regime
}  // namespace regtrap
