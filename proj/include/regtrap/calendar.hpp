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

#include <string>
#include <vector>

#include "regtrap/error.hpp"

namespace regtrap {

/// Maps phase indices onto semesters and exam windows.
///
/// The default is [teach, teach, exam, exam] repeated over 15 semesters plus
/// one trailing teaching phase, 61 phases in total.
struct PhaseCalendar {
  int phases_per_semester = 4;
  std::vector<bool> exam_window_pattern{false, false, true, true};
  int horizon = 61;

  void validate() const {
    if (horizon < 1) throw Error(ErrorKind::ConfigInvalid, "horizon must be >= 1");
    if (phases_per_semester < 1)
      throw Error(ErrorKind::ConfigInvalid, "phases_per_semester must be >= 1");
    if (static_cast<int>(exam_window_pattern.size()) != phases_per_semester)
      throw Error(ErrorKind::ConfigInvalid,
                  "exam_window_pattern length must equal phases_per_semester");
    bool any = false;
    for (bool b : exam_window_pattern) any = any || b;
    if (!any) throw Error(ErrorKind::ConfigInvalid, "exam_window_pattern has no exam window");
  }

  /// 1-based semester number containing `phase`.
  int semester_of(int phase) const { return phase / phases_per_semester + 1; }

  bool is_exam_window(int phase) const {
    return exam_window_pattern[static_cast<std::size_t>(phase % phases_per_semester)];
  }

  bool closes_semester(int phase) const {
    return phase % phases_per_semester == phases_per_semester - 1;
  }

  int exam_window_count() const {
    int n = 0;
    for (int p = 0; p < horizon; ++p) n += is_exam_window(p) ? 1 : 0;
    return n;
  }
};

/// Pattern text form used in scenario files: "teach,teach,exam,exam".
inline std::string pattern_to_string(const std::vector<bool>& mask) {
  std::string s;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (i) s += ',';
    s += mask[i] ? "exam" : "teach";
  }
  return s;
}

inline std::vector<bool> pattern_from_string(const std::string& text) {
  std::vector<bool> mask;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    const std::string tok = text.substr(start, end - start);
    if (tok == "exam") {
      mask.push_back(true);
    } else if (tok == "teach") {
      mask.push_back(false);
    } else {
      throw Error(ErrorKind::ConfigInvalid,
                  "exam_window_pattern: expected 'teach' or 'exam', got '" + tok + "'");
    }
    start = end + 1;
  }
  return mask;
}

}  // namespace regtrap
