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

#include <stdexcept>
#include <string>
#include <string_view>

namespace regtrap {

enum class ErrorKind {
  CycleDetected,
  DanglingPrerequisite,
  ParameterOutOfRange,
  UnknownCourse,
  WeightsDoNotSumToOne,
  IllegalTransition,
  ConfigInvalid,
  EmptyInput,
  InsufficientReplications,
  DegenerateInput,
  ZeroMarginal,
  Io,
  ManifestMismatch,
  IncompatibleInputs,
};

inline std::string_view to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::CycleDetected: return "CycleDetected";
    case ErrorKind::DanglingPrerequisite: return "DanglingPrerequisite";
    case ErrorKind::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorKind::UnknownCourse: return "UnknownCourse";
    case ErrorKind::WeightsDoNotSumToOne: return "WeightsDoNotSumToOne";
    case ErrorKind::IllegalTransition: return "IllegalTransition";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InsufficientReplications: return "InsufficientReplications";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::ZeroMarginal: return "ZeroMarginal";
    case ErrorKind::Io: return "Io";
    case ErrorKind::ManifestMismatch: return "ManifestMismatch";
    case ErrorKind::IncompatibleInputs: return "IncompatibleInputs";
  }
  return "Unknown";
}

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace regtrap
