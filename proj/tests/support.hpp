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

#include <atomic>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "regtrap/curriculum.hpp"
#include "regtrap/population.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap::test {

inline std::string source_path(const std::string& rel) {
  return std::string(REGTRAP_SOURCE_DIR) + "/" + rel;
}

inline const Curriculum& reference_curriculum() {
  static const Curriculum cur = load_curriculum(source_path("data/curriculum_reference.csv"));
  return cur;
}

inline const std::vector<Archetype>& reference_archetypes() {
  static const auto a = load_archetypes(source_path("data/archetypes_reference.csv"));
  return a;
}

inline CourseParams course(std::string id, double difficulty = 0.5, double workload = 2.0,
                           double pass_rate = 0.7, double reg_time = 1.5,
                           std::vector<std::string> prereqs = {}, Parity offered = Parity::All) {
  CourseParams c;
  c.id = id;
  c.name = std::move(id);
  c.difficulty = difficulty;
  c.workload = workload;
  c.pass_rate = pass_rate;
  c.reg_time = reg_time;
  c.prerequisites = std::move(prereqs);
  c.offered = offered;
  return c;
}

inline Archetype archetype(std::string id, int tau, double mu = 0.5, double b0 = 0.7,
                           double sigma = 0.1, double e_max = 10.0, int backlog = 4,
                           double weight = 1.0) {
  Archetype a;
  a.id = std::move(id);
  a.tau = tau;
  a.mu_abil = mu;
  a.b0 = b0;
  a.sigma_stress = sigma;
  a.e_max = e_max;
  a.max_final_backlog = backlog;
  a.weight = weight;
  return a;
}

/// Three easy, unconstrained courses: every archetype can finish them.
inline Curriculum micro_curriculum() {
  return Curriculum::build({course("A", 0.3, 1.5, 0.95, 1.0), course("B", 0.3, 1.5, 0.95, 1.0),
                            course("C", 0.3, 1.5, 0.95, 1.0, {"A"})});
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("regtrap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string operator/(const std::string& rel) const { return (path_ / rel).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace regtrap::test
