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

// Scenario files are flat JSON objects. Every key is optional and falls back
// to the default printed by `regtrap print-default-config`; unknown keys are
// rejected so that a typo never silently runs the base scenario.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

#include "regtrap/behavior.hpp"
#include "regtrap/calendar.hpp"
#include "regtrap/dynamics.hpp"
#include "regtrap/error.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

inline constexpr int kSchemaVersion = 1;

struct Scenario {
  int n_agents = 1343;
  PhaseCalendar calendar;
  int t_exp = 2;
  int exam_slots = 2;
  bool bridging_support = false;
  bool flexible_scheduling = false;
  double exogenous_hazard = 0.0;
  UtilityWeights weights;
  DynamicsParams dynamics;
  int exact_enumeration_limit = 20;
  int bottleneck_threshold = 3;
  std::map<std::string, int> course_capacity;  // course id -> concurrent enrolment cap
  std::uint64_t analytics_seed = 20250101;
  int bootstrap_draws = 10000;
  double bootstrap_level = 0.95;

  void validate() const {
    if (n_agents < 1) throw Error(ErrorKind::ConfigInvalid, "n_agents must be >= 1");
    calendar.validate();
    if (t_exp < 1 || t_exp > 4) throw Error(ErrorKind::ConfigInvalid, "T_exp must be in {1,2,3,4}");
    if (exam_slots < 1) throw Error(ErrorKind::ConfigInvalid, "exam_slots must be >= 1");
    if (!(exogenous_hazard >= 0.0 && exogenous_hazard <= 1.0))
      throw Error(ErrorKind::ConfigInvalid, "exogenous_hazard must be a probability");
    weights.validate();
    dynamics.validate();
    if (exact_enumeration_limit < 0 || exact_enumeration_limit > 30)
      throw Error(ErrorKind::ConfigInvalid, "exact_enumeration_limit must be in [0, 30]");
    if (bottleneck_threshold < 1)
      throw Error(ErrorKind::ConfigInvalid, "bottleneck_threshold must be >= 1");
    for (const auto& [id, cap] : course_capacity)
      if (cap < 1)
        throw Error(ErrorKind::ConfigInvalid, "course_capacity." + id + " must be >= 1");
    if (bootstrap_draws < 1) throw Error(ErrorKind::ConfigInvalid, "bootstrap_draws must be >= 1");
    if (!(bootstrap_level > 0.0 && bootstrap_level < 1.0))
      throw Error(ErrorKind::ConfigInvalid, "bootstrap_level must lie in (0, 1)");
  }
};

inline constexpr std::string_view kCapacityPrefix = "course_capacity.";

inline nlohmann::ordered_json to_json(const Scenario& s) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["n_agents"] = s.n_agents;
  j["horizon"] = s.calendar.horizon;
  j["phases_per_semester"] = s.calendar.phases_per_semester;
  j["exam_window_pattern"] = pattern_to_string(s.calendar.exam_window_pattern);
  j["T_exp"] = s.t_exp;
  j["exam_slots"] = s.exam_slots;
  j["bridging_support"] = s.bridging_support;
  j["flexible_scheduling"] = s.flexible_scheduling;
  j["exogenous_hazard"] = s.exogenous_hazard;
  j["w1"] = s.weights.w1;
  j["w2"] = s.weights.w2;
  j["w3"] = s.weights.w3;
  j["epsilon"] = s.weights.epsilon;
  j["noise_sd"] = s.weights.noise_sd;
  const DynamicsParams& d = s.dynamics;
  j["sigma_abil"] = d.sigma_abil;
  j["beta_stress"] = d.beta_stress;
  j["fatigue_factor"] = d.fatigue_factor;
  j["gamma_decay"] = d.gamma_decay;
  j["delta_B_fail"] = d.delta_B_fail;
  j["delta_B_expiry"] = d.delta_B_expiry;
  j["expiry_stress_multiplier"] = d.expiry_stress_multiplier;
  j["success_stress_relief"] = d.success_stress_relief;
  j["sigma_exam"] = d.sigma_exam;
  j["belonging_floor"] = d.belonging_floor;
  j["stress_ceiling"] = d.stress_ceiling;
  j["stagnation_periods"] = d.stagnation_periods;
  j["withdrawal_betas"] = d.withdrawal_betas;
  j["normative_expiry_threshold"] = d.normative_expiry_threshold;
  j["academic_failure_threshold"] = d.academic_failure_threshold;
  j["academic_course_threshold"] = d.academic_course_threshold;
  j["reference_stress"] = d.reference_stress;
  j["pass_rate_clamp"] = d.pass_rate_clamp;
  j["exact_enumeration_limit"] = s.exact_enumeration_limit;
  j["bottleneck_threshold"] = s.bottleneck_threshold;
  j["analytics_seed"] = s.analytics_seed;
  j["bootstrap_draws"] = s.bootstrap_draws;
  j["bootstrap_level"] = s.bootstrap_level;
  for (const auto& [id, cap] : s.course_capacity) j[std::string(kCapacityPrefix) + id] = cap;
  return j;
}

/// Canonical text of the effective scenario; hashed into run manifests.
inline std::string canonical_text(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline Scenario scenario_from_json(const nlohmann::json& j, std::string_view source) {
  if (!j.is_object())
    throw Error(ErrorKind::ConfigInvalid, std::string(source) + ": scenario must be a JSON object");
  Scenario s;
  DynamicsParams& d = s.dynamics;
  for (const auto& [key, v] : j.items()) {
    auto bad = [&](std::string_view why) {
      throw Error(ErrorKind::ConfigInvalid,
                  std::string(source) + ": key '" + key + "': " + std::string(why));
    };
    auto num = [&]() -> double {
      if (!v.is_number()) bad("expected a number");
      return v.get<double>();
    };
    auto integer = [&]() -> long long {
      if (!v.is_number_integer()) bad("expected an integer");
      return v.get<long long>();
    };
    auto boolean = [&]() -> bool {
      if (!v.is_boolean()) bad("expected true or false");
      return v.get<bool>();
    };
    if (key == "schema_version") {
      if (integer() != kSchemaVersion) bad("unsupported schema version");
    } else if (key == "n_agents") {
      s.n_agents = static_cast<int>(integer());
    } else if (key == "horizon") {
      s.calendar.horizon = static_cast<int>(integer());
    } else if (key == "phases_per_semester") {
      s.calendar.phases_per_semester = static_cast<int>(integer());
    } else if (key == "exam_window_pattern") {
      if (!v.is_string()) bad("expected a string like \"teach,teach,exam,exam\"");
      try {
        s.calendar.exam_window_pattern = pattern_from_string(v.get<std::string>());
      } catch (const Error& e) {
        bad(e.what());
      }
    } else if (key == "T_exp") {
      s.t_exp = static_cast<int>(integer());
    } else if (key == "exam_slots") {
      s.exam_slots = static_cast<int>(integer());
    } else if (key == "bridging_support") {
      s.bridging_support = boolean();
    } else if (key == "flexible_scheduling") {
      s.flexible_scheduling = boolean();
    } else if (key == "exogenous_hazard") {
      s.exogenous_hazard = num();
    } else if (key == "w1") {
      s.weights.w1 = num();
    } else if (key == "w2") {
      s.weights.w2 = num();
    } else if (key == "w3") {
      s.weights.w3 = num();
    } else if (key == "epsilon") {
      s.weights.epsilon = num();
    } else if (key == "noise_sd") {
      s.weights.noise_sd = num();
    } else if (key == "sigma_abil") {
      d.sigma_abil = num();
    } else if (key == "beta_stress") {
      d.beta_stress = num();
    } else if (key == "fatigue_factor") {
      d.fatigue_factor = num();
    } else if (key == "gamma_decay") {
      d.gamma_decay = num();
    } else if (key == "delta_B_fail") {
      d.delta_B_fail = num();
    } else if (key == "delta_B_expiry") {
      d.delta_B_expiry = num();
    } else if (key == "expiry_stress_multiplier") {
      d.expiry_stress_multiplier = num();
    } else if (key == "success_stress_relief") {
      d.success_stress_relief = num();
    } else if (key == "sigma_exam") {
      d.sigma_exam = num();
    } else if (key == "belonging_floor") {
      d.belonging_floor = num();
    } else if (key == "stress_ceiling") {
      d.stress_ceiling = num();
    } else if (key == "stagnation_periods") {
      d.stagnation_periods = static_cast<int>(integer());
    } else if (key == "withdrawal_betas") {
      if (!v.is_array() || v.size() != 5) bad("expected an array of 5 numbers");
      for (std::size_t k = 0; k < 5; ++k) {
        if (!v[k].is_number()) bad("expected an array of 5 numbers");
        d.withdrawal_betas[k] = v[k].get<double>();
      }
    } else if (key == "normative_expiry_threshold") {
      d.normative_expiry_threshold = static_cast<int>(integer());
    } else if (key == "academic_failure_threshold") {
      d.academic_failure_threshold = static_cast<int>(integer());
    } else if (key == "academic_course_threshold") {
      d.academic_course_threshold = static_cast<int>(integer());
    } else if (key == "reference_stress") {
      d.reference_stress = num();
    } else if (key == "pass_rate_clamp") {
      d.pass_rate_clamp = num();
    } else if (key == "exact_enumeration_limit") {
      s.exact_enumeration_limit = static_cast<int>(integer());
    } else if (key == "bottleneck_threshold") {
      s.bottleneck_threshold = static_cast<int>(integer());
    } else if (key == "analytics_seed") {
      if (!v.is_number_unsigned()) bad("expected a nonnegative integer");
      s.analytics_seed = v.get<std::uint64_t>();
    } else if (key == "bootstrap_draws") {
      s.bootstrap_draws = static_cast<int>(integer());
    } else if (key == "bootstrap_level") {
      s.bootstrap_level = num();
    } else if (key.rfind(kCapacityPrefix, 0) == 0 && key.size() > kCapacityPrefix.size()) {
      s.course_capacity[key.substr(kCapacityPrefix.size())] = static_cast<int>(integer());
    } else {
      bad("unknown key");
    }
  }
  try {
    s.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string(source) + ": " + e.what());
  }
  return s;
}

inline Scenario parse_scenario(std::string_view text, std::string_view source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string(source) + ": " + e.what());
  }
  return scenario_from_json(j, source);
}

inline Scenario load_scenario(const std::string& path) {
  return parse_scenario(table::read_file(path), path);
}

}  // namespace regtrap
