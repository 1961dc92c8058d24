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

// Coordinate descent over (mu_abil, b0, sigma_stress) per archetype against
// observed dropout rates and mean expiries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "regtrap/curriculum.hpp"
#include "regtrap/engine.hpp"
#include "regtrap/error.hpp"
#include "regtrap/population.hpp"
#include "regtrap/scenario.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap {

struct Moments {
  std::string id;
  double dropout_rate = 0.0;
  double mean_expiries = 0.0;
};

inline std::vector<Moments> parse_targets(std::string_view text, std::string_view source) {
  const table::Table t = table::parse(text, source);
  const std::size_t c_id = t.column("id", source), c_d = t.column("dropout_rate", source),
                    c_e = t.column("mean_expiries", source);
  std::vector<Moments> out;
  for (const auto& r : t.rows) {
    const std::string where = std::string(source) + ":" + std::to_string(r.line);
    Moments m{r.cells[c_id], table::to_double(r.cells[c_d], where + " dropout_rate"),
              table::to_double(r.cells[c_e], where + " mean_expiries")};
    if (!(m.dropout_rate >= 0.0 && m.dropout_rate <= 1.0) || !(m.mean_expiries >= 0.0))
      throw Error(ErrorKind::ConfigInvalid, where + ": target out of range");
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<Moments> load_targets(const std::string& path) {
  return parse_targets(table::read_file(path), path);
}

inline std::string write_targets(const std::vector<Moments>& m) {
  table::Writer w{"id", "dropout_rate", "mean_expiries"};
  for (const auto& x : m) w.row({x.id, table::exact(x.dropout_rate), table::exact(x.mean_expiries)});
  return w.str();
}

/// Per-archetype dropout rate and mean expiries, in archetype order.
inline std::vector<Moments> archetype_moments(const ExperimentResult& ex) {
  std::vector<Moments> m(ex.archetype_ids.size());
  std::vector<std::size_t> n(m.size(), 0);
  for (std::size_t k = 0; k < m.size(); ++k) m[k].id = ex.archetype_ids[k];
  for (const auto& rep : ex.replications)
    for (const auto& r : rep.records) {
      ++n[r.archetype];
      if (r.outcome == Outcome::Dropout) m[r.archetype].dropout_rate += 1.0;
      m[r.archetype].mean_expiries += r.expiries;
    }
  for (std::size_t k = 0; k < m.size(); ++k)
    if (n[k]) {
      m[k].dropout_rate /= static_cast<double>(n[k]);
      m[k].mean_expiries /= static_cast<double>(n[k]);
    }
  return m;
}

struct CalibrationConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int max_evaluations = 400;  // objective evaluations after the initial one
  double step_mu = 0.04;
  double step_b0 = 0.05;
  double step_sigma = 0.02;
  double min_step_ratio = 1.0 / 16.0;  // stop once steps shrink below this
  double tolerance = 1e-12;            // also stop once the objective is this small
  int jobs = 1;
};

struct CalibrationStep {
  int evaluation = 0;
  std::string archetype;
  std::string parameter;
  double value = 0.0;
  double objective = 0.0;
};

struct CalibrationResult {
  std::vector<Archetype> archetypes;
  double initial_objective = 0.0;
  double objective = 0.0;
  int evaluations = 0;
  bool budget_exhausted = false;
  std::vector<CalibrationStep> trace;  // one row per accepted move, plus the start
};

/// Squared relative error summed over both moments and all archetypes. A zero
/// target falls back to absolute error.
inline double calibration_objective(const std::vector<Moments>& sim,
                                    const std::vector<Moments>& target) {
  auto rel = [](double s, double t) {
    const double d = t != 0.0 ? (s - t) / t : s;
    return d * d;
  };
  double f = 0.0;
  for (std::size_t k = 0; k < sim.size(); ++k)
    f += rel(sim[k].dropout_rate, target[k].dropout_rate) +
         rel(sim[k].mean_expiries, target[k].mean_expiries);
  return f;
}

/// Searches one coordinate at a time, accepting any strict improvement and
/// halving all steps after a sweep without one. The seed list is held fixed,
/// so the objective is a deterministic function of the parameters.
inline CalibrationResult calibrate(const Curriculum& cur, std::vector<Archetype> archetypes,
                                   const Scenario& s, const std::vector<Moments>& targets,
                                   const CalibrationConfig& cfg = {}) {
  validate(archetypes);
  if (cfg.seeds.empty()) throw Error(ErrorKind::ConfigInvalid, "calibration needs >= 1 seed");
  if (cfg.max_evaluations < 0)
    throw Error(ErrorKind::ConfigInvalid, "max_evaluations must be >= 0");
  std::vector<Moments> tgt;
  for (const auto& a : archetypes) {
    auto it = std::find_if(targets.begin(), targets.end(),
                           [&](const Moments& m) { return m.id == a.id; });
    if (it == targets.end())
      throw Error(ErrorKind::ConfigInvalid, "no calibration target for archetype '" + a.id + "'");
    tgt.push_back(*it);
  }

  CalibrationResult res;
  auto evaluate = [&](const std::vector<Archetype>& arch) {
    return calibration_objective(
        archetype_moments(run_experiment(cur, arch, s, cfg.seeds, cfg.jobs)), tgt);
  };
  double best = evaluate(archetypes);
  res.initial_objective = best;
  res.trace.push_back({0, "", "", 0.0, best});

  struct Coord {
    const char* name;
    double Archetype::*field;
    double lo, hi, step;
  };
  std::vector<Coord> coords{{"mu_abil", &Archetype::mu_abil, 0.3, 0.8, cfg.step_mu},
                            {"b0", &Archetype::b0, 0.4, 0.9, cfg.step_b0},
                            {"sigma_stress", &Archetype::sigma_stress, 0.05, 0.15, cfg.step_sigma}};
  double scale = 1.0;
  int used = 0;
  bool stop = best <= cfg.tolerance;
  while (!stop && scale >= cfg.min_step_ratio) {
    bool improved = false;
    for (std::size_t k = 0; k < archetypes.size() && !stop; ++k) {
      for (const auto& c : coords) {
        if (stop) break;
        for (double dir : {+1.0, -1.0}) {
          const double cur_v = archetypes[k].*c.field;
          const double next = std::clamp(cur_v + dir * c.step * scale, c.lo, c.hi);
          if (next == cur_v) continue;
          if (used >= cfg.max_evaluations) {
            res.budget_exhausted = true;
            stop = true;
            break;
          }
          auto trial = archetypes;
          trial[k].*c.field = next;
          const double f = evaluate(trial);
          ++used;
          if (f < best) {
            best = f;
            archetypes = std::move(trial);
            improved = true;
            res.trace.push_back({used, archetypes[k].id, c.name, next, f});
            if (best <= cfg.tolerance) stop = true;
            break;
          }
        }
      }
    }
    if (!improved) scale /= 2.0;
  }
  res.archetypes = std::move(archetypes);
  res.objective = best;
  res.evaluations = used;
  return res;
}

}  // namespace regtrap
