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

// Command implementations behind the regtrap executable. Each returns a
// process exit status; argument parsing lives in tools/regtrap.cpp.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "regtrap/analytics.hpp"
#include "regtrap/calibrate.hpp"
#include "regtrap/curriculum.hpp"
#include "regtrap/engine.hpp"
#include "regtrap/error.hpp"
#include "regtrap/manifest.hpp"
#include "regtrap/population.hpp"
#include "regtrap/results_io.hpp"
#include "regtrap/scenario.hpp"
#include "regtrap/table_io.hpp"

namespace regtrap::cli {

namespace fs = std::filesystem;

enum Exit : int {
  kOk = 0,
  kConfigError = 1,
  kIoError = 2,
  kManifestError = 3,
  kIncompatible = 4,
};

inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return kIoError;
    case ErrorKind::ManifestMismatch: return kManifestError;
    case ErrorKind::IncompatibleInputs: return kIncompatible;
    default: return kConfigError;
  }
}

/// "1..3,7" -> {1, 2, 3, 7}. Sorted, duplicates removed.
inline std::vector<std::uint64_t> parse_seeds(std::string_view spec) {
  auto number = [&](std::string_view s) {
    const std::string t = table::trim(s);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
      throw Error(ErrorKind::ConfigInvalid, "seeds: bad number '" + t + "' in '" + std::string(spec) + "'");
    return static_cast<std::uint64_t>(table::to_int(t, "seeds"));
  };
  std::set<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto end = spec.find(',', start);
    if (end == std::string_view::npos) end = spec.size();
    const std::string_view item = spec.substr(start, end - start);
    if (auto dots = item.find(".."); dots != std::string_view::npos) {
      const auto lo = number(item.substr(0, dots)), hi = number(item.substr(dots + 2));
      if (lo > hi) throw Error(ErrorKind::ConfigInvalid, "seeds: empty range '" + std::string(item) + "'");
      if (hi - lo >= 1000000) throw Error(ErrorKind::ConfigInvalid, "seeds: range too long");
      for (auto s = lo; s <= hi; ++s) out.insert(s);
    } else {
      out.insert(number(item));
    }
    start = end + 1;
  }
  return {out.begin(), out.end()};
}

/// REGTRAP_JOBS when set and positive, otherwise `fallback`.
inline int jobs_from_env(int fallback) {
  if (const char* v = std::getenv("REGTRAP_JOBS")) {
    const int n = std::atoi(v);
    if (n > 0) return n;
  }
  return fallback;
}

/// REGTRAP_OUT_DIR when set and non-empty, otherwise `fallback`.
inline std::string out_dir_from_env(const std::string& fallback) {
  if (const char* v = std::getenv("REGTRAP_OUT_DIR"); v && *v) return v;
  return fallback;
}

inline std::string replication_path(std::uint64_t seed) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "replications/seed_%04llu.csv",
                static_cast<unsigned long long>(seed));
  return buf;
}

inline std::string events_path(std::uint64_t seed) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "events/seed_%04llu.csv", static_cast<unsigned long long>(seed));
  return buf;
}

inline void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create directory '" + p.string() + "': " + ec.message());
}

// ------------------------------------------------------------------- run

struct RunOptions {
  std::string scenario;
  std::string curriculum;
  std::string archetypes;
  std::string seeds = "1..100";
  std::string out_dir;
  int jobs = 1;
  bool events = false;
};

inline int cmd_run(const RunOptions& o, std::ostream& log, std::ostream& err) {
  try {
    const Scenario s = load_scenario(o.scenario);
    const Curriculum cur = load_curriculum(o.curriculum);
    const std::vector<Archetype> arch = load_archetypes(o.archetypes);
    const std::vector<std::uint64_t> seeds = parse_seeds(o.seeds);
    if (seeds.empty()) throw Error(ErrorKind::ConfigInvalid, "no seeds given");

    const ExperimentResult ex = run_experiment(cur, arch, s, seeds, o.jobs, o.events);

    const fs::path dir(o.out_dir);
    ensure_dir(dir / "replications");
    if (o.events) ensure_dir(dir / "events");
    const std::string scen_text = canonical_text(s), cur_text = write_curriculum(cur),
                      arch_text = write_archetypes(arch);
    std::vector<std::string> written;
    auto put = [&](const std::string& rel, const std::string& text) {
      table::write_file((dir / rel).string(), text);
      written.push_back(rel);
    };
    put("scenario.json", scen_text);
    put("curriculum.csv", cur_text);
    put("archetypes.csv", arch_text);
    for (const auto& rep : ex.replications) {
      put(replication_path(rep.seed), write_records(rep, ex.archetype_ids));
      if (o.events) put(events_path(rep.seed), write_events(rep, cur));
    }
    put("terminal_records.csv", write_all_records(ex));

    RunManifest m;
    m.config_hash = config_hash(scen_text, cur_text, arch_text, seeds);
    m.scenario_hash = sha256_hex(scen_text);
    m.curriculum_hash = sha256_hex(cur_text);
    m.archetypes_hash = sha256_hex(arch_text);
    m.seeds = seeds;
    m.n_agents = s.n_agents;
    m.horizon = s.calendar.horizon;
    m.archetype_ids = ex.archetype_ids;
    m.event_logs = o.events;
    m.created_utc = utc_now();
    for (const auto& rel : written) m.files.push_back(describe_file(dir, rel));
    table::write_file((dir / kManifestName).string(), to_json(m).dump(2) + "\n");
    log << "run: " << seeds.size() << " replications x " << s.n_agents << " agents -> "
        << dir.string() << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "regtrap run: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

// --------------------------------------------------------------- loading

struct LoadedRun {
  RunManifest manifest;
  Scenario scenario;
  ExperimentResult experiment;
};

/// Reads a run directory after checking every checksum in its manifest.
inline LoadedRun load_run(const fs::path& dir) {
  LoadedRun r;
  r.manifest = load_manifest(dir);
  verify(r.manifest, dir);
  std::set<std::string> listed;
  for (const auto& f : r.manifest.files) listed.insert(f.path);
  for (const char* need : {"scenario.json", "archetypes.csv"})
    if (!listed.count(need))
      throw Error(ErrorKind::ManifestMismatch, dir.string() + ": manifest does not list " + need);
  r.scenario = load_scenario((dir / "scenario.json").string());
  const auto arch = load_archetypes((dir / "archetypes.csv").string());
  for (const auto& a : arch) r.experiment.archetype_ids.push_back(a.id);
  if (r.experiment.archetype_ids != r.manifest.archetype_ids)
    throw Error(ErrorKind::ManifestMismatch, dir.string() + ": archetype list differs from manifest");
  r.experiment.horizon = r.manifest.horizon;
  for (auto seed : r.manifest.seeds) {
    const std::string rel = replication_path(seed);
    if (!listed.count(rel))
      throw Error(ErrorKind::ManifestMismatch, dir.string() + ": manifest does not list " + rel);
    ReplicationResult rep;
    rep.seed = seed;
    rep.horizon = r.manifest.horizon;
    rep.records = parse_records(table::read_file((dir / rel).string()), (dir / rel).string(),
                                r.experiment.archetype_ids);
    r.experiment.replications.push_back(std::move(rep));
  }
  return r;
}

// --------------------------------------------------------------- analyze

inline std::string opt_num(const std::optional<double>& v) {
  return v ? table::general(*v) : std::string("NA");
}

inline std::map<std::string, std::string> analysis_tables(const ExperimentResult& ex,
                                                          const SummaryOptions& opt) {
  const SummaryTables t = summarize(ex, opt);
  const GlobalSummary& g = t.global;
  std::map<std::string, std::string> files;

  table::Writer t3{"metric", "value", "ci_lo", "ci_hi"};
  auto plain = [&](std::string_view name, const std::string& v) {
    t3.row({std::string(name), v, "NA", "NA"});
  };
  plain("replications", std::to_string(g.replications));
  plain("agents_per_run", std::to_string(g.agents_per_run));
  plain("total_agents", std::to_string(g.total_agents));
  plain("horizon", std::to_string(g.horizon));
  t3.row({"dropout_rate", table::general(g.dropout_rate),
          g.dropout_ci ? table::general(g.dropout_ci->lo) : "NA",
          g.dropout_ci ? table::general(g.dropout_ci->hi) : "NA"});
  plain("graduation_rate", table::general(g.graduation_rate));
  plain("active_rate", table::general(g.active_rate));
  plain("dropouts", std::to_string(g.dropouts));
  plain("normative_share", opt_num(g.normative_share));
  plain("academic_share", opt_num(g.academic_share));
  plain("other_share", opt_num(g.other_share));
  plain("mean_expiries", table::general(g.mean_expiries));
  plain("mean_expiries_dropout", opt_num(g.mean_expiries_dropout));
  plain("mean_expiries_active", opt_num(g.mean_expiries_active));
  plain("median_time_to_event", opt_num(g.median_time_to_event));
  plain("min_archetype_dropout", table::general(g.min_archetype_dropout));
  plain("max_archetype_dropout", table::general(g.max_archetype_dropout));
  plain("analytics_seed", std::to_string(opt.analytics_seed));
  plain("bootstrap_draws", std::to_string(opt.bootstrap_draws));
  plain("bootstrap_level", table::general(opt.bootstrap_level));
  files["table3.csv"] = t3.str();

  table::Writer t4{"archetype", "n", "dropout_rate", "graduated_rate", "active_rate",
                   "normative_share", "mean_expiries"};
  table::Writer box{"archetype", "n", "min", "q1", "median", "q3", "max", "mean"};
  table::Writer heat{"archetype", "variable", "value"};
  for (const auto& a : t.archetypes) {
    t4.row({a.id, std::to_string(a.n), table::general(a.dropout_rate),
            table::general(a.graduated_rate), table::general(a.active_rate),
            opt_num(a.normative_share), table::general(a.mean_expiries)});
    if (a.n > 0)
      box.row({a.id, std::to_string(a.n), table::general(a.expiries.min),
               table::general(a.expiries.q1), table::general(a.expiries.median),
               table::general(a.expiries.q3), table::general(a.expiries.max),
               table::general(a.expiries.mean)});
    heat.row({a.id, "pending_finals", table::general(a.pending_finals)});
    heat.row({a.id, "stress", table::general(a.stress)});
    heat.row({a.id, "belonging", table::general(a.belonging)});
  }
  files["table4.csv"] = t4.str();
  files["expiry_by_archetype.csv"] = box.str();
  files["psych_heatmap.csv"] = heat.str();

  table::Writer surv{"time", "survival", "at_risk", "events", "censored"};
  for (const auto& p : t.survival)
    surv.row({std::to_string(p.time), table::general(p.survival), std::to_string(p.at_risk),
              std::to_string(p.events), std::to_string(p.censored)});
  files["survival.csv"] = surv.str();

  table::Writer hist{"group", "expiries", "agents"};
  for (const auto& [group, h] :
       {std::pair<const char*, const std::map<int, std::size_t>*>{"all", &t.expiry_histogram},
        {"dropout", &t.expiry_histogram_dropout},
        {"active", &t.expiry_histogram_active}})
    for (const auto& [e, c] : *h) hist.row({group, std::to_string(e), std::to_string(c)});
  files["expiry_hist.csv"] = hist.str();

  table::Writer tests{"test", "statistic", "df", "p_value", "alpha", "significant"};
  for (const auto& nt : archetype_tests(ex))
    tests.row({nt.name, table::general(nt.result.statistic), table::general(nt.result.df),
               table::general(nt.result.p_value), table::general(nt.alpha),
               std::isnan(nt.result.p_value) ? "NA" : (nt.significant() ? "1" : "0")});
  files["stats_tests.csv"] = tests.str();
  return files;
}

inline SummaryOptions summary_options(const Scenario& s) {
  return {s.analytics_seed, s.bootstrap_draws, s.bootstrap_level};
}

inline int cmd_analyze(const std::string& results_dir, const std::string& out_dir,
                       std::ostream& log, std::ostream& err) {
  try {
    const LoadedRun run = load_run(results_dir);
    const auto files = analysis_tables(run.experiment, summary_options(run.scenario));
    ensure_dir(out_dir);
    for (const auto& [name, text] : files) table::write_file((fs::path(out_dir) / name).string(), text);
    log << "analyze: " << files.size() << " tables -> " << out_dir << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "regtrap analyze: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

// --------------------------------------------------------------- compare

namespace detail {

struct GroupStats {
  double n = 0, drop = 0, normative = 0, expiries = 0;
};

// Per seed, per group ("ALL" then each archetype id).
inline std::map<std::uint64_t, std::vector<GroupStats>> seed_stats(const ExperimentResult& ex) {
  std::map<std::uint64_t, std::vector<GroupStats>> out;
  for (const auto& rep : ex.replications) {
    auto& g = out[rep.seed];
    g.assign(ex.archetype_ids.size() + 1, {});
    for (const auto& r : rep.records)
      for (std::size_t k : {std::size_t{0}, r.archetype + 1}) {
        g[k].n += 1;
        g[k].expiries += r.expiries;
        if (r.outcome == Outcome::Dropout) {
          g[k].drop += 1;
          if (r.cause == DropoutCause::Normative) g[k].normative += 1;
        }
      }
  }
  return out;
}

inline double metric(const GroupStats& g, int m) {
  switch (m) {
    case 0: return g.n > 0 ? g.drop / g.n : std::nan("");
    case 1: return g.drop > 0 ? g.normative / g.drop : std::nan("");
    default: return g.n > 0 ? g.expiries / g.n : std::nan("");
  }
}

}  // namespace detail

/// Paired comparison of every run against the first, over the seeds they share.
inline std::string compare_table(const std::vector<std::string>& labels,
                                 const std::vector<LoadedRun>& runs) {
  const LoadedRun& base = runs.front();
  const SummaryOptions opt = summary_options(base.scenario);
  const auto base_stats = detail::seed_stats(base.experiment);
  std::vector<std::string> groups{"ALL"};
  groups.insert(groups.end(), base.experiment.archetype_ids.begin(),
                base.experiment.archetype_ids.end());
  static const char* kMetrics[] = {"dropout_rate", "normative_share", "mean_expiries"};

  table::Writer w{"scenario", "group", "metric", "base", "value", "delta", "ci_lo", "ci_hi",
                  "paired_seeds"};
  for (std::size_t r = 1; r < runs.size(); ++r) {
    const auto stats = detail::seed_stats(runs[r].experiment);
    std::vector<std::uint64_t> common;
    for (const auto& [seed, _] : stats)
      if (base_stats.count(seed)) common.push_back(seed);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (int m = 0; m < 3; ++m) {
        detail::GroupStats pa, pb;
        std::vector<double> deltas;
        for (auto seed : common) {
          const auto& a = base_stats.at(seed)[g];
          const auto& b = stats.at(seed)[g];
          for (auto [acc, x] : {std::pair{&pa, &a}, std::pair{&pb, &b}}) {
            acc->n += x->n;
            acc->drop += x->drop;
            acc->normative += x->normative;
            acc->expiries += x->expiries;
          }
          const double d = detail::metric(b, m) - detail::metric(a, m);
          if (!std::isnan(d)) deltas.push_back(d);
        }
        const double va = detail::metric(pa, m), vb = detail::metric(pb, m);
        std::string lo = "NA", hi = "NA";
        if (deltas.size() >= 2) {
          const Interval ci = bootstrap_ci(deltas, opt.bootstrap_draws, opt.bootstrap_level,
                                           opt.analytics_seed);
          lo = table::general(ci.lo);
          hi = table::general(ci.hi);
        }
        w.row({labels[r], groups[g], kMetrics[m], table::general(va), table::general(vb),
               table::general(vb - va), lo, hi, std::to_string(deltas.size())});
      }
  }
  return w.str();
}

inline int cmd_compare(const std::vector<std::string>& dirs, const std::string& out_dir,
                       std::ostream& log, std::ostream& err) {
  try {
    if (dirs.size() < 2)
      throw Error(ErrorKind::IncompatibleInputs, "compare needs at least two result directories");
    std::vector<LoadedRun> runs;
    std::vector<std::string> labels;
    for (const auto& d : dirs) {
      runs.push_back(load_run(d));
      labels.push_back(fs::path(d).lexically_normal().filename().string());
      if (labels.back().empty()) labels.back() = fs::path(d).lexically_normal().parent_path().filename().string();
    }
    const RunManifest& b = runs.front().manifest;
    for (std::size_t r = 1; r < runs.size(); ++r) {
      const RunManifest& m = runs[r].manifest;
      if (m.curriculum_hash != b.curriculum_hash)
        throw Error(ErrorKind::IncompatibleInputs, dirs[r] + ": curriculum differs from " + dirs[0]);
      if (m.archetypes_hash != b.archetypes_hash)
        throw Error(ErrorKind::IncompatibleInputs, dirs[r] + ": archetypes differ from " + dirs[0]);
      if (m.n_agents != b.n_agents)
        throw Error(ErrorKind::IncompatibleInputs, dirs[r] + ": population size differs from " + dirs[0]);
      const std::set<std::uint64_t> sa(b.seeds.begin(), b.seeds.end());
      if (std::none_of(m.seeds.begin(), m.seeds.end(), [&](auto s) { return sa.count(s) > 0; }))
        throw Error(ErrorKind::IncompatibleInputs, dirs[r] + ": no seeds in common with " + dirs[0]);
    }
    ensure_dir(out_dir);
    table::write_file((fs::path(out_dir) / "compare.csv").string(), compare_table(labels, runs));
    log << "compare: " << runs.size() - 1 << " scenario(s) against " << dirs[0] << " -> "
        << out_dir << "\n";
    return kOk;
  } catch (const Error& e) {
    err << "regtrap compare: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

// ------------------------------------------------------------- calibrate

struct CalibrateOptions {
  std::string scenario;
  std::string curriculum;
  std::string archetypes;
  std::string targets;
  std::string seeds = "1..5";
  std::optional<int> n_agents;
  int max_evaluations = CalibrationConfig{}.max_evaluations;
  std::string out_dir;
  int jobs = 1;
};

inline int cmd_calibrate(const CalibrateOptions& o, std::ostream& log, std::ostream& err) {
  try {
    Scenario s = load_scenario(o.scenario);
    if (o.n_agents) {
      s.n_agents = *o.n_agents;
      s.validate();
    }
    const Curriculum cur = load_curriculum(o.curriculum);
    const auto arch = load_archetypes(o.archetypes);
    const auto targets = load_targets(o.targets);
    CalibrationConfig cfg;
    cfg.seeds = parse_seeds(o.seeds);
    cfg.max_evaluations = o.max_evaluations;
    cfg.jobs = o.jobs;
    const CalibrationResult res = calibrate(cur, arch, s, targets, cfg);

    ensure_dir(o.out_dir);
    table::write_file((fs::path(o.out_dir) / "archetypes_calibrated.csv").string(),
                      write_archetypes(res.archetypes));
    table::Writer tr{"evaluation", "archetype", "parameter", "value", "objective"};
    for (const auto& st : res.trace)
      tr.row({std::to_string(st.evaluation), st.archetype, st.parameter,
              st.parameter.empty() ? "" : table::general(st.value), table::general(st.objective)});
    table::write_file((fs::path(o.out_dir) / "calibration_trace.csv").string(), tr.str());
    log << "calibrate: objective " << table::general(res.initial_objective) << " -> "
        << table::general(res.objective) << " after " << res.evaluations << " evaluations\n";
    if (res.budget_exhausted)
      err << "regtrap calibrate: warning: search budget exhausted; returning best parameters found\n";
    return kOk;
  } catch (const Error& e) {
    err << "regtrap calibrate: " << e.what() << "\n";
    return exit_code(e.kind());
  }
}

inline int cmd_print_default_config(std::ostream& out) {
  out << canonical_text(Scenario{});
  return kOk;
}

}  // namespace regtrap::cli
