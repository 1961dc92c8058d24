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

// Survival curves, resampling intervals, rank and contingency tests, and the
// summary tables built from an experiment.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>

#include "regtrap/engine.hpp"
#include "regtrap/error.hpp"
#include "regtrap/rng.hpp"

namespace regtrap {

// ---------------------------------------------------------------- survival

struct SurvivalObservation {
  int time = 0;
  bool event = false;  // false = censored at `time`
};

struct SurvivalPoint {
  int time = 0;
  double survival = 1.0;
  std::size_t at_risk = 0;
  std::size_t events = 0;
  std::size_t censored = 0;
};

using SurvivalCurve = std::vector<SurvivalPoint>;

/// Product-limit estimate. The first point is (0, 1, n); then one point per
/// distinct observed time. Censoring at t counts as at risk at t.
inline SurvivalCurve kaplan_meier(std::vector<SurvivalObservation> obs) {
  if (obs.empty()) throw Error(ErrorKind::EmptyInput, "kaplan_meier needs at least one observation");
  for (const auto& o : obs)
    if (o.time < 0) throw Error(ErrorKind::DegenerateInput, "survival times must be >= 0");
  std::sort(obs.begin(), obs.end(), [](const auto& a, const auto& b) { return a.time < b.time; });
  SurvivalCurve curve;
  curve.push_back({0, 1.0, obs.size(), 0, 0});
  double s = 1.0;
  std::size_t at_risk = obs.size();
  for (std::size_t k = 0; k < obs.size();) {
    const int t = obs[k].time;
    std::size_t d = 0, c = 0;
    for (; k < obs.size() && obs[k].time == t; ++k) (obs[k].event ? d : c)++;
    if (d > 0) s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
    if (t == 0) {
      curve.front() = {0, s, at_risk, d, c};
    } else {
      curve.push_back({t, s, at_risk, d, c});
    }
    at_risk -= d + c;
  }
  return curve;
}

/// Step-function lookup: survival just after all events at or before t.
inline double survival_at(const SurvivalCurve& curve, int t) {
  double s = 1.0;
  for (const auto& p : curve) {
    if (p.time > t) break;
    s = p.survival;
  }
  return s;
}

// ---------------------------------------------------------------- quantiles

/// Linear-interpolation quantile of sorted data (the common "type 7" rule).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0, mean = 0;
  std::size_t n = 0;
};

inline FiveNumber five_number(std::vector<double> v) {
  if (v.empty()) return {};
  std::sort(v.begin(), v.end());
  FiveNumber f;
  f.n = v.size();
  f.min = v.front();
  f.q1 = quantile_sorted(v, 0.25);
  f.median = quantile_sorted(v, 0.5);
  f.q3 = quantile_sorted(v, 0.75);
  f.max = v.back();
  f.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  return f;
}

// ---------------------------------------------------------------- bootstrap

/// Resample indices, one row of n per draw, from a dedicated stream.
inline std::vector<std::vector<std::size_t>> bootstrap_indices(std::size_t n, int draws,
                                                               std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> idx(static_cast<std::size_t>(draws));
  for (auto& row : idx) {
    row.resize(n);
    for (auto& i : row) i = static_cast<std::size_t>(rng.below(n));
  }
  return idx;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile interval over the resampled means.
inline Interval bootstrap_ci(const std::vector<double>& stats, int draws, double level,
                             std::uint64_t seed) {
  if (stats.size() < 2)
    throw Error(ErrorKind::InsufficientReplications, "bootstrap needs at least 2 replications");
  if (draws < 1) throw Error(ErrorKind::ConfigInvalid, "bootstrap draws must be >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw Error(ErrorKind::ConfigInvalid, "bootstrap level must lie in (0, 1)");
  Rng rng(seed);
  const std::size_t n = stats.size();
  std::vector<double> means(static_cast<std::size_t>(draws));
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += stats[static_cast<std::size_t>(rng.below(n))];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double tail = (1.0 - level) / 2.0;
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

// ---------------------------------------------------------------- tests

struct TestResult {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Mid-ranks (1-based) of the pooled sample; ties share their average rank.
inline std::vector<double> mid_ranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(pooled.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

inline double chi_square_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

/// H with tie correction; p from the chi-square approximation on k-1 df.
inline TestResult kruskal_wallis(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorKind::DegenerateInput, "kruskal_wallis needs >= 2 groups");
  std::vector<double> pooled;
  for (const auto& g : groups) {
    if (g.empty()) throw Error(ErrorKind::EmptyInput, "kruskal_wallis group is empty");
    pooled.insert(pooled.end(), g.begin(), g.end());
  }
  if (std::all_of(pooled.begin(), pooled.end(), [&](double v) { return v == pooled.front(); }))
    throw Error(ErrorKind::DegenerateInput, "kruskal_wallis: all values are identical");
  const auto rank = mid_ranks(pooled);
  const double n = static_cast<double>(pooled.size());
  double sum = 0.0;
  std::size_t at = 0;
  for (const auto& g : groups) {
    double r = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) r += rank[at + k];
    at += g.size();
    sum += r * r / static_cast<double>(g.size());
  }
  double h = 12.0 / (n * (n + 1.0)) * sum - 3.0 * (n + 1.0);

  std::vector<double> sorted = pooled;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  h /= 1.0 - ties / (n * n * n - n);
  h = std::max(h, 0.0);
  const double df = static_cast<double>(groups.size() - 1);
  return {h, df, chi_square_sf(h, df)};
}

/// Pearson chi-square against independence; df = (r-1)(c-1).
inline TestResult chi_square_independence(const std::vector<std::vector<double>>& table) {
  if (table.size() < 2 || table.front().size() < 2)
    throw Error(ErrorKind::DegenerateInput, "chi-square needs at least a 2x2 table");
  const std::size_t r = table.size(), c = table.front().size();
  std::vector<double> row(r, 0.0), col(c, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    if (table[i].size() != c) throw Error(ErrorKind::DegenerateInput, "ragged contingency table");
    for (std::size_t j = 0; j < c; ++j) {
      if (table[i][j] < 0.0) throw Error(ErrorKind::DegenerateInput, "negative count");
      row[i] += table[i][j];
      col[j] += table[i][j];
      total += table[i][j];
    }
  }
  for (std::size_t i = 0; i < r; ++i)
    if (row[i] == 0.0) throw Error(ErrorKind::ZeroMarginal, "row " + std::to_string(i) + " sums to zero");
  for (std::size_t j = 0; j < c; ++j)
    if (col[j] == 0.0) throw Error(ErrorKind::ZeroMarginal, "column " + std::to_string(j) + " sums to zero");
  double x2 = 0.0;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double e = row[i] * col[j] / total;
      x2 += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  const double df = static_cast<double>((r - 1) * (c - 1));
  return {x2, df, chi_square_sf(x2, df)};
}

inline double bonferroni_threshold(double alpha, int comparisons) {
  if (comparisons < 1) throw Error(ErrorKind::DegenerateInput, "comparisons must be >= 1");
  return alpha / comparisons;
}

/// One-sided paired t test of H1: mean(x - y) > 0. With zero spread the
/// p-value is 0 for a positive mean difference and 1 otherwise.
inline TestResult paired_t_greater(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DegenerateInput, "paired samples differ in size");
  if (x.size() < 2) throw Error(ErrorKind::InsufficientReplications, "paired test needs >= 2 pairs");
  const double n = static_cast<double>(x.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) mean += x[k] - y[k];
  mean /= n;
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) ss += (x[k] - y[k] - mean) * (x[k] - y[k] - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double df = n - 1.0;
  if (sd == 0.0) return {mean > 0 ? std::numeric_limits<double>::infinity() : 0.0, df, mean > 0 ? 0.0 : 1.0};
  const double t = mean / (sd / std::sqrt(n));
  const double p = boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
  return {t, df, p};
}

// ---------------------------------------------------------------- summaries

struct GlobalSummary {
  std::size_t replications = 0;
  std::size_t agents_per_run = 0;
  std::size_t total_agents = 0;
  int horizon = 0;
  double dropout_rate = 0.0;
  std::optional<Interval> dropout_ci;  // needs >= 2 replications
  double graduation_rate = 0.0;
  double active_rate = 0.0;
  std::size_t dropouts = 0;
  std::optional<double> normative_share;  // of dropouts; absent with none
  std::optional<double> academic_share;
  std::optional<double> other_share;
  double mean_expiries = 0.0;
  std::optional<double> mean_expiries_dropout;
  std::optional<double> mean_expiries_active;
  std::optional<double> median_time_to_event;  // over dropouts only
  double min_archetype_dropout = 0.0;
  double max_archetype_dropout = 0.0;
};

struct ArchetypeSummary {
  std::string id;
  std::size_t n = 0;
  double dropout_rate = 0.0;
  double graduated_rate = 0.0;
  double active_rate = 0.0;
  std::optional<double> normative_share;
  double mean_expiries = 0.0;
  FiveNumber expiries;
  double pending_finals = 0.0;  // terminal means
  double stress = 0.0;
  double belonging = 0.0;
};

struct SummaryTables {
  GlobalSummary global;
  std::vector<ArchetypeSummary> archetypes;
  std::map<int, std::size_t> expiry_histogram;          // expiries -> agents
  std::map<int, std::size_t> expiry_histogram_dropout;
  std::map<int, std::size_t> expiry_histogram_active;
  SurvivalCurve survival;
};

struct SummaryOptions {
  std::uint64_t analytics_seed = 20250101;
  int bootstrap_draws = 10000;
  double bootstrap_level = 0.95;
};

/// Per-replication dropout rates, in ascending seed order.
inline std::vector<double> replication_dropout_rates(const ExperimentResult& ex) {
  std::vector<std::pair<std::uint64_t, double>> v;
  for (const auto& r : ex.replications) {
    std::size_t d = 0;
    for (const auto& t : r.records) d += t.outcome == Outcome::Dropout;
    v.push_back({r.seed, r.records.empty() ? 0.0 : static_cast<double>(d) / static_cast<double>(r.records.size())});
  }
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (const auto& [seed, rate] : v) out.push_back(rate);
  return out;
}

inline SummaryTables summarize(const ExperimentResult& ex, const SummaryOptions& opt = {}) {
  if (ex.replications.empty())
    throw Error(ErrorKind::InsufficientReplications, "summarize needs at least one replication");
  SummaryTables out;
  GlobalSummary& g = out.global;
  const std::size_t k = ex.archetype_ids.size();
  g.replications = ex.replications.size();
  g.agents_per_run = ex.replications.front().records.size();
  g.horizon = ex.horizon;

  struct Acc {
    std::size_t n = 0, drop = 0, grad = 0, normative = 0;
    std::vector<double> expiries;
    double pending = 0, stress = 0, belonging = 0;
  };
  std::vector<Acc> acc(k);
  std::size_t n = 0, grad = 0, normative = 0, academic = 0, other = 0, active = 0;
  double exp_all = 0, exp_drop = 0, exp_active = 0;
  std::vector<double> tte;
  std::vector<SurvivalObservation> obs;
  for (const auto& r : ex.replications) {
    for (const auto& t : r.records) {
      if (t.archetype >= k) throw Error(ErrorKind::DegenerateInput, "record archetype out of range");
      Acc& a = acc[t.archetype];
      ++n;
      ++a.n;
      a.expiries.push_back(t.expiries);
      a.pending += t.pending_finals;
      a.stress += t.stress;
      a.belonging += t.belonging;
      exp_all += t.expiries;
      ++out.expiry_histogram[t.expiries];
      obs.push_back({t.time_to_event, t.outcome == Outcome::Dropout});
      switch (t.outcome) {
        case Outcome::Dropout:
          ++g.dropouts;
          ++a.drop;
          exp_drop += t.expiries;
          ++out.expiry_histogram_dropout[t.expiries];
          tte.push_back(t.time_to_event);
          if (t.cause == DropoutCause::Normative) {
            ++normative;
            ++a.normative;
          } else if (t.cause == DropoutCause::Academic) {
            ++academic;
          } else {
            ++other;
          }
          break;
        case Outcome::Graduated:
          ++grad;
          ++a.grad;
          break;
        case Outcome::Active:
          ++active;
          exp_active += t.expiries;
          ++out.expiry_histogram_active[t.expiries];
          break;
      }
    }
  }
  if (n == 0) throw Error(ErrorKind::EmptyInput, "experiment has no agent records");
  const auto dn = static_cast<double>(n);
  g.total_agents = n;
  g.dropout_rate = static_cast<double>(g.dropouts) / dn;
  g.graduation_rate = static_cast<double>(grad) / dn;
  g.active_rate = static_cast<double>(active) / dn;
  g.mean_expiries = exp_all / dn;
  if (g.dropouts > 0) {
    const auto dd = static_cast<double>(g.dropouts);
    g.normative_share = static_cast<double>(normative) / dd;
    g.academic_share = static_cast<double>(academic) / dd;
    g.other_share = static_cast<double>(other) / dd;
    g.mean_expiries_dropout = exp_drop / dd;
    g.median_time_to_event = median(tte);
  }
  if (active > 0) g.mean_expiries_active = exp_active / static_cast<double>(active);
  if (g.replications >= 2)
    g.dropout_ci = bootstrap_ci(replication_dropout_rates(ex), opt.bootstrap_draws,
                                opt.bootstrap_level, opt.analytics_seed);

  g.min_archetype_dropout = 1.0;
  g.max_archetype_dropout = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Acc& a = acc[i];
    ArchetypeSummary s;
    s.id = ex.archetype_ids[i];
    s.n = a.n;
    if (a.n > 0) {
      const auto an = static_cast<double>(a.n);
      s.dropout_rate = static_cast<double>(a.drop) / an;
      s.graduated_rate = static_cast<double>(a.grad) / an;
      s.active_rate = static_cast<double>(a.n - a.drop - a.grad) / an;
      if (a.drop > 0) s.normative_share = static_cast<double>(a.normative) / static_cast<double>(a.drop);
      s.expiries = five_number(a.expiries);
      s.mean_expiries = s.expiries.mean;
      s.pending_finals = a.pending / an;
      s.stress = a.stress / an;
      s.belonging = a.belonging / an;
      g.min_archetype_dropout = std::min(g.min_archetype_dropout, s.dropout_rate);
      g.max_archetype_dropout = std::max(g.max_archetype_dropout, s.dropout_rate);
    }
    out.archetypes.push_back(std::move(s));
  }
  out.survival = kaplan_meier(std::move(obs));
  return out;
}

/// Concatenates two experiments over the same archetypes; replications stay
/// in ascending seed order.
inline ExperimentResult merge(ExperimentResult a, const ExperimentResult& b) {
  if (a.archetype_ids != b.archetype_ids || a.horizon != b.horizon)
    throw Error(ErrorKind::DegenerateInput, "cannot merge experiments over different populations");
  a.replications.insert(a.replications.end(), b.replications.begin(), b.replications.end());
  std::stable_sort(a.replications.begin(), a.replications.end(),
                   [](const auto& x, const auto& y) { return x.seed < y.seed; });
  return a;
}

struct NamedTest {
  std::string name;
  TestResult result;
  double alpha = 0.05;
  bool significant() const { return result.p_value < alpha; }
};

/// Tests reported next to the tables: Kruskal-Wallis on expiries and on
/// time-to-event across archetypes, chi-square on archetype x dropout, and
/// every archetype pair on dropout at the Bonferroni threshold.
inline std::vector<NamedTest> archetype_tests(const ExperimentResult& ex, double alpha = 0.05) {
  const std::size_t k = ex.archetype_ids.size();
  std::vector<std::vector<double>> expiries(k), tte(k);
  std::vector<std::vector<double>> table(k, std::vector<double>(2, 0.0));
  for (const auto& r : ex.replications)
    for (const auto& t : r.records) {
      expiries[t.archetype].push_back(t.expiries);
      tte[t.archetype].push_back(t.time_to_event);
      table[t.archetype][t.outcome == Outcome::Dropout ? 0 : 1] += 1.0;
    }
  std::vector<NamedTest> out;
  auto guarded = [&](const std::string& name, auto&& fn, double a) {
    try {
      out.push_back({name, fn(), a});
    } catch (const Error&) {
      out.push_back({name, {std::nan(""), std::nan(""), std::nan("")}, a});
    }
  };
  std::vector<std::vector<double>> ne, nt, nc;
  for (std::size_t i = 0; i < k; ++i)
    if (!expiries[i].empty()) {
      ne.push_back(expiries[i]);
      nt.push_back(tte[i]);
      nc.push_back(table[i]);
    }
  guarded("kruskal_wallis_expiries", [&] { return kruskal_wallis(ne); }, alpha);
  guarded("kruskal_wallis_time_to_event", [&] { return kruskal_wallis(nt); }, alpha);
  guarded("chi_square_archetype_dropout", [&] { return chi_square_independence(nc); }, alpha);
  const int pairs = static_cast<int>(k * (k - 1) / 2);
  if (pairs > 0) {
    const double adj = bonferroni_threshold(alpha, pairs);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j)
        guarded("chi_square_dropout:" + ex.archetype_ids[i] + ":" + ex.archetype_ids[j],
                [&] { return chi_square_independence({table[i], table[j]}); }, adj);
  }
  return out;
}

}  // namespace regtrap
