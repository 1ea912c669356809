#pragma once

// Monte-Carlo experiments over sampled populations. Trial t of every cell
// uses the population drawn from stream (seed, t), so cells share their
// random instances and a run is a pure function of (config, seed).

#include "mre/harness/config.hpp"
#include "mre/harness/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace mre::harness {

struct ExperimentRow {
  std::string experiment;
  std::string scheme;
  std::size_t n = 0;
  double tau = 0.0;
  double task_bits = 0.0;
  std::string metric;
  double value = 0.0;
  std::size_t trials = 0;
  double std_error = 0.0;
};

/// One per-trial value behind an emitted row.
struct TrialRecord {
  std::string experiment;
  std::string scheme;
  std::size_t n = 0;
  double tau = 0.0;
  double task_bits = 0.0;
  std::size_t trial = 0;
  std::string metric;
  double value = 0.0;
};

using TrialLog = std::vector<TrialRecord>;

inline constexpr const char* kRowHeader = "experiment,scheme,n,tau_s,L_bits,metric,value,trials,stderr";
inline constexpr const char* kTrialHeader = "experiment,scheme,n,tau_s,L_bits,trial,metric,value";

inline void write_rows_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  using mre::detail::format_double;
  os << kRowHeader << '\n';
  for (const auto& r : rows)
    os << r.experiment << ',' << r.scheme << ',' << r.n << ',' << format_double(r.tau) << ','
       << format_double(r.task_bits) << ',' << r.metric << ',' << format_double(r.value) << ',' << r.trials << ','
       << format_double(r.std_error) << '\n';
}

inline void write_trials_csv(std::ostream& os, const TrialLog& log) {
  using mre::detail::format_double;
  os << kTrialHeader << '\n';
  for (const auto& r : log)
    os << r.experiment << ',' << r.scheme << ',' << r.n << ',' << format_double(r.tau) << ','
       << format_double(r.task_bits) << ',' << r.trial << ',' << r.metric << ',' << format_double(r.value) << '\n';
}

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and standard error of the mean, summed in index order.
inline Summary summarize(const std::vector<double>& v) {
  Summary s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

/// Linear interpolation between order statistics.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  return v[i] + (pos - static_cast<double>(i)) * (v[i + 1] - v[i]);
}

inline std::uint64_t population_seed(const ExperimentConfig& cfg, std::size_t trial) {
  return mre::detail::stream_seed(cfg.seed, trial);
}

inline std::vector<DeviceParams> trial_population(const ExperimentConfig& cfg, std::size_t n, std::size_t trial) {
  return sample_population(population_seed(cfg, trial), cfg.bounds, n);
}

inline CapacityRule capacity_rule(SchemeId s) {
  return (s == SchemeId::opt || s == SchemeId::nodfs) ? CapacityRule::opt : CapacityRule::blind;
}

namespace detail {

inline void log_values(TrialLog* log, const std::string& experiment, const std::string& scheme, std::size_t n,
                       double tau, double bits, const std::string& metric, const std::vector<double>& values) {
  if (!log) return;
  for (std::size_t t = 0; t < values.size(); ++t) log->push_back({experiment, scheme, n, tau, bits, t, metric, values[t]});
}

inline void emit_mean(std::vector<ExperimentRow>& rows, TrialLog* log, const std::string& experiment,
                      const std::string& scheme, std::size_t n, double tau, double bits, const std::string& metric,
                      const std::vector<double>& values) {
  const Summary s = summarize(values);
  rows.push_back({experiment, scheme, n, tau, bits, metric, s.mean, values.size(), s.std_error});
  log_values(log, experiment, scheme, n, tau, bits, metric, values);
}

struct CapacityPair {
  double opt = 0.0;
  double blind = 0.0;
};

inline std::vector<CapacityPair> capacities(const ExperimentConfig& cfg, std::size_t n, double tau) {
  return parallel_map<CapacityPair>(cfg.trials, cfg.threads, [&](std::size_t t) {
    const auto devs = trial_population(cfg, n, t);
    const SystemConfig sys = cfg.system(n, tau, cfg.task_bits);
    return CapacityPair{opt_lmax(sys, devs).l_max, blind_lmax(sys, devs).l_max};
  });
}

}  // namespace detail

/// Mean and quantiles of both maximum loads per (N, tau).
inline std::vector<ExperimentRow> run_lmax_sweep(const ExperimentConfig& cfg, TrialLog* log = nullptr) {
  cfg.validate();
  std::vector<ExperimentRow> rows;
  for (std::size_t n : cfg.n_list) {
    for (double tau : cfg.tau_list) {
      const auto caps = detail::capacities(cfg, n, tau);
      for (CapacityRule rule : {CapacityRule::opt, CapacityRule::blind}) {
        const std::string scheme = rule == CapacityRule::opt ? "opt" : "blind";
        std::vector<double> v;
        for (const auto& c : caps) v.push_back(rule == CapacityRule::opt ? c.opt : c.blind);
        detail::emit_mean(rows, log, "lmax", scheme, n, tau, cfg.task_bits, "l_max_mean", v);
        for (auto [name, q] : {std::pair{"l_max_q05", 0.05}, std::pair{"l_max_q50", 0.5}, std::pair{"l_max_q95", 0.95}})
          rows.push_back({"lmax", scheme, n, tau, cfg.task_bits, name, quantile(v, q), v.size(), 0.0});
      }
    }
  }
  return rows;
}

/// Fraction of populations whose maximum load falls short of L.
inline std::vector<ExperimentRow> run_outage(const ExperimentConfig& cfg, TrialLog* log = nullptr) {
  cfg.validate();
  std::vector<ExperimentRow> rows;
  const double L = cfg.task_bits;
  for (std::size_t n : cfg.n_list) {
    for (double tau : cfg.tau_list) {
      const auto caps = detail::capacities(cfg, n, tau);
      for (SchemeId s : cfg.schemes) {
        std::vector<double> out;
        for (const auto& c : caps) {
          const double cap = capacity_rule(s) == CapacityRule::opt ? c.opt : c.blind;
          out.push_back(L <= cap ? 0.0 : 1.0);
        }
        const Summary m = summarize(out);
        const double se = std::sqrt(m.mean * (1.0 - m.mean) / static_cast<double>(out.size()));
        rows.push_back({"outage", to_string(s), n, tau, L, "outage", m.mean, out.size(), se});
        detail::log_values(log, "outage", to_string(s), n, tau, L, "outage", out);
      }
    }
  }
  return rows;
}

enum class SweepAxis { n, tau };

namespace detail {

struct SchemeEnergy {
  bool optimal = false;
  double total = 0.0;
  double map = 0.0;
  double shuffle = 0.0;
  double reduce = 0.0;
};

inline std::vector<ExperimentRow> energy_cell(const ExperimentConfig& cfg, const std::string& experiment,
                                              std::size_t n, double tau, TrialLog* log) {
  const double L = cfg.task_bits;
  const SystemConfig probe = cfg.system(n, tau, L);
  const std::size_t max_attempts =
      static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.trials) / cfg.min_acceptance));
  std::vector<std::size_t> kept;
  std::size_t attempts = 0;
  while (kept.size() < cfg.trials) {
    if (attempts >= max_attempts) {
      throw std::runtime_error(experiment + ": acceptance rate below " +
                               mre::detail::format_double(cfg.min_acceptance) + " at n=" + std::to_string(n) +
                               " tau_s=" + mre::detail::format_double(tau) + " (" + std::to_string(kept.size()) +
                               " feasible of " + std::to_string(attempts) + ")");
    }
    const auto devs = trial_population(cfg, n, attempts);
    if (is_feasible(probe, devs, CapacityRule::opt) && is_feasible(probe, devs, CapacityRule::blind))
      kept.push_back(attempts);
    ++attempts;
  }

  using PerScheme = std::vector<SchemeEnergy>;
  const SolverOptions opts = cfg.solver_options();
  const auto results = parallel_map<PerScheme>(kept.size(), cfg.threads, [&](std::size_t i) {
    const auto devs = trial_population(cfg, n, kept[i]);
    PerScheme out;
    for (SchemeId s : cfg.schemes) {
      const Solution sol = solve_scheme(s, probe, devs, opts);
      SchemeEnergy e;
      e.optimal = sol.status == SolveStatus::optimal;
      if (e.optimal) e = {true, sol.breakdown.total, sol.breakdown.map_total(), sol.breakdown.shuffle_total(),
                          sol.breakdown.reduce_total()};
      out.push_back(e);
    }
    return out;
  });

  std::vector<ExperimentRow> rows;
  const double rate = static_cast<double>(kept.size()) / static_cast<double>(attempts);
  rows.push_back({experiment, "all", n, tau, L, "acceptance_rate", rate, attempts,
                  std::sqrt(rate * (1.0 - rate) / static_cast<double>(attempts))});
  for (std::size_t k = 0; k < cfg.schemes.size(); ++k) {
    const std::string scheme = to_string(cfg.schemes[k]);
    std::vector<double> total, map, shuffle, reduce;
    std::size_t failures = 0;
    for (const auto& r : results) {
      if (!r[k].optimal) {
        ++failures;
        continue;
      }
      total.push_back(r[k].total / L);
      map.push_back(r[k].map / L);
      shuffle.push_back(r[k].shuffle / L);
      reduce.push_back(r[k].reduce / L);
    }
    emit_mean(rows, log, experiment, scheme, n, tau, L, "energy_per_bit", total);
    emit_mean(rows, log, experiment, scheme, n, tau, L, "map_energy_per_bit", map);
    emit_mean(rows, log, experiment, scheme, n, tau, L, "shuffle_energy_per_bit", shuffle);
    emit_mean(rows, log, experiment, scheme, n, tau, L, "reduce_energy_per_bit", reduce);
    rows.push_back({experiment, scheme, n, tau, L, "non_optimal", static_cast<double>(failures), results.size(), 0.0});
  }
  return rows;
}

}  // namespace detail

/// Per-bit energy of every scheme over instances feasible for both Opt and
/// Blind, swept over N (at tau_ms) or over tau (at n).
inline std::vector<ExperimentRow> run_energy_sweep(const ExperimentConfig& cfg, SweepAxis axis,
                                                   TrialLog* log = nullptr) {
  cfg.validate();
  if (!(cfg.task_bits > 0.0)) throw config_error("config: energy sweeps need L_bits > 0");
  std::vector<ExperimentRow> rows;
  if (axis == SweepAxis::n) {
    for (std::size_t n : cfg.n_list) {
      auto cell = detail::energy_cell(cfg, "sweep_n", n, cfg.tau, log);
      rows.insert(rows.end(), cell.begin(), cell.end());
    }
  } else {
    for (double tau : cfg.tau_list) {
      auto cell = detail::energy_cell(cfg, "sweep_tau", cfg.n, tau, log);
      rows.insert(rows.end(), cell.begin(), cell.end());
    }
  }
  return rows;
}

inline std::string participation_metric(double ratio) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "participation_x%.2f", ratio);
  return buf;
}

/// Fraction of devices with a positive load at L = ratio * l_max, where
/// l_max is the scheme's own maximum load.
inline std::vector<ExperimentRow> run_participation(const ExperimentConfig& cfg, TrialLog* log = nullptr) {
  cfg.validate();
  std::vector<ExperimentRow> rows;
  const std::size_t n = cfg.n;
  const double tau = cfg.tau;
  const SolverOptions opts = cfg.solver_options();
  for (SchemeId s : cfg.schemes) {
    for (double ratio : cfg.ratio_list) {
      struct Trial {
        double fraction = 0.0;
        double bits = 0.0;
      };
      const auto trials = parallel_map<Trial>(cfg.trials, cfg.threads, [&](std::size_t t) {
        const auto devs = trial_population(cfg, n, t);
        SystemConfig sys = cfg.system(n, tau, cfg.task_bits);
        const double cap =
            capacity_rule(s) == CapacityRule::opt ? opt_lmax(sys, devs).l_max : blind_lmax(sys, devs).l_max;
        sys = sys.with_task_bits(ratio * cap);
        const Solution sol = solve_scheme(s, sys, devs, opts);
        if (sol.status != SolveStatus::optimal)
          throw std::runtime_error(std::string("participation: ") + to_string(s) + " not optimal at trial " +
                                   std::to_string(t) + " (" + to_string(sol.status) + ")");
        return Trial{participation_fraction(sol, cfg.participation_tol), sys.task_bits};
      });
      std::vector<double> frac;
      double bits = 0.0;
      for (const auto& tr : trials) {
        frac.push_back(tr.fraction);
        bits += tr.bits;
      }
      bits /= static_cast<double>(trials.size());
      detail::emit_mean(rows, log, "participation", to_string(s), n, tau, bits, participation_metric(ratio), frac);
    }
  }
  return rows;
}

}  // namespace mre::harness
