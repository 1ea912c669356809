#pragma once

#include "mre/harness/experiments.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace mre::harness {

enum ExitCode : int { exit_ok = 0, exit_infeasible = 1, exit_usage = 2, exit_numerical = 3 };

struct CliFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::string> scheme;
  std::optional<std::string> out;
  std::optional<double> tol;
  std::optional<std::size_t> threads;
  std::string log_trials;
  bool sweep = false;
};

namespace detail {

inline void add_common(CLI::App* sub, CliFlags& f) {
  sub->add_option("--config", f.config, "key = value configuration file");
  sub->add_option("--seed", f.seed, "RNG seed (env MRE_SEED)");
  sub->add_option("--trials", f.trials, "trials per cell");
  sub->add_option("--scheme", f.scheme, "opt, blind, nodfs, blind_nodfs or noopt");
  sub->add_option("--out", f.out, "CSV output path (env MRE_OUT); stdout if absent");
  sub->add_option("--tol", f.tol, "feasibility tolerance, relative to natural scales");
  sub->add_option("--threads", f.threads, "worker threads for Monte-Carlo trials");
  sub->add_option("--log-trials", f.log_trials, "CSV path for per-trial values");
}

/// Config file, then environment, then flags.
inline ExperimentConfig resolve_config(const CliFlags& f) {
  ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
  if (const char* env = std::getenv("MRE_SEED"); env && *env) {
    try {
      cfg.seed = detail::unsigned_integer(env);
    } catch (const std::exception&) {
      throw config_error(std::string("MRE_SEED: not a non-negative integer: '") + env + "'");
    }
  }
  if (const char* env = std::getenv("MRE_OUT"); env && *env) cfg.out = env;
  if (f.seed) cfg.seed = *f.seed;
  if (f.trials) cfg.trials = *f.trials;
  if (f.out) cfg.out = *f.out;
  if (f.tol) cfg.feas_tol = *f.tol;
  if (f.threads) cfg.threads = *f.threads;
  if (f.scheme) cfg.schemes = {parse_scheme(*f.scheme)};
  cfg.validate();
  return cfg;
}

template <typename Write>
void emit(const std::string& path, std::ostream& out, Write&& write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error(path + ": cannot open for writing");
  write(file);
  if (!file) throw std::runtime_error(path + ": write failed");
}

inline int run_solve(const ExperimentConfig& cfg, const CliFlags& f, std::ostream& out, std::ostream& err) {
  const SchemeId scheme = f.scheme ? parse_scheme(*f.scheme) : SchemeId::opt;
  const auto devices = instance_devices(cfg);
  const SystemConfig sys = cfg.system(devices.size(), cfg.tau, cfg.task_bits);
  const Solution sol = solve_scheme(scheme, sys, devices, cfg.solver_options());
  std::ostream& report = cfg.out.empty() ? err : out;
  using mre::detail::format_double;
  report << "scheme=" << to_string(scheme) << " status=" << to_string(sol.status) << " n=" << devices.size()
         << " L_bits=" << format_double(sys.task_bits) << " l_max_bits=" << format_double(sol.l_max);
  if (sol.status == SolveStatus::infeasible) {
    report << '\n';
    return exit_infeasible;
  }
  report << " energy_J=" << format_double(sol.primal_value) << " dual_J=" << format_double(sol.dual_bound)
         << " rel_gap=" << format_double(sol.rel_gap) << " t_red_s=" << format_double(sol.allocation.max_reduce_time())
         << '\n';
  if (sol.status == SolveStatus::numerical_failure) return exit_numerical;
  emit(cfg.out, out, [&](std::ostream& os) { write_solution_csv(os, sol); });
  return exit_ok;
}

inline int run_lmax(const ExperimentConfig& cfg, const CliFlags& f, std::ostream& out) {
  if (f.sweep) {
    TrialLog log;
    const auto rows = run_lmax_sweep(cfg, f.log_trials.empty() ? nullptr : &log);
    emit(cfg.out, out, [&](std::ostream& os) { write_rows_csv(os, rows); });
    if (!f.log_trials.empty()) emit(f.log_trials, out, [&](std::ostream& os) { write_trials_csv(os, log); });
    return exit_ok;
  }
  const auto devices = instance_devices(cfg);
  const SystemConfig sys = cfg.system(devices.size(), cfg.tau, cfg.task_bits);
  using mre::detail::format_double;
  emit(cfg.out, out, [&](std::ostream& os) {
    os << "scheme,n,tau,l_max,reduce_floor\n";
    for (auto [name, cap] : {std::pair{"opt", opt_lmax(sys, devices)}, std::pair{"blind", blind_lmax(sys, devices)}})
      os << name << ',' << devices.size() << ',' << format_double(sys.deadline) << ',' << format_double(cap.l_max)
         << ',' << format_double(cap.reduce_floor) << '\n';
  });
  return exit_ok;
}

template <typename Run>
int run_experiment(const ExperimentConfig& cfg, const CliFlags& f, std::ostream& out, Run&& run) {
  TrialLog log;
  const auto rows = run(cfg, f.log_trials.empty() ? nullptr : &log);
  emit(cfg.out, out, [&](std::ostream& os) { write_rows_csv(os, rows); });
  if (!f.log_trials.empty()) emit(f.log_trials, out, [&](std::ostream& os) { write_trials_csv(os, log); });
  return exit_ok;
}

}  // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Energy-optimal Map-Reduce load distribution over wireless devices"};
  app.require_subcommand(1);
  CliFlags f;
  auto* solve = app.add_subcommand("solve", "solve one instance with one scheme");
  auto* lmax = app.add_subcommand("lmax", "maximum computing loads of one instance (or a sweep)");
  auto* outage = app.add_subcommand("outage", "outage probability per (N, tau)");
  auto* sweep_n = app.add_subcommand("sweep-n", "per-bit energy of every scheme versus N");
  auto* sweep_tau = app.add_subcommand("sweep-tau", "per-bit energy of every scheme versus tau");
  auto* participation = app.add_subcommand("participation", "fraction of devices with a positive load");
  for (auto* sub : {solve, lmax, outage, sweep_n, sweep_tau, participation}) detail::add_common(sub, f);
  lmax->add_flag("--sweep", f.sweep, "Monte-Carlo sweep over n_list x tau_ms_list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    const ExperimentConfig cfg = detail::resolve_config(f);
    if (solve->parsed()) return detail::run_solve(cfg, f, out, err);
    if (lmax->parsed()) return detail::run_lmax(cfg, f, out);
    if (outage->parsed())
      return detail::run_experiment(cfg, f, out, [](const auto& c, TrialLog* l) { return run_outage(c, l); });
    if (sweep_n->parsed())
      return detail::run_experiment(cfg, f, out,
                                    [](const auto& c, TrialLog* l) { return run_energy_sweep(c, SweepAxis::n, l); });
    if (sweep_tau->parsed())
      return detail::run_experiment(cfg, f, out,
                                    [](const auto& c, TrialLog* l) { return run_energy_sweep(c, SweepAxis::tau, l); });
    if (participation->parsed())
      return detail::run_experiment(cfg, f, out, [](const auto& c, TrialLog* l) { return run_participation(c, l); });
  } catch (const config_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return exit_usage;
  } catch (const numerical_error& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_numerical;
  }
  return exit_usage;
}

}  // namespace mre::harness
