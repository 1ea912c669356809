#pragma once

// Restricted variants of the energy program used as baselines. The
// fixed-frequency schemes run Map and Reduce at f_max, so each device has
// its own Reduce time c beta L / f_max; all devices still wait for the
// slowest Reduce before the deadline.

#include "mre/solver.hpp"

#include <array>
#include <string>
#include <string_view>

namespace mre {

enum class SchemeId { opt, blind, nodfs, blind_nodfs, noopt };

inline constexpr std::array<SchemeId, 5> kAllSchemes = {SchemeId::opt, SchemeId::blind, SchemeId::nodfs,
                                                        SchemeId::blind_nodfs, SchemeId::noopt};

inline const char* to_string(SchemeId s) {
  switch (s) {
    case SchemeId::opt: return "opt";
    case SchemeId::blind: return "blind";
    case SchemeId::nodfs: return "nodfs";
    case SchemeId::blind_nodfs: return "blind_nodfs";
    case SchemeId::noopt: return "noopt";
  }
  return "unknown";
}

inline SchemeId parse_scheme(std::string_view name) {
  for (SchemeId s : kAllSchemes)
    if (name == to_string(s)) return s;
  if (name == "blind-nodfs") return SchemeId::blind_nodfs;
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

inline Solution solve_blind(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                            const SolverOptions& opts = {}) {
  return detail::solve_shared_reduce(sys, devices, opts, detail::LoadRule::equal_split);
}

namespace detail {

inline std::vector<double> full_speed_reduce_times(const SystemConfig& sys, const std::vector<DeviceParams>& devices) {
  std::vector<double> t;
  for (const auto& d : devices) t.push_back(sys.reduce_bits() / d.max_rate());
  return t;
}

inline void check_devices(const SystemConfig& sys, const std::vector<DeviceParams>& devices) {
  sys.validate();
  if (devices.size() != sys.n_devices) throw std::invalid_argument("solve: device count differs from n_devices");
  for (const auto& d : devices) d.validate();
}

}  // namespace detail

/// Dual function of the fixed-frequency program with shared loads and
/// Map+Shuffle budget `budget` per device.
inline double fixed_frequency_dual(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                   const Multipliers& mult, double budget) {
  mult.validate();
  const double tau = sys.deadline;
  double g = mult.lambda * sys.task_bits;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const DeviceParams& d = devices[i];
    const double F = d.max_rate();
    const double y = mult.lambda - sys.alpha * mult.mu[i];
    const double beta = mult.beta_t[i];
    g += tau * std::min(0.0, beta - (y * F - d.compute_coeff() * F * F * F));
    g += solve_shuffle_sub(d, sys, mult.mu[i], beta, tau).value;
    g -= beta * budget;
    g += reduce_energy(d, sys.reduce_bits(), sys.reduce_bits() / F);
  }
  return g;
}

inline Solution solve_nodfs(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                            const SolverOptions& opts = {}) {
  detail::check_devices(sys, devices);
  const std::size_t n = devices.size();
  const CapacityResult cap = opt_lmax(sys, devices);
  if (sys.task_bits > cap.l_max) return detail::infeasible_solution(n, n, cap.l_max);

  Solution s;
  s.l_max = cap.l_max;
  s.allocation = Allocation::zeros(n, n);
  s.allocation.t_red = detail::full_speed_reduce_times(sys, devices);
  s.multipliers = Multipliers::zeros(n);
  const double budget = sys.deadline - s.allocation.max_reduce_time();
  try {
    if (sys.task_bits > 0.0) {
      const detail::InnerResult in =
          detail::solve_inner(sys, devices, budget, detail::LoadRule::shared, Frequency::fixed_max, opts.max_iterations);
      detail::assemble(sys, in, budget, detail::LoadRule::shared, s.allocation, s.multipliers);
      s.iterations = in.iterations;
    }
    s.dual_bound = fixed_frequency_dual(sys, devices, s.multipliers, budget);
    detail::certify(s, sys, devices, opts);
  } catch (const std::domain_error&) {
    s.status = SolveStatus::numerical_failure;
  } catch (const numerical_error&) {
    s.status = SolveStatus::numerical_failure;
  }
  return s;
}

/// Power at which transmitting costs the least energy per bit, including
/// circuit power: solves r(p) = (p + P^c) r'(p).
inline double energy_efficient_power(const DeviceParams& d, const SystemConfig& sys) {
  auto h = [&](double p) { return uplink_rate(d, sys, p) - (p + d.p_circuit) * uplink_rate_slope(d, sys, p); };
  double lo = 0.0, hi = d.p_max;
  double flo = h(lo), fhi = h(hi);
  for (int k = 0; fhi < 0.0; ++k) {
    if (k > 200) throw numerical_error("energy_efficient_power: no bracket");
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = h(hi);
  }
  return detail::solve_bracketed(h, lo, hi, flo, fhi).mid();
}

/// Equal split, Map and Reduce at f_max; each device only picks its
/// Shuffle time and power.
inline Solution solve_blind_nodfs(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                  const SolverOptions& opts = {}) {
  detail::check_devices(sys, devices);
  const std::size_t n = devices.size();
  const double share = sys.task_bits / static_cast<double>(n);
  const std::vector<double> t_red = detail::full_speed_reduce_times(sys, devices);
  double floor = 0.0;
  for (double t : t_red) floor = std::max(floor, t);
  const double budget = sys.deadline - floor;

  Solution s;
  s.l_max = blind_lmax(sys, devices).l_max;
  s.allocation = Allocation::zeros(n, n);
  s.allocation.t_red = t_red;
  s.multipliers = Multipliers::zeros(n);
  s.multipliers.lambda_per_device.assign(n, 0.0);
  const double tau = sys.deadline;
  const double shuffle_bits = sys.alpha * share;
  double dual = 0.0;
  try {
    for (std::size_t i = 0; i < n; ++i) {
      const DeviceParams& d = devices[i];
      const double F = d.max_rate();
      const double tm = share / F;
      const double room = budget - tm;
      if (share > 0.0 && !(room > 0.0)) return detail::infeasible_solution(n, n, s.l_max);
      double mu = 0.0, beta = 0.0, ts = 0.0, p = 0.0;
      if (shuffle_bits > 0.0) {
        const double p_req = power_for_rate(d, sys, shuffle_bits / room);
        if (p_req > d.p_max) return detail::infeasible_solution(n, n, s.l_max);
        p = std::clamp(energy_efficient_power(d, sys), p_req, d.p_max);
        const double r = uplink_rate(d, sys, p);
        ts = std::min(shuffle_bits / r, room);
        mu = p < d.p_max ? 1.0 / uplink_rate_slope(d, sys, p)
                         : std::max(1.0 / uplink_rate_slope(d, sys, p), (p + d.p_circuit) / r);
        beta = std::max(0.0, shuffle_profit(d, sys, mu).profit);
      }
      s.allocation.loads[i] = share;
      s.allocation.t_map[i] = tm;
      s.allocation.t_shu[i] = ts;
      s.allocation.rf_energy[i] = p * ts;
      s.multipliers.mu[i] = mu;
      s.multipliers.beta_t[i] = beta;
      const double kc = d.compute_coeff();
      s.multipliers.lambda_per_device[i] = kc * F * F + sys.alpha * mu + beta / F;

      dual += map_energy(d, share, tm) + reduce_energy(d, sys.reduce_bits(), t_red[i]);
      dual += mu * shuffle_bits + beta * (tm - budget);
      dual += solve_shuffle_sub(d, sys, mu, beta, tau).value;
    }
    s.dual_bound = dual;
    detail::certify(s, sys, devices, opts);
  } catch (const std::domain_error&) {
    s.status = SolveStatus::numerical_failure;
  } catch (const numerical_error&) {
    s.status = SolveStatus::numerical_failure;
  }
  return s;
}

/// Nothing optimised: equal split, full CPU speed, full transmit power.
inline Solution solve_noopt(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                            const SolverOptions& opts = {}) {
  detail::check_devices(sys, devices);
  const std::size_t n = devices.size();
  const double share = sys.task_bits / static_cast<double>(n);
  Solution s;
  s.l_max = blind_lmax(sys, devices).l_max;
  s.allocation = Allocation::zeros(n, n);
  s.allocation.t_red = detail::full_speed_reduce_times(sys, devices);
  s.multipliers = Multipliers::zeros(n);
  const double floor = s.allocation.max_reduce_time();
  for (std::size_t i = 0; i < n; ++i) {
    const DeviceParams& d = devices[i];
    const double tm = share / d.max_rate();
    const double ts = sys.alpha > 0.0 ? sys.alpha * share / uplink_rate(d, sys, d.p_max) : 0.0;
    if (tm + ts + floor > sys.deadline) return detail::infeasible_solution(n, n, s.l_max);
    s.allocation.loads[i] = share;
    s.allocation.t_map[i] = tm;
    s.allocation.t_shu[i] = ts;
    s.allocation.rf_energy[i] = d.p_max * ts;
  }
  s.breakdown = total_energy(sys, devices, s.allocation);
  s.dual_bound = s.breakdown.total;
  detail::certify(s, sys, devices, opts);
  return s;
}

inline Solution solve_scheme(SchemeId id, const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                             const SolverOptions& opts = {}) {
  switch (id) {
    case SchemeId::opt: return solve_opt(sys, devices, opts);
    case SchemeId::blind: return solve_blind(sys, devices, opts);
    case SchemeId::nodfs: return solve_nodfs(sys, devices, opts);
    case SchemeId::blind_nodfs: return solve_blind_nodfs(sys, devices, opts);
    case SchemeId::noopt: return solve_noopt(sys, devices, opts);
  }
  throw std::invalid_argument("solve_scheme: unknown scheme");
}

}  // namespace mre
