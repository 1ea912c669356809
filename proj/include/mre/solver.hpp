#pragma once

// Optimal load distribution. The KKT system of the energy program is solved
// by nested monotone root finding:
//   * for a price lambda on Map output, each device picks the rate
//     multiplier mu_n where the profit of running Map equals the profit of
//     transmitting; the common profit is its time multiplier beta_n and the
//     two optimal rates fix its end-to-end throughput;
//   * lambda is the water level at which the throughputs carry L bits in
//     the Map+Shuffle budget tau - t_red;
//   * t_red balances the marginal Reduce energy against sum beta_n.
// The primal is assembled from the responses and certified by the dual
// function at the recovered multipliers.

#include "mre/kkt.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mre {

enum class SolveStatus { optimal, infeasible, numerical_failure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

struct SolverOptions {
  double gap_tol = 1e-6;
  double feas_tol = 1e-7;
  int max_iterations = 200;  ///< per root solve
};

struct Solution {
  Allocation allocation;
  EnergyBreakdown breakdown;
  Multipliers multipliers;
  double primal_value = 0.0;
  double dual_bound = 0.0;
  double rel_gap = 0.0;
  SolveStatus status = SolveStatus::numerical_failure;
  int iterations = 0;
  double l_max = 0.0;  ///< capacity the feasibility decision was made against
};

/// Thrown when a root solve cannot bracket or converge.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct DeviceResponse {
  double mu = 0.0;
  double beta = 0.0;
  double map_rate = 0.0;      ///< M, bits/s
  double shuffle_rate = 0.0;  ///< r(p), bits/s
  double power = 0.0;
  double throughput = 0.0;    ///< bits of load per second of Map+Shuffle time
  int iterations = 0;
};

/// Break-even Map price: below it running Map earns nothing.
inline double map_floor_price(const DeviceParams& d, Frequency freq) {
  if (freq == Frequency::scaled) return 0.0;
  const double F = d.max_rate();
  return d.compute_coeff() * F * F;
}

inline DeviceResponse respond(const DeviceParams& d, const SystemConfig& sys, double lambda, Frequency freq,
                              int max_iter) {
  DeviceResponse out;
  const double alpha = sys.alpha;
  if (alpha == 0.0) {
    const RateProfit mp = map_profit(d, lambda, freq);
    if (mp.rate > 0.0) {
      out.beta = mp.profit;
      out.map_rate = mp.rate;
      out.throughput = mp.rate;
    }
    return out;
  }
  const double mu_top = (lambda - map_floor_price(d, freq)) / alpha;
  if (mu_top <= 0.0) return out;
  const RateProfit top = shuffle_profit(d, sys, mu_top);
  if (top.profit <= 0.0) {
    out.mu = mu_top;
    out.power = top.rate;
    return out;
  }
  auto gap = [&](double mu) { return map_profit(d, lambda - alpha * mu, freq).profit - shuffle_profit(d, sys, mu).profit; };
  const Bracket b = solve_bracketed(gap, 0.0, mu_top, gap(0.0), -top.profit, max_iter);
  out.iterations = b.iterations;
  out.mu = b.mid();
  const RateProfit mp = map_profit(d, lambda - alpha * out.mu, freq);
  out.power = optimal_power(d, sys, out.mu);
  out.shuffle_rate = uplink_rate(d, sys, out.power);
  out.beta = mp.profit;
  out.map_rate = mp.rate;
  if (mp.rate > 0.0 && out.shuffle_rate > 0.0) out.throughput = 1.0 / (1.0 / mp.rate + alpha / out.shuffle_rate);
  return out;
}

/// Responses at the two ends of the water-level bracket and the weight on
/// the upper end that makes the loads sum exactly to the target.
struct PriceBracket {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  std::vector<DeviceResponse> lo;
  std::vector<DeviceResponse> hi;
  double theta = 1.0;
  int iterations = 0;
};

inline double throughput_sum(const std::vector<DeviceResponse>& r) {
  double s = 0.0;
  for (const auto& x : r) s += x.throughput;
  return s;
}

inline std::vector<DeviceResponse> respond_all(const std::vector<DeviceParams>& devices, const SystemConfig& sys,
                                               double lambda, Frequency freq, int max_iter, int& iterations) {
  std::vector<DeviceResponse> out;
  out.reserve(devices.size());
  for (const auto& d : devices) {
    out.push_back(respond(d, sys, lambda, freq, max_iter));
    iterations += out.back().iterations;
  }
  return out;
}

/// Water level at which `devices` carry `bits` within Map+Shuffle time `budget`.
inline PriceBracket solve_price(const SystemConfig& sys, const std::vector<DeviceParams>& devices, double budget,
                                double bits, Frequency freq, int max_iter) {
  PriceBracket pb;
  int iters = 0;
  auto excess = [&](double lambda) {
    return budget * throughput_sum(respond_all(devices, sys, lambda, freq, max_iter, iters)) - bits;
  };

  double start = 0.0;
  for (const auto& d : devices) {
    const double F = d.max_rate();
    double price = 3.0 * d.compute_coeff() * F * F;
    if (sys.alpha > 0.0) price += sys.alpha * (d.p_max + d.p_circuit) / uplink_rate(d, sys, d.p_max);
    start = std::max(start, price);
  }
  double lo = 0.0;
  double flo = -bits;
  double hi = start;
  double fhi = excess(hi);
  for (int k = 0; fhi < 0.0; ++k) {
    if (k > 1000 || !std::isfinite(hi)) throw numerical_error("solve_price: load exceeds capacity");
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = excess(hi);
  }
  const Bracket b = solve_bracketed(excess, lo, hi, flo, fhi, max_iter);
  pb.lambda_lo = b.lo;
  pb.lambda_hi = b.hi;
  pb.lo = respond_all(devices, sys, b.lo, freq, max_iter, iters);
  pb.hi = respond_all(devices, sys, b.hi, freq, max_iter, iters);
  const double tot_lo = budget * throughput_sum(pb.lo);
  const double tot_hi = budget * throughput_sum(pb.hi);
  pb.theta = tot_hi > tot_lo ? std::clamp((bits - tot_lo) / (tot_hi - tot_lo), 0.0, 1.0) : 1.0;
  pb.iterations = iters + b.iterations;
  return pb;
}

struct DeviceShare {
  double load = 0.0;
  double t_map = 0.0;
  double t_shu = 0.0;
  double rf_energy = 0.0;
};

inline DeviceShare share_from(const DeviceResponse& r, const SystemConfig& sys, double budget) {
  DeviceShare s;
  if (r.throughput <= 0.0) return s;
  s.load = budget * r.throughput;
  s.t_map = s.load / r.map_rate;
  if (sys.alpha > 0.0) {
    s.t_shu = sys.alpha * s.load / r.shuffle_rate;
    s.rf_energy = r.power * s.t_shu;
  }
  return s;
}

/// Blend of the two bracket ends, weight theta on the upper one.
inline DeviceShare blend(const DeviceResponse& lo, const DeviceResponse& hi, double theta, const SystemConfig& sys,
                         double budget) {
  const DeviceShare a = share_from(lo, sys, budget);
  const DeviceShare b = share_from(hi, sys, budget);
  auto mix = [theta](double x, double y) { return x + theta * (y - x); };
  return {mix(a.load, b.load), mix(a.t_map, b.t_map), mix(a.t_shu, b.t_shu), mix(a.rf_energy, b.rf_energy)};
}

inline void place(Allocation& a, std::size_t i, const DeviceShare& s) {
  a.loads[i] = s.load;
  a.t_map[i] = s.t_map;
  a.t_shu[i] = s.t_shu;
  a.rf_energy[i] = s.rf_energy;
}

/// How loads are tied together: one shared sum constraint, or l_n = L/N.
enum class LoadRule { shared, equal_split };

struct InnerResult {
  std::vector<PriceBracket> brackets;  ///< one shared bracket, or one per device
  double beta_sum = 0.0;
  int iterations = 0;
};

inline InnerResult solve_inner(const SystemConfig& sys, const std::vector<DeviceParams>& devices, double budget,
                               LoadRule rule, Frequency freq, int max_iter) {
  InnerResult r;
  if (rule == LoadRule::shared) {
    r.brackets.push_back(solve_price(sys, devices, budget, sys.task_bits, freq, max_iter));
  } else {
    const double share = sys.task_bits / static_cast<double>(devices.size());
    for (const auto& d : devices) r.brackets.push_back(solve_price(sys, {d}, budget, share, freq, max_iter));
  }
  for (const auto& pb : r.brackets) {
    r.iterations += pb.iterations;
    for (const auto& x : pb.hi) r.beta_sum += x.beta;
  }
  return r;
}

/// Writes loads, times and multipliers of an inner solution.
inline void assemble(const SystemConfig& sys, const InnerResult& in, double budget, LoadRule rule, Allocation& a,
                     Multipliers& m) {
  const std::size_t n = a.size();
  if (rule == LoadRule::shared) {
    const PriceBracket& pb = in.brackets.front();
    for (std::size_t i = 0; i < n; ++i) {
      place(a, i, blend(pb.lo[i], pb.hi[i], pb.theta, sys, budget));
      m.mu[i] = pb.hi[i].mu;
      m.beta_t[i] = pb.hi[i].beta;
    }
    m.lambda = pb.lambda_hi;
  } else {
    m.lambda_per_device.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const PriceBracket& pb = in.brackets[i];
      place(a, i, blend(pb.lo[0], pb.hi[0], pb.theta, sys, budget));
      m.mu[i] = pb.hi[0].mu;
      m.beta_t[i] = pb.hi[0].beta;
      m.lambda_per_device[i] = pb.lambda_hi;
    }
  }
}

inline Solution infeasible_solution(std::size_t n, std::size_t n_red, double l_max) {
  Solution s;
  s.allocation = Allocation::zeros(n, n_red);
  s.multipliers = Multipliers::zeros(n);
  s.primal_value = std::numeric_limits<double>::infinity();
  s.dual_bound = std::numeric_limits<double>::infinity();
  s.rel_gap = 0.0;
  s.status = SolveStatus::infeasible;
  s.l_max = l_max;
  return s;
}

/// Fills energies, gap and status once allocation, multipliers and the dual
/// bound are known.
inline void certify(Solution& s, const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                    const SolverOptions& opts) {
  s.breakdown = total_energy(sys, devices, s.allocation);
  s.primal_value = s.breakdown.total;
  s.rel_gap = (s.primal_value - s.dual_bound) / std::max(s.primal_value, std::numeric_limits<double>::min());
  const bool feasible = check_allocation(sys, devices, s.allocation, opts.feas_tol).feasible;
  s.status = (feasible && s.rel_gap <= opts.gap_tol) ? SolveStatus::optimal : SolveStatus::numerical_failure;
}

/// Shared-Reduce-time solve for Opt (shared loads) and Blind (equal split).
inline Solution solve_shared_reduce(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                    const SolverOptions& opts, LoadRule rule) {
  sys.validate();
  if (devices.size() != sys.n_devices) throw std::invalid_argument("solve: device count differs from n_devices");
  for (const auto& d : devices) d.validate();
  const std::size_t n = devices.size();
  const CapacityResult cap = rule == LoadRule::shared ? opt_lmax(sys, devices) : blind_lmax(sys, devices);
  const double L = sys.task_bits;
  if (L > cap.l_max) return infeasible_solution(n, 1, cap.l_max);

  Solution s;
  s.l_max = cap.l_max;
  s.allocation = Allocation::zeros(n, 1);
  s.multipliers = Multipliers::zeros(n);
  if (rule == LoadRule::equal_split) s.multipliers.lambda_per_device.assign(n, 0.0);
  const double tau = sys.deadline;
  if (L == 0.0) {
    s.allocation.t_red[0] = tau;
    s.dual_bound = dual_value(sys, devices, s.multipliers);
    certify(s, sys, devices, opts);
    return s;
  }

  try {
    const double K = reduce_energy_coeff(sys, devices);
    const double floor = sys.reduce_bits() * slowest_cycle_time(devices);
    double slowest_fill = 0.0;  // Map+Shuffle time needed at full speed
    if (rule == LoadRule::shared) {
      double S = 0.0;
      for (const auto& d : devices) S += full_speed_throughput(sys, d);
      slowest_fill = L / S;
    } else {
      double weakest = std::numeric_limits<double>::infinity();
      for (const auto& d : devices) weakest = std::min(weakest, full_speed_throughput(sys, d));
      slowest_fill = (L / static_cast<double>(n)) / weakest;
    }
    const double t_cap = tau - slowest_fill;
    if (!(t_cap > floor)) throw numerical_error("solve: load at capacity");

    int iters = 0;
    auto inner = [&](double T) {
      InnerResult r = solve_inner(sys, devices, tau - T, rule, Frequency::scaled, opts.max_iterations);
      iters += r.iterations;
      return r;
    };
    auto slope = [&](double T) { return inner(T).beta_sum - (K > 0.0 ? 2.0 * K / (T * T * T) : 0.0); };

    double T = floor;
    if (K > 0.0) {
      const double s_floor = slope(floor);
      if (s_floor < 0.0) {
        double lo = floor, flo = s_floor, hi = floor, fhi = s_floor;
        for (int k = 1; fhi < 0.0; ++k) {
          if (k > 60) throw numerical_error("solve: Reduce time bracket not found");
          lo = hi;
          flo = fhi;
          hi = t_cap - (t_cap - floor) * std::ldexp(1.0, -k);
          fhi = slope(hi);
        }
        const Bracket b = solve_bracketed(slope, lo, hi, flo, fhi, opts.max_iterations);
        iters += b.iterations;
        T = b.mid();
      }
    }
    const InnerResult fin = inner(T);
    s.allocation.t_red[0] = T;
    assemble(sys, fin, tau - T, rule, s.allocation, s.multipliers);
    s.iterations = iters;
    s.dual_bound = dual_value(sys, devices, s.multipliers);
    certify(s, sys, devices, opts);
  } catch (const std::domain_error&) {
    s.status = SolveStatus::numerical_failure;
  } catch (const numerical_error&) {
    s.status = SolveStatus::numerical_failure;
  }
  return s;
}

}  // namespace detail

inline Solution solve_opt(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                          const SolverOptions& opts = {}) {
  return detail::solve_shared_reduce(sys, devices, opts, detail::LoadRule::shared);
}

inline constexpr const char* kSolutionHeader = "idx,l,t_map,t_shu,p,e_map,e_shu,e_red";

/// One row per device and a `total` row with the load and phase sums.
inline void write_solution_csv(std::ostream& os, const Solution& s) {
  using detail::format_double;
  const Allocation& a = s.allocation;
  const EnergyBreakdown& b = s.breakdown;
  os << kSolutionHeader << '\n';
  double load = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    load += a.loads[i];
    os << i << ',' << format_double(a.loads[i]) << ',' << format_double(a.t_map[i]) << ','
       << format_double(a.t_shu[i]) << ',' << format_double(a.power(i)) << ',' << format_double(b.e_map.at(i)) << ','
       << format_double(b.e_shu.at(i)) << ',' << format_double(b.e_red.at(i)) << '\n';
  }
  os << "total," << format_double(load) << ",,,," << format_double(b.map_total()) << ','
     << format_double(b.shuffle_total()) << ',' << format_double(b.reduce_total()) << '\n';
}

/// Devices with l_n > tol L, as a fraction of N.
inline double participation_fraction(const Solution& sol, double tol = 1e-9) {
  const auto& l = sol.allocation.loads;
  if (l.empty()) return 0.0;
  double total = 0.0;
  for (double x : l) total += x;
  std::size_t active = 0;
  for (double x : l)
    if (x > tol * total) ++active;
  return static_cast<double>(active) / static_cast<double>(l.size());
}

}  // namespace mre
