#pragma once

// Dual decomposition of the energy program. For fixed outer multipliers
// (lambda, mu_n, beta_n) the partial Lagrangian splits into one Map and one
// Shuffle problem per device plus a single Reduce problem, each with a
// closed-form minimiser. Summing their minima gives the dual function, a
// lower bound on the optimal energy for any multipliers.

#include "mre/energy_model.hpp"
#include "mre/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace mre {

/// Time decision of a bang-bang subproblem: a point (lo == hi) or the whole
/// indifference interval.
struct TimeChoice {
  double lo = 0.0;
  double hi = 0.0;
  bool indifferent() const { return lo != hi; }
  /// Representative value; ties go to the longer time.
  double chosen() const { return hi; }
};

struct MapSubSolution {
  double l_star = 0.0;
  TimeChoice t_map_star;
  double m_star = 0.0;  ///< effective processing rate, bits/s
  double gamma2 = 0.0;  ///< multiplier of l <= t f_max / c
  double rho1 = 0.0;    ///< time switch: t = tau if > 0, t = 0 if < 0
  double value = 0.0;   ///< subproblem minimum
};

struct ShuffleSubSolution {
  double e_star = 0.0;
  TimeChoice t_shu_star;
  double p_star = 0.0;
  double delta2 = 0.0;  ///< multiplier of E <= t p_max
  double rho2 = 0.0;
  double value = 0.0;
};

struct ReduceSubSolution {
  double t_red_star = 0.0;
  double value = 0.0;
};

// ---------------------------------------------------------------------------
// Per-unit-time profits. With price y (J/bit) on Map output, a device that
// runs Map at rate M earns y M - kappa c^3 M^3 per second; with price mu on
// shuffled bits, transmitting at power p earns mu r(p) - p - P^c.

enum class Frequency { scaled, fixed_max };

struct RateProfit {
  double profit = 0.0;
  double rate = 0.0;  ///< Map rate M (bits/s) or transmit power p (W)
};

/// max over 0 <= M <= f/c of y M - kappa c^3 M^3 (scaled frequency), or the
/// profit of running at f/c when the frequency is pinned (clipped at 0).
inline RateProfit map_profit(const DeviceParams& d, double price, Frequency freq = Frequency::scaled) {
  const double a = d.compute_coeff();
  const double F = d.max_rate();
  if (freq == Frequency::fixed_max) {
    const double prof = price * F - a * F * F * F;
    return prof > 0.0 ? RateProfit{prof, F} : RateProfit{0.0, 0.0};
  }
  if (price <= 0.0) return {0.0, 0.0};
  if (price >= 3.0 * a * F * F) return {price * F - a * F * F * F, F};
  const double M = std::sqrt(price / (3.0 * a));
  return {2.0 * a * M * M * M, M};
}

/// Optimal transmit power for rate price mu: solves mu r'(p) = 1 on [0, p_max].
inline double optimal_power(const DeviceParams& d, const SystemConfig& sys, double mu) {
  const double p = mu * sys.rate_scale() * sys.bandwidth - unit_snr_power(d, sys);
  return std::clamp(p, 0.0, d.p_max);
}

inline RateProfit shuffle_profit(const DeviceParams& d, const SystemConfig& sys, double mu) {
  const double p = optimal_power(d, sys, mu);
  return {mu * uplink_rate(d, sys, p) - p - d.p_circuit, p};
}

namespace detail {

inline TimeChoice bang_bang(double rho, double tau) {
  if (rho > 0.0) return {tau, tau};
  if (rho < 0.0) return {0.0, 0.0};
  return {0.0, tau};
}

}  // namespace detail

/// Minimises kappa c^3 l^3 / t^2 + (alpha mu - lambda) l + beta t over
/// 0 <= l <= t f/c, 0 <= t <= tau.
inline MapSubSolution solve_map_sub(const DeviceParams& dev, const SystemConfig& sys, double lambda, double mu,
                                    double beta, double tau) {
  const double a = dev.compute_coeff();
  const double F = dev.max_rate();
  const double y = lambda - sys.alpha * mu;
  MapSubSolution s;
  if (y <= 0.0) {
    s.m_star = 0.0;
  } else if (y >= 3.0 * a * F * F) {
    s.m_star = F;
    s.gamma2 = y - 3.0 * a * F * F;
  } else {
    s.m_star = std::sqrt(y / (3.0 * a));
  }
  const double M = s.m_star;
  s.rho1 = 2.0 * a * M * M * M - beta + s.gamma2 * F;
  s.t_map_star = detail::bang_bang(s.rho1, tau);
  s.l_star = M * s.t_map_star.chosen();
  // Objective along l = M t is t (a M^3 - y M + beta).
  s.value = tau * std::min(0.0, a * M * M * M - y * M + beta);
  return s;
}

/// Minimises E + (P^c + beta) t - mu t r(E/t) over 0 <= E <= t p_max, 0 <= t <= tau.
inline ShuffleSubSolution solve_shuffle_sub(const DeviceParams& dev, const SystemConfig& sys, double mu, double beta,
                                            double tau) {
  ShuffleSubSolution s;
  s.p_star = optimal_power(dev, sys, mu);
  const double p = s.p_star;
  if (p >= dev.p_max) s.delta2 = std::max(0.0, mu * uplink_rate_slope(dev, sys, dev.p_max) - 1.0);
  const double r = uplink_rate(dev, sys, p);
  s.rho2 = mu * r - dev.p_circuit - beta - mu * p * uplink_rate_slope(dev, sys, p) + s.delta2 * dev.p_max;
  s.t_shu_star = detail::bang_bang(s.rho2, tau);
  s.e_star = p * s.t_shu_star.chosen();
  s.value = tau * std::min(0.0, p + dev.p_circuit + beta - mu * r);
  return s;
}

/// Sum of kappa_n c_n^3 (beta L)^3: the Reduce energy at unit time.
inline double reduce_energy_coeff(const SystemConfig& sys, const std::vector<DeviceParams>& devices) {
  const double rb = sys.reduce_bits();
  double k = 0.0;
  for (const auto& d : devices) k += d.compute_coeff();
  return k * rb * rb * rb;
}

/// Minimises sum_n kappa c^3 (beta L)^3 / t^2 + (sum beta_n) t over floor <= t <= tau.
inline ReduceSubSolution solve_reduce_sub(const std::vector<DeviceParams>& devices, const SystemConfig& sys,
                                          const std::vector<double>& beta_t, double tau) {
  const double floor = sys.reduce_bits() * slowest_cycle_time(devices);
  const double K = reduce_energy_coeff(sys, devices);
  const double B = std::accumulate(beta_t.begin(), beta_t.end(), 0.0);
  ReduceSubSolution s;
  if (B <= 0.0) {
    s.t_red_star = tau;
  } else if (K == 0.0) {
    s.t_red_star = floor;
  } else {
    s.t_red_star = std::clamp(std::cbrt(2.0 * K / B), floor, tau);
  }
  const double t = s.t_red_star;
  s.value = (K > 0.0 ? K / (t * t) : 0.0) + B * t;
  return s;
}

/// The dual function. With `lambda_per_device` set, each device carries its
/// own load constraint l_n = L/N instead of the shared sum constraint.
inline double dual_value(const SystemConfig& sys, const std::vector<DeviceParams>& devices, const Multipliers& mult) {
  mult.validate();
  const std::size_t n = devices.size();
  if (mult.mu.size() != n) throw std::invalid_argument("dual_value: dimension mismatch");
  const double tau = sys.deadline;
  double g = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g += solve_map_sub(devices[i], sys, mult.load_price(i), mult.mu[i], mult.beta_t[i], tau).value;
    g += solve_shuffle_sub(devices[i], sys, mult.mu[i], mult.beta_t[i], tau).value;
  }
  g += solve_reduce_sub(devices, sys, mult.beta_t, tau).value;
  if (mult.per_device_loads()) {
    const double share = sys.task_bits / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) g += mult.lambda_per_device[i] * share;
  } else {
    g += mult.lambda * sys.task_bits;
  }
  for (double b : mult.beta_t) g -= b * tau;
  return g;
}

// ---------------------------------------------------------------------------
// KKT residuals of the Map, Shuffle and Reduce subproblems at a primal point,
// with the inner multipliers (gamma, delta, epsilon families) rebuilt from
// the active constraints.

struct KktReport {
  std::vector<double> map_load;        ///< d/dl of the Map Lagrangian
  std::vector<double> map_time;        ///< d/dt_map
  std::vector<double> shuffle_energy;  ///< d/dE
  std::vector<double> shuffle_time;    ///< d/dt_shu
  double reduce_time = 0.0;            ///< d/dt_red
  std::vector<double> map_slackness;   ///< worst complementary product, Map
  std::vector<double> shuffle_slackness;
  double reduce_slackness = 0.0;
  std::vector<double> outer_slackness;  ///< mu and beta against their constraints
  double max_abs = 0.0;                 ///< worst entry after scaling
};

inline KktReport kkt_residuals(const SystemConfig& sys, const std::vector<DeviceParams>& devices, const Allocation& a,
                               const Multipliers& mult) {
  const std::size_t n = devices.size();
  if (a.size() != n || mult.mu.size() != n || a.t_red.size() != 1)
    throw std::invalid_argument("kkt_residuals: dimension mismatch (shared Reduce time required)");
  constexpr double kActive = 1e-9;
  const double tau = sys.deadline;
  const double alpha = sys.alpha;
  const double T = a.t_red[0];
  const double L = std::max(sys.task_bits, 1.0);
  const EnergyBreakdown eb = total_energy(sys, devices, a);
  const double energy_scale = std::max(eb.total, std::numeric_limits<double>::min());

  KktReport rep;
  double worst = 0.0;
  auto keep = [&](double v) {
    worst = std::max(worst, std::abs(v));
    return v;
  };
  auto positive = [](double v) { return std::max(v, std::numeric_limits<double>::min()); };

  for (std::size_t i = 0; i < n; ++i) {
    const DeviceParams& d = devices[i];
    const double lam = mult.load_price(i);
    const double mu = mult.mu[i];
    const double beta = mult.beta_t[i];
    const double kc = d.compute_coeff();
    const double F = d.max_rate();
    const double l = a.loads[i];
    const double tm = a.t_map[i];
    const double ts = a.t_shu[i];
    const double E = a.rf_energy[i];

    // Map: 0/0 rates fall back to the closed-form rate for these multipliers.
    const double M = tm > 0.0 ? l / tm : solve_map_sub(d, sys, lam, mu, beta, tau).m_star;
    const double gamma2 = (tm > 0.0 && M >= F * (1.0 - kActive)) ? std::max(0.0, lam - alpha * mu - 3.0 * kc * M * M) : 0.0;
    const double gamma1 = l == 0.0 ? std::max(0.0, 3.0 * kc * M * M + alpha * mu - lam + gamma2) : 0.0;
    const double s27 = positive(std::abs(lam) + alpha * mu + 3.0 * kc * M * M + gamma2);
    rep.map_load.push_back(keep((3.0 * kc * M * M + alpha * mu - lam - gamma1 + gamma2) / s27));

    const double rem28 = -2.0 * kc * M * M * M + beta - gamma2 * F;
    const double gamma3 = tm == 0.0 ? std::max(0.0, rem28) : 0.0;
    const double gamma4 = tm >= tau ? std::max(0.0, -rem28) : 0.0;
    const double s28 = positive(beta + 2.0 * kc * M * M * M + gamma2 * F);
    rep.map_time.push_back(keep((rem28 - gamma3 + gamma4) / s28));

    const double cs_map = std::max({gamma1 * l, std::abs(gamma2 * (l - tm * F)), gamma3 * tm, std::abs(gamma4 * (tm - tau))});
    rep.map_slackness.push_back(keep(cs_map / energy_scale));

    // Shuffle.
    const double p = ts > 0.0 ? E / ts : optimal_power(d, sys, mu);
    const double slope = uplink_rate_slope(d, sys, p);
    const double r = uplink_rate(d, sys, p);
    const double delta2 = p >= d.p_max * (1.0 - kActive) ? std::max(0.0, mu * slope - 1.0) : 0.0;
    const double delta1 = E == 0.0 ? std::max(0.0, 1.0 + delta2 - mu * slope) : 0.0;
    const double s33 = 1.0 + delta2 + mu * slope;
    rep.shuffle_energy.push_back(keep((1.0 - delta1 + delta2 - mu * slope) / s33));

    const double rem34 = mu * (p * slope - r) + d.p_circuit + beta - delta2 * d.p_max;
    const double delta3 = ts == 0.0 ? std::max(0.0, rem34) : 0.0;
    const double delta4 = ts >= tau ? std::max(0.0, -rem34) : 0.0;
    const double s34 = positive(mu * r + mu * p * slope + d.p_circuit + beta + delta2 * d.p_max);
    rep.shuffle_time.push_back(keep((rem34 - delta3 + delta4) / s34));

    const double cs_shu = std::max({delta1 * E, std::abs(delta2 * (E - ts * d.p_max)), delta3 * ts, std::abs(delta4 * (ts - tau))});
    rep.shuffle_slackness.push_back(keep(cs_shu / energy_scale));

    // Outer constraints carried by beta_n and mu_n.
    const double time_slack = tm + ts + T - tau;
    const double rate_slack = alpha * l - shuffle_capacity(d, sys, ts, E);
    rep.outer_slackness.push_back(keep(std::max(std::abs(beta * time_slack), std::abs(mu * rate_slack)) / energy_scale));
  }

  // Reduce.
  const double K = reduce_energy_coeff(sys, devices);
  const double floor = sys.reduce_bits() * slowest_cycle_time(devices);
  const double B = std::accumulate(mult.beta_t.begin(), mult.beta_t.end(), 0.0);
  const double pull = (K > 0.0 && T > 0.0) ? 2.0 * K / (T * T * T) : 0.0;
  const double rem39 = B - pull;
  const double eps1 = T <= floor * (1.0 + kActive) ? std::max(0.0, rem39) : 0.0;
  const double eps2 = T >= tau * (1.0 - kActive) ? std::max(0.0, -rem39) : 0.0;
  rep.reduce_time = keep((eps2 - eps1 + rem39) / positive(B + pull));
  rep.reduce_slackness = keep(std::max(std::abs(eps1 * (floor - T)), std::abs(eps2 * (T - tau))) / energy_scale);
  (void)L;

  rep.max_abs = worst;
  return rep;
}

inline void write_kkt_report_csv(std::ostream& os, const KktReport& r) {
  using detail::format_double;
  os << "idx,map_load,map_time,shuffle_energy,shuffle_time,map_slackness,shuffle_slackness,outer_slackness\n";
  for (std::size_t i = 0; i < r.map_load.size(); ++i) {
    os << i << ',' << format_double(r.map_load[i]) << ',' << format_double(r.map_time[i]) << ','
       << format_double(r.shuffle_energy[i]) << ',' << format_double(r.shuffle_time[i]) << ','
       << format_double(r.map_slackness[i]) << ',' << format_double(r.shuffle_slackness[i]) << ','
       << format_double(r.outer_slackness[i]) << '\n';
  }
  os << "reduce," << format_double(r.reduce_time) << ",,,,," << format_double(r.reduce_slackness) << ",\n";
}

}  // namespace mre
