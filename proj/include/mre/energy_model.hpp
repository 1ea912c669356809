#pragma once

// Energy and time of the Map, Shuffle and Reduce phases, the uplink rate,
// and constraint checking for an arbitrary allocation.

#include "mre/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mre {

/// kappa c^3 l^3 / t^2. Zero load costs nothing, even at t = 0.
inline double map_energy(const DeviceParams& dev, double bits, double t) {
  if (bits == 0.0) return 0.0;
  if (!(t > 0.0)) throw std::domain_error("map_energy: positive load needs positive time");
  const double rate = bits / t;
  return dev.compute_coeff() * rate * rate * bits;
}

inline double reduce_energy(const DeviceParams& dev, double reduce_bits, double t_red) {
  if (reduce_bits == 0.0) return 0.0;
  if (!(t_red > 0.0)) throw std::domain_error("reduce_energy: positive load needs positive time");
  return map_energy(dev, reduce_bits, t_red);
}

inline double shuffle_energy(const DeviceParams& dev, double t_shu, double rf_energy) {
  return rf_energy + t_shu * dev.p_circuit;
}

/// Gamma N0 B / h: the transmit power that gives unit SNR.
inline double unit_snr_power(const DeviceParams& dev, const SystemConfig& sys) {
  return sys.snr_gap * sys.noise_psd * sys.bandwidth / dev.h;
}

/// B ln(1 + p h / (Gamma N0 B)), scaled to bits when requested.
inline double uplink_rate(const DeviceParams& dev, const SystemConfig& sys, double p) {
  if (p < 0.0) throw std::domain_error("uplink_rate: negative power");
  return sys.rate_scale() * sys.bandwidth * std::log1p(p / unit_snr_power(dev, sys));
}

/// d r / d p.
inline double uplink_rate_slope(const DeviceParams& dev, const SystemConfig& sys, double p) {
  const double p0 = unit_snr_power(dev, sys);
  return sys.rate_scale() * sys.bandwidth / (p0 + p);
}

/// Inverse of uplink_rate: the power needed for a given rate.
inline double power_for_rate(const DeviceParams& dev, const SystemConfig& sys, double rate) {
  if (rate < 0.0) throw std::domain_error("power_for_rate: negative rate");
  return unit_snr_power(dev, sys) * std::expm1(rate / (sys.rate_scale() * sys.bandwidth));
}

/// Bits deliverable in time t with RF energy e: t r(e / t), closed to 0 at t = 0.
inline double shuffle_capacity(const DeviceParams& dev, const SystemConfig& sys, double t, double e) {
  if (t <= 0.0) return 0.0;
  return t * uplink_rate(dev, sys, e / t);
}

// ---------------------------------------------------------------------------

/// Raw residuals, one entry per device unless noted. Inequalities are
/// satisfied when <= 0; task completeness is an equality.
struct ConstraintReport {
  double task_completeness = 0.0;        ///< sum l - L (bits)
  std::vector<double> map_speed;         ///< c l - t_map f_max (cycles)
  std::vector<double> reduce_speed;      ///< c beta L / f_max - t_red (s)
  std::vector<double> deadline;          ///< t_map + t_shu + max t_red - tau (s)
  std::vector<double> shuffle_rate;      ///< alpha l - t_shu r(E / t_shu) (bits)
  std::vector<double> power_cap;         ///< E - t_shu p_max (J)
  double most_negative_entry = 0.0;      ///< smallest variable value (>= 0 required)
  double max_scaled_violation = 0.0;     ///< worst residual on natural scales
  bool feasible = false;
};

/// Evaluates every constraint. Residuals are scaled by tau (times), L
/// (bits) and tau p_max (energies) before comparing against `tol`.
inline ConstraintReport check_allocation(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                         const Allocation& a, double tol) {
  const std::size_t n = devices.size();
  if (n != sys.n_devices || a.loads.size() != n || a.t_map.size() != n || a.t_shu.size() != n ||
      a.rf_energy.size() != n || (a.t_red.size() != 1 && a.t_red.size() != n))
    throw std::invalid_argument("check_allocation: dimension mismatch");

  ConstraintReport rep;
  const double tau = sys.deadline;
  const double bit_scale = std::max(sys.task_bits, 1.0);
  const double red_bits = sys.reduce_bits();
  const double t_red_max = a.max_reduce_time();

  double load_sum = 0.0;
  for (double l : a.loads) load_sum += l;
  rep.task_completeness = load_sum - sys.task_bits;

  double worst = std::abs(rep.task_completeness) / bit_scale;
  double most_negative = 0.0;
  auto note = [&](double scaled) { worst = std::max(worst, scaled); };

  for (std::size_t i = 0; i < n; ++i) {
    const DeviceParams& d = devices[i];
    const double tr = a.reduce_time(i);
    for (double v : {a.loads[i], a.t_map[i], a.t_shu[i], a.rf_energy[i], tr}) most_negative = std::min(most_negative, v);
    note(-a.loads[i] / bit_scale);
    note(-std::min({a.t_map[i], a.t_shu[i], tr}) / tau);
    note(-a.rf_energy[i] / (tau * d.p_max));

    rep.map_speed.push_back(d.c * a.loads[i] - a.t_map[i] * d.f_max);
    note(rep.map_speed.back() / d.f_max / tau);

    rep.reduce_speed.push_back(d.c * red_bits / d.f_max - tr);
    note(rep.reduce_speed.back() / tau);

    rep.deadline.push_back(a.t_map[i] + a.t_shu[i] + t_red_max - tau);
    note(rep.deadline.back() / tau);

    const double cap = shuffle_capacity(d, sys, a.t_shu[i], std::max(a.rf_energy[i], 0.0));
    rep.shuffle_rate.push_back(sys.alpha * a.loads[i] - cap);
    note(rep.shuffle_rate.back() / bit_scale);

    rep.power_cap.push_back(a.rf_energy[i] - a.t_shu[i] * d.p_max);
    note(rep.power_cap.back() / (tau * d.p_max));
  }
  rep.most_negative_entry = most_negative;
  rep.max_scaled_violation = worst;
  rep.feasible = worst <= tol;
  return rep;
}

inline void write_constraint_report_csv(std::ostream& os, const ConstraintReport& r) {
  using detail::format_double;
  os << "idx,map_speed,reduce_speed,deadline,shuffle_rate,power_cap\n";
  for (std::size_t i = 0; i < r.map_speed.size(); ++i) {
    os << i << ',' << format_double(r.map_speed[i]) << ',' << format_double(r.reduce_speed[i]) << ','
       << format_double(r.deadline[i]) << ',' << format_double(r.shuffle_rate[i]) << ','
       << format_double(r.power_cap[i]) << '\n';
  }
  os << "task_completeness," << format_double(r.task_completeness) << ",,,,\n";
}

/// Per-phase energies. Every device runs Reduce, so idle devices still pay e_red.
inline EnergyBreakdown total_energy(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                    const Allocation& a) {
  const std::size_t n = devices.size();
  if (a.loads.size() != n) throw std::invalid_argument("total_energy: dimension mismatch");
  EnergyBreakdown b;
  b.e_map.resize(n);
  b.e_shu.resize(n);
  b.e_red.resize(n);
  const double red_bits = sys.reduce_bits();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    b.e_map[i] = map_energy(devices[i], a.loads[i], a.t_map[i]);
    b.e_shu[i] = shuffle_energy(devices[i], a.t_shu[i], a.rf_energy[i]);
    b.e_red[i] = reduce_energy(devices[i], red_bits, a.reduce_time(i));
  }
  for (std::size_t i = 0; i < n; ++i) total += b.e_map[i];
  for (std::size_t i = 0; i < n; ++i) total += b.e_shu[i];
  for (std::size_t i = 0; i < n; ++i) total += b.e_red[i];
  b.total = total;
  return b;
}

}  // namespace mre
