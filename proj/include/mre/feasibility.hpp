#pragma once

// Maximum computing load of the optimal and load-blind schemes, and the
// Map/Shuffle time split at full capacity.

#include "mre/energy_model.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mre {

struct CapacityResult {
  double l_max = 0.0;
  std::vector<double> per_device_terms;  ///< bits each device carries at capacity
  double reduce_floor = 0.0;             ///< beta l_max max_n(c_n / f_n)
  std::vector<double> t_map_full;
  std::vector<double> t_shu_full;
};

/// Largest c_n / f_max_n: seconds per bit of the slowest device.
inline double slowest_cycle_time(const std::vector<DeviceParams>& devices) {
  double m = 0.0;
  for (const auto& d : devices) m = std::max(m, d.c / d.f_max);
  return m;
}

/// End-to-end bits per second of one device when Map runs at f_max and
/// Shuffle at p_max: 1 / (c/f + alpha / r(p_max)).
inline double full_speed_throughput(const SystemConfig& sys, const DeviceParams& dev) {
  const double map_rate = dev.max_rate();
  if (sys.alpha == 0.0) return map_rate;
  const double shu_rate = uplink_rate(dev, sys, dev.p_max);
  return map_rate / (1.0 + sys.alpha * map_rate / shu_rate);
}

/// Map and Shuffle durations that fill `tau - reduce_floor` at full speed.
inline std::pair<double, double> capacity_time_split(const SystemConfig& sys, const DeviceParams& dev,
                                                     double reduce_floor) {
  if (!(reduce_floor < sys.deadline)) throw std::domain_error("capacity_time_split: no time left after Reduce");
  const double budget = sys.deadline - reduce_floor;
  if (sys.alpha == 0.0) return {budget, 0.0};
  const double produce = sys.alpha * dev.max_rate();
  const double transmit = uplink_rate(dev, sys, dev.p_max);
  return {budget / (1.0 + produce / transmit), budget / (1.0 + transmit / produce)};
}

namespace detail {

// Self-consistent capacity: L <= (tau - beta L m) S  <=>  L <= tau S / (1 + beta m S).
inline CapacityResult capacity_from_rate(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                         double rate_sum, const std::vector<double>& share) {
  const double m = slowest_cycle_time(devices);
  CapacityResult r;
  r.l_max = sys.deadline * rate_sum / (1.0 + sys.beta * m * rate_sum);
  r.reduce_floor = sys.beta * r.l_max * m;
  const double budget = sys.deadline - r.reduce_floor;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    r.per_device_terms.push_back(budget * share[i]);
    auto [tm, ts] = capacity_time_split(sys, devices[i], r.reduce_floor);
    r.t_map_full.push_back(tm);
    r.t_shu_full.push_back(ts);
  }
  return r;
}

}  // namespace detail

inline CapacityResult opt_lmax(const SystemConfig& sys, const std::vector<DeviceParams>& devices) {
  if (devices.empty()) throw std::invalid_argument("opt_lmax: no devices");
  std::vector<double> s;
  double total = 0.0;
  for (const auto& d : devices) {
    s.push_back(full_speed_throughput(sys, d));
    total += s.back();
  }
  return detail::capacity_from_rate(sys, devices, total, s);
}

/// Every device gets L/N, so the weakest throughput limits all of them.
inline CapacityResult blind_lmax(const SystemConfig& sys, const std::vector<DeviceParams>& devices) {
  if (devices.empty()) throw std::invalid_argument("blind_lmax: no devices");
  double weakest = std::numeric_limits<double>::infinity();
  for (const auto& d : devices) weakest = std::min(weakest, full_speed_throughput(sys, d));
  const std::vector<double> share(devices.size(), weakest);
  return detail::capacity_from_rate(sys, devices, static_cast<double>(devices.size()) * weakest, share);
}

enum class CapacityRule { opt, blind };

inline bool is_feasible(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                        CapacityRule rule = CapacityRule::opt) {
  if (sys.task_bits == 0.0) return true;
  const CapacityResult cap = rule == CapacityRule::opt ? opt_lmax(sys, devices) : blind_lmax(sys, devices);
  return sys.task_bits <= cap.l_max;
}

}  // namespace mre
