#pragma once

// Exhaustive grid search for tiny instances (N <= 3), used to check the
// solver. The Shuffle rate constraint is taken tight, so each device is
// described by its load, its transmit power and its share of the time
// left after Shuffle.

#include "mre/solver.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mre {

namespace detail {

struct DevicePick {
  double cost = std::numeric_limits<double>::infinity();
  double t_map = 0.0;
  double t_shu = 0.0;
  double power = 0.0;
};

/// Cheapest Map+Shuffle for `bits` within `budget` over a (power, Map time) grid.
inline DevicePick grid_device(const DeviceParams& d, const SystemConfig& sys, double bits, double budget, int res) {
  DevicePick best;
  if (bits == 0.0) {
    best.cost = 0.0;
    return best;
  }
  const double t_min = bits / d.max_rate();
  const int n_power = sys.alpha > 0.0 ? res : 1;
  for (int i = 1; i <= n_power; ++i) {
    double p = 0.0, ts = 0.0;
    if (sys.alpha > 0.0) {
      p = d.p_max * static_cast<double>(i) / n_power;
      ts = sys.alpha * bits / uplink_rate(d, sys, p);
    }
    const double room = budget - ts - t_min;
    if (room < 0.0) continue;
    for (int j = 0; j <= res; ++j) {
      const double tm = t_min + room * static_cast<double>(j) / res;
      if (!(tm > 0.0)) continue;
      const double cost = map_energy(d, bits, tm) + (p + d.p_circuit) * ts;
      if (cost < best.cost) best = {cost, tm, ts, p};
    }
  }
  return best;
}

struct GridWindow {
  double t_lo = 0.0, t_hi = 0.0;
  std::vector<double> load_lo, load_hi;  ///< free coordinates: the first N-1 loads
};

struct GridBest {
  double value = std::numeric_limits<double>::infinity();
  double t_red = 0.0;
  std::vector<double> loads;
  std::vector<DevicePick> picks;
};

inline void grid_scan(const SystemConfig& sys, const std::vector<DeviceParams>& devices, const GridWindow& w, int res,
                      GridBest& best) {
  const std::size_t n = devices.size();
  const double L = sys.task_bits;
  const double K = reduce_energy_coeff(sys, devices);
  const std::size_t free = n - 1;
  std::size_t combos = 1;
  for (std::size_t k = 0; k < free; ++k) combos *= static_cast<std::size_t>(res + 1);

  for (int it = 0; it <= res; ++it) {
    const double T = w.t_lo + (w.t_hi - w.t_lo) * static_cast<double>(it) / res;
    if (T >= sys.deadline) continue;
    if (K > 0.0 && !(T > 0.0)) continue;
    const double budget = sys.deadline - T;
    const double reduce_cost = K > 0.0 ? K / (T * T) : 0.0;
    std::vector<double> loads(n);
    std::vector<DevicePick> picks(n);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t code = c;
      double used = 0.0;
      for (std::size_t k = 0; k < free; ++k) {
        const int idx = static_cast<int>(code % static_cast<std::size_t>(res + 1));
        code /= static_cast<std::size_t>(res + 1);
        loads[k] = w.load_lo[k] + (w.load_hi[k] - w.load_lo[k]) * static_cast<double>(idx) / res;
        used += loads[k];
      }
      loads[n - 1] = L - used;
      if (loads[n - 1] < 0.0) continue;
      double total = reduce_cost;
      for (std::size_t k = 0; k < n && std::isfinite(total); ++k) {
        picks[k] = grid_device(devices[k], sys, loads[k], budget, res);
        total += picks[k].cost;
      }
      if (total < best.value) best = {total, T, loads, picks};
    }
  }
}

}  // namespace detail

/// Best grid point for the energy program, refined once around the
/// incumbent. `resolution` is the number of cells per grid axis.
inline Solution brute_force_oracle(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                   int resolution = 40) {
  sys.validate();
  const std::size_t n = devices.size();
  if (n == 0 || n > 3) throw std::invalid_argument("brute_force_oracle: needs 1 to 3 devices");
  if (resolution < 2) throw std::invalid_argument("brute_force_oracle: resolution too small");
  const double L = sys.task_bits;
  const double floor = sys.reduce_bits() * slowest_cycle_time(devices);
  if (!(floor < sys.deadline)) throw std::domain_error("brute_force_oracle: no feasible grid point");

  detail::GridWindow w;
  w.t_lo = floor;
  w.t_hi = sys.deadline;
  w.load_lo.assign(n - 1, 0.0);
  w.load_hi.assign(n - 1, L);
  detail::GridBest best;
  detail::grid_scan(sys, devices, w, resolution, best);
  if (!std::isfinite(best.value)) throw std::domain_error("brute_force_oracle: no feasible grid point");

  const double t_cell = (w.t_hi - w.t_lo) / resolution;
  const double l_cell = L / resolution;
  detail::GridWindow fine;
  fine.t_lo = std::max(floor, best.t_red - t_cell);
  fine.t_hi = std::min(sys.deadline, best.t_red + t_cell);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    fine.load_lo.push_back(std::max(0.0, best.loads[k] - l_cell));
    fine.load_hi.push_back(std::min(L, best.loads[k] + l_cell));
  }
  detail::grid_scan(sys, devices, fine, resolution, best);

  Solution s;
  s.allocation = Allocation::zeros(n, 1);
  s.allocation.t_red[0] = best.t_red;
  for (std::size_t k = 0; k < n; ++k) {
    s.allocation.loads[k] = best.loads[k];
    if (best.loads[k] > 0.0) {
      s.allocation.t_map[k] = best.picks[k].t_map;
      s.allocation.t_shu[k] = best.picks[k].t_shu;
      s.allocation.rf_energy[k] = best.picks[k].power * best.picks[k].t_shu;
    }
  }
  s.multipliers = Multipliers::zeros(n);
  s.breakdown = total_energy(sys, devices, s.allocation);
  s.primal_value = s.breakdown.total;
  s.dual_bound = 0.0;
  s.rel_gap = s.primal_value > 0.0 ? 1.0 : 0.0;
  s.status = SolveStatus::optimal;
  s.l_max = opt_lmax(sys, devices).l_max;
  return s;
}

}  // namespace mre
