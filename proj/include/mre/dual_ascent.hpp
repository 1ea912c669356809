#pragma once

// Independent lower bound by ascent on the dual function. For each water
// level lambda the rate and time multipliers are set to their exact
// maximisers (the crossing of the Map and Shuffle profit curves), leaving
// a one-dimensional concave problem in lambda. Its subgradient is
// L - sum l_n at the matching Lagrangian minimiser. The step doubles until
// the subgradient first changes sign and halves from then on.

#include "mre/solver.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace mre {

struct DualAscentOptions {
  int iterations = 300;
  int max_root_iterations = 200;
};

struct DualAscentResult {
  Multipliers multipliers;  ///< best multipliers found
  double dual_bound = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;  ///< best-so-far dual value per iteration
};

namespace detail {

struct DualProbe {
  Multipliers mult;
  double value = 0.0;
  double subgradient = 0.0;
};

inline DualProbe probe_dual(const SystemConfig& sys, const std::vector<DeviceParams>& devices, double lambda,
                            int max_iter) {
  DualProbe pr;
  const std::size_t n = devices.size();
  pr.mult = Multipliers::zeros(n);
  pr.mult.lambda = lambda;
  double load = 0.0;
  std::vector<DeviceResponse> resp;
  for (std::size_t i = 0; i < n; ++i) {
    resp.push_back(respond(devices[i], sys, lambda, Frequency::scaled, max_iter));
    pr.mult.mu[i] = resp.back().mu;
    pr.mult.beta_t[i] = resp.back().beta;
  }
  const double T = solve_reduce_sub(devices, sys, pr.mult.beta_t, sys.deadline).t_red_star;
  for (const auto& r : resp) load += (sys.deadline - T) * r.throughput;
  pr.value = dual_value(sys, devices, pr.mult);
  pr.subgradient = sys.task_bits - load;
  return pr;
}

}  // namespace detail

inline DualAscentResult dual_ascent(const SystemConfig& sys, const std::vector<DeviceParams>& devices,
                                    const DualAscentOptions& opts = {}) {
  sys.validate();
  DualAscentResult out;
  double step = 0.0;
  for (const auto& d : devices) {
    const double F = d.max_rate();
    double price = 3.0 * d.compute_coeff() * F * F;
    if (sys.alpha > 0.0) price += sys.alpha * (d.p_max + d.p_circuit) / uplink_rate(d, sys, d.p_max);
    step = std::max(step, price);
  }
  double lambda = 0.0;
  double last_sign = 0.0;
  bool flipped = false;
  for (int k = 0; k < opts.iterations; ++k) {
    const detail::DualProbe pr = detail::probe_dual(sys, devices, lambda, opts.max_root_iterations);
    if (pr.value > out.dual_bound) {
      out.dual_bound = pr.value;
      out.multipliers = pr.mult;
    }
    out.trace.push_back(out.dual_bound);
    if (pr.subgradient == 0.0) break;
    const double sign = pr.subgradient > 0.0 ? 1.0 : -1.0;
    if (last_sign != 0.0 && sign != last_sign) flipped = true;
    if (last_sign != 0.0) step = flipped ? step * 0.5 : step * 2.0;
    last_sign = sign;
    lambda += sign * step;
  }
  return out;
}

}  // namespace mre
