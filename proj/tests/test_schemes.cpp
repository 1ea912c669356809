#include "mre/schemes.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mre;

namespace {

DeviceParams unit_device() { return {1e-27, 1000, 1e9, 1e-3, 0.02, 0.01}; }

SystemConfig table1_system(std::size_t n, double L = 1e6, double beta = 1e-4, double tau = 0.1) {
  return make_system(n, L, beta, tau, 15e3, 1e-9);
}

// L at `ratio` of the smaller of the two capacities, so every scheme is feasible.
SystemConfig common_load(const std::vector<DeviceParams>& devs, double ratio, double tau = 0.1) {
  const std::size_t n = devs.size();
  const SystemConfig probe = table1_system(n, 1e6, 1e-4, tau);
  return table1_system(n, ratio * std::min(opt_lmax(probe, devs).l_max, blind_lmax(probe, devs).l_max), 1e-4, tau);
}

}  // namespace

TEST(SchemeId, NamesRoundTrip) {
  for (SchemeId id : kAllSchemes) EXPECT_EQ(parse_scheme(to_string(id)), id);
  EXPECT_EQ(parse_scheme("blind-nodfs"), SchemeId::blind_nodfs);
  EXPECT_THROW(parse_scheme("fastest"), std::invalid_argument);
}

TEST(Blind, IdenticalDevicesMatchOpt) {
  const std::vector<DeviceParams> devs(4, unit_device());
  const SystemConfig sys = common_load(devs, 0.5);
  const Solution o = solve_opt(sys, devs), b = solve_blind(sys, devs);
  ASSERT_EQ(b.status, SolveStatus::optimal);
  EXPECT_NEAR(b.primal_value, o.primal_value, 1e-9 * o.primal_value);
}

TEST(Blind, RestrictionCostsEnergyAndSplitsEvenly) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto devs = sample_population(seed, PopulationBounds::table1(), 6);
    const SystemConfig sys = common_load(devs, 0.5);
    const Solution o = solve_opt(sys, devs), b = solve_blind(sys, devs);
    ASSERT_EQ(b.status, SolveStatus::optimal);
    EXPECT_GE(b.primal_value, o.primal_value * (1 - 1e-8));
    for (double l : b.allocation.loads) EXPECT_NEAR(l, sys.task_bits / 6, 1e-12 * sys.task_bits);
    EXPECT_EQ(participation_fraction(b), 1.0);
  }
}

TEST(Blind, WeakDeviceMakesBlindInfeasibleFirst) {
  std::vector<DeviceParams> devs(3, unit_device());
  devs[2].h = 1e-6;
  const SystemConfig probe = table1_system(3);
  const double blind = blind_lmax(probe, devs).l_max, opt = opt_lmax(probe, devs).l_max;
  ASSERT_LT(blind, 0.9 * opt);
  const SystemConfig sys = table1_system(3, 0.5 * (blind + opt));
  EXPECT_EQ(solve_blind(sys, devs).status, SolveStatus::infeasible);
  EXPECT_EQ(solve_opt(sys, devs).status, SolveStatus::optimal);
}

TEST(NoDfs, MapEnergyIsLinearInLoad) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto devs = sample_population(seed, PopulationBounds::table1(), 5);
    const Solution s = solve_nodfs(common_load(devs, 0.5), devs);
    ASSERT_EQ(s.status, SolveStatus::optimal);
    for (std::size_t i = 0; i < devs.size(); ++i) {
      const auto& d = devs[i];
      const double linear = d.kappa * d.c * s.allocation.loads[i] * d.f_max * d.f_max;
      EXPECT_NEAR(s.breakdown.e_map[i], linear, 1e-9 * linear + 1e-300);
      EXPECT_NEAR(s.allocation.t_map[i], d.c * s.allocation.loads[i] / d.f_max, 1e-12);
    }
  }
}

TEST(NoDfs, PerDeviceReduceAtFullSpeed) {
  const auto devs = sample_population(3, PopulationBounds::table1(), 4);
  const SystemConfig sys = common_load(devs, 0.5);
  const Solution s = solve_nodfs(sys, devs);
  ASSERT_EQ(s.allocation.t_red.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& d = devs[i];
    EXPECT_NEAR(s.allocation.t_red[i], d.c * sys.reduce_bits() / d.f_max, 1e-18);
    const double linear = d.kappa * d.c * sys.reduce_bits() * d.f_max * d.f_max;
    EXPECT_NEAR(s.breakdown.e_red[i], linear, 1e-9 * linear);
  }
}

TEST(NoDfs, SameCapacityAsOpt) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto devs = sample_population(seed, PopulationBounds::table1(), 5);
    const double lmax = opt_lmax(table1_system(5), devs).l_max;
    EXPECT_EQ(solve_nodfs(table1_system(5, 0.99 * lmax), devs).status, SolveStatus::optimal) << seed;
    EXPECT_EQ(solve_nodfs(table1_system(5, 1.01 * lmax), devs).status, SolveStatus::infeasible) << seed;
  }
}

TEST(NoDfs, MeanParticipationTracksLoadRatio) {
  for (double x : {0.2, 0.5, 0.8}) {
    double sum = 0.0;
    const int trials = 60;
    for (int seed = 0; seed < trials; ++seed) {
      const auto devs = sample_population(seed, PopulationBounds::table1(), 10);
      const double lmax = opt_lmax(table1_system(10), devs).l_max;
      const Solution s = solve_nodfs(table1_system(10, x * lmax), devs);
      ASSERT_EQ(s.status, SolveStatus::optimal);
      sum += participation_fraction(s);
    }
    EXPECT_NEAR(sum / trials, x, 0.1);
  }
}

TEST(BlindNoDfs, DevicesDecouple) {
  auto devs = sample_population(6, PopulationBounds::table1(), 4);
  const SystemConfig sys = common_load(devs, 0.3);
  const Solution a = solve_blind_nodfs(sys, devs);
  ASSERT_EQ(a.status, SolveStatus::optimal);
  auto changed = devs;
  changed[1].h *= 3.0;
  changed[2].p_circuit *= 0.5;
  changed[3].p_max *= 1.2;
  const Solution b = solve_blind_nodfs(sys, changed);
  ASSERT_EQ(b.status, SolveStatus::optimal);
  EXPECT_EQ(a.allocation.t_shu[0], b.allocation.t_shu[0]);
  EXPECT_EQ(a.allocation.rf_energy[0], b.allocation.rf_energy[0]);
  EXPECT_EQ(a.breakdown.e_shu[0], b.breakdown.e_shu[0]);
}

TEST(BlindNoDfs, EfficientPowerMinimisesEnergyPerBit) {
  const SystemConfig sys = table1_system(3);
  for (const auto& d : sample_population(7, PopulationBounds::table1(), 50)) {
    const double p = energy_efficient_power(d, sys);
    // Energy per bit (p + P^c) / r(p) is stationary at p.
    auto cost = [&](double q) { return (q + d.p_circuit) / uplink_rate(d, sys, q); };
    EXPECT_LE(cost(p), cost(p * 1.01) * (1 + 1e-12));
    EXPECT_LE(cost(p), cost(p * 0.99) * (1 + 1e-12));
  }
}

TEST(NoOpt, HandEvaluatedShuffleTime) {
  const std::vector<DeviceParams> devs(2, unit_device());
  const SystemConfig sys = table1_system(2, 1e6, 1e-4, 1.0);
  const Solution s = solve_noopt(sys, devs);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  const double snr = 0.02 * 1e-3 / (1e-9 * 15e3);
  EXPECT_NEAR(snr, 4.0 / 3.0, 1e-12);
  const double r = 15000.0 * std::log(7.0 / 3.0);
  EXPECT_NEAR(r, 12709.0, 1.0);
  EXPECT_NEAR(s.allocation.t_shu[0], 50.0 / r, 1e-12);
  EXPECT_NEAR(s.allocation.t_shu[0], 3.934e-3, 1e-6);
  EXPECT_NEAR(s.allocation.rf_energy[0], 0.02 * 50.0 / r, 1e-15);
}

TEST(NoOpt, MapEnergyClosedForm) {
  const auto devs = sample_population(9, PopulationBounds::table1(), 5);
  const SystemConfig sys = common_load(devs, 0.5);
  const Solution s = solve_noopt(sys, devs);
  ASSERT_EQ(s.status, SolveStatus::optimal);
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& d = devs[i];
    const double expected = d.kappa * d.c * (sys.task_bits / 5) * d.f_max * d.f_max;
    EXPECT_NEAR(s.breakdown.e_map[i], expected, 1e-12 * expected);
  }
  EXPECT_EQ(s.rel_gap, 0.0);
}

TEST(NoOpt, DeadlineViolationIsInfeasible) {
  const std::vector<DeviceParams> devs(2, unit_device());
  EXPECT_EQ(solve_noopt(table1_system(2, 1e6, 1e-4, 0.1), devs).status, SolveStatus::infeasible);
}

TEST(Ordering, RestrictionsNeverBeatTheirRelaxations) {
  for (std::size_t n : {2u, 5u, 10u}) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      const auto devs = sample_population(77 * n + seed, PopulationBounds::table1(), n);
      const SystemConfig sys = common_load(devs, 0.5);
      double e[5];
      for (SchemeId id : kAllSchemes) {
        const Solution s = solve_scheme(id, sys, devs);
        ASSERT_EQ(s.status, SolveStatus::optimal) << to_string(id) << ' ' << seed;
        e[static_cast<int>(id)] = s.primal_value;
        EXPECT_TRUE(check_allocation(sys, devs, s.allocation, 1e-7).feasible) << to_string(id);
        EXPECT_LE(s.rel_gap, 1e-6) << to_string(id);
      }
      const double slack = 1 + 1e-8;
      const double opt = e[0], blind = e[1], nodfs = e[2], bnd = e[3], noopt = e[4];
      EXPECT_LE(opt, blind * slack);
      EXPECT_LE(blind, bnd * slack);
      EXPECT_LE(bnd, noopt * slack);
      EXPECT_LE(opt, nodfs * slack);
      EXPECT_LE(nodfs, bnd * slack);
    }
  }
}

TEST(Ordering, BlindNoDfsCloseToNoOpt) {
  int close = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto devs = sample_population(seed, PopulationBounds::table1(), 10);
    const SystemConfig sys = table1_system(10, 1e6);
    if (!is_feasible(sys, devs, CapacityRule::blind)) continue;
    const Solution a = solve_blind_nodfs(sys, devs), b = solve_noopt(sys, devs);
    if (a.status != SolveStatus::optimal || b.status != SolveStatus::optimal) continue;
    ++total;
    close += std::abs(a.primal_value - b.primal_value) <= 0.01 * b.primal_value;
  }
  ASSERT_GT(total, 0);
  EXPECT_GE(close, 0.95 * total);
}
