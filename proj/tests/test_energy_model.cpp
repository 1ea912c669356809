#include "mre/energy_model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace mre;

namespace {

DeviceParams device(double kappa = 1e-27, double c = 1000, double f = 1e9, double h = 1e-3, double pmax = 0.02,
                    double pc = 0.01) {
  return {kappa, c, f, h, pmax, pc};
}

SystemConfig table1_system(std::size_t n = 2, double L = 1e6, double beta = 1e-4, double tau = 0.1) {
  return make_system(n, L, beta, tau, 15e3, 1e-9);
}

}  // namespace

TEST(MapEnergy, ZeroLoadIsFree) {
  EXPECT_EQ(map_energy(device(), 0.0, 0.01), 0.0);
  EXPECT_EQ(map_energy(device(), 0.0, 0.0), 0.0);
}

TEST(MapEnergy, HandEvaluated) {
  const double kappa = 1e-27, c = 1000, l = 1e4, t = 0.01;
  const double expected = kappa * std::pow(c * l, 3) / (t * t);
  EXPECT_NEAR(map_energy(device(kappa, c), l, t), expected, 1e-12 * expected);
  EXPECT_NEAR(expected, 1e-2, 1e-14);
}

TEST(MapEnergy, DoublingTimeQuartersEnergy) {
  const DeviceParams d = device();
  EXPECT_NEAR(map_energy(d, 3e4, 0.02), map_energy(d, 3e4, 0.01) / 4.0, 1e-15);
}

TEST(MapEnergy, PositiveLoadInZeroTimeThrows) {
  EXPECT_THROW(map_energy(device(), 1.0, 0.0), std::domain_error);
}

TEST(ReduceEnergy, Examples) {
  EXPECT_EQ(reduce_energy(device(), 0.0, 0.0), 0.0);
  const double expected = 1e-27 * std::pow(1000.0 * 100.0, 3) / (1e-3 * 1e-3);
  EXPECT_NEAR(reduce_energy(device(), 100.0, 1e-3), expected, 1e-12 * expected);
  EXPECT_NEAR(expected, 1e-6, 1e-18);
  EXPECT_EQ(reduce_energy(device(), 123.0, 4e-4), map_energy(device(), 123.0, 4e-4));
  EXPECT_THROW(reduce_energy(device(), 1.0, 0.0), std::domain_error);
}

TEST(ShuffleEnergy, Examples) {
  EXPECT_EQ(shuffle_energy(device(), 0.0, 0.0), 0.0);
  EXPECT_NEAR(shuffle_energy(device(), 0.05, 0.02 * 0.05), 0.02 * 0.05 + 0.05 * 0.01, 1e-18);
  EXPECT_NEAR(shuffle_energy(device(), 0.05, 1e-3), 1.5e-3, 1e-18);
  EXPECT_EQ(shuffle_energy(device(1e-27, 1000, 1e9, 1e-3, 0.02, 0.0), 0.3, 7e-3), 7e-3);
}

TEST(UplinkRate, Examples) {
  const SystemConfig sys = table1_system();
  const DeviceParams d = device(1e-27, 1000, 1e9, 1e-3);
  EXPECT_EQ(uplink_rate(d, sys, 0.0), 0.0);
  const double snr = 0.015 * 1e-3 / (1e-9 * 15e3);
  EXPECT_NEAR(snr, 1.0, 1e-12);
  EXPECT_NEAR(uplink_rate(d, sys, 0.015), 15000.0 * std::log(1.0 + snr), 1e-9);
  EXPECT_NEAR(uplink_rate(d, sys, 0.015), 10397.2, 0.05);

  SystemConfig gap2 = sys;
  gap2.snr_gap = 2.0;
  EXPECT_NEAR(uplink_rate(d, gap2, 0.015), 15000.0 * std::log(1.5), 1e-9);
  EXPECT_THROW(uplink_rate(d, sys, -1.0), std::domain_error);
}

TEST(UplinkRate, BitsUnitScalesByLog2) {
  SystemConfig bits = table1_system();
  bits.rate_unit = RateUnit::bits;
  EXPECT_NEAR(uplink_rate(device(), bits, 0.015), 15000.0 * std::log2(2.0), 1e-9);
}

TEST(UplinkRate, MonotoneConcaveAndLogBound) {
  const SystemConfig sys = table1_system();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> P(0.0, 0.05), H(1e-5, 1e-2);
  for (int i = 0; i < 1000; ++i) {
    const double p1 = P(rng), p2 = P(rng), h1 = H(rng), h2 = H(rng);
    const DeviceParams d = device(1e-27, 1000, 1e9, h1);
    const DeviceParams e = device(1e-27, 1000, 1e9, h2);
    if (p1 < p2) EXPECT_LE(uplink_rate(d, sys, p1), uplink_rate(d, sys, p2));
    if (h1 < h2) EXPECT_LE(uplink_rate(d, sys, p1), uplink_rate(e, sys, p1));
    const double mid = uplink_rate(d, sys, 0.5 * (p1 + p2));
    EXPECT_GE(mid, 0.5 * (uplink_rate(d, sys, p1) + uplink_rate(d, sys, p2)) - 1e-9);
    EXPECT_LE(uplink_rate(d, sys, p1), sys.bandwidth * p1 * h1 / (sys.noise_psd * sys.bandwidth) * (1 + 1e-12));
  }
}

TEST(UplinkRate, PowerForRateInverts) {
  const SystemConfig sys = table1_system();
  const DeviceParams d = device();
  for (double p : {0.0, 1e-6, 0.003, 0.02, 0.5}) EXPECT_NEAR(power_for_rate(d, sys, uplink_rate(d, sys, p)), p, 1e-12 + 1e-12 * p);
}

TEST(Convexity, MapEnergyMidpoint) {
  const DeviceParams d = device();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> L(0.0, 1e5), T(1e-3, 0.1);
  for (int i = 0; i < 2000; ++i) {
    const double l1 = L(rng), l2 = L(rng), t1 = T(rng), t2 = T(rng);
    const double a = map_energy(d, l1, t1), b = map_energy(d, l2, t2);
    const double m = map_energy(d, 0.5 * (l1 + l2), 0.5 * (t1 + t2));
    EXPECT_LE(m, 0.5 * (a + b) + 1e-12 * std::max(a, b));
  }
}

TEST(Convexity, ShufflePerspectiveConcave) {
  const SystemConfig sys = table1_system();
  const DeviceParams d = device();
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> T(1e-4, 0.1), P(0.0, 0.05);
  for (int i = 0; i < 2000; ++i) {
    const double t1 = T(rng), t2 = T(rng), e1 = t1 * P(rng), e2 = t2 * P(rng);
    const double a = shuffle_capacity(d, sys, t1, e1), b = shuffle_capacity(d, sys, t2, e2);
    const double m = shuffle_capacity(d, sys, 0.5 * (t1 + t2), 0.5 * (e1 + e2));
    EXPECT_GE(m, 0.5 * (a + b) - 1e-9 * std::max(a, b));
  }
  EXPECT_EQ(shuffle_capacity(d, sys, 0.0, 0.0), 0.0);
}

TEST(CheckAllocation, AllZeroIsIncomplete) {
  const SystemConfig sys = table1_system();
  const std::vector<DeviceParams> devs{device(), device()};
  Allocation a = Allocation::zeros(2);
  a.t_red[0] = 1e-3;
  const ConstraintReport r = check_allocation(sys, devs, a, 1e-7);
  EXPECT_FALSE(r.feasible);
  EXPECT_EQ(r.task_completeness, -sys.task_bits);
}

TEST(CheckAllocation, DeadlineExactlyMetHasZeroResidual) {
  const SystemConfig sys = make_system(1, 1e4, 0.0, 0.1, 15e3, 1e-9);
  const std::vector<DeviceParams> devs{device()};
  Allocation a = Allocation::zeros(1);
  a.loads[0] = 1e4;
  a.t_map[0] = 0.06;
  a.t_shu[0] = 0.04;
  a.t_red[0] = 0.0;
  const ConstraintReport r = check_allocation(sys, devs, a, 1e-7);
  EXPECT_EQ(r.deadline[0], 0.0);
  EXPECT_TRUE(r.feasible);
}

TEST(CheckAllocation, DetectsEachViolation) {
  const SystemConfig sys = table1_system(2, 1e4, 1e-4, 0.1);
  const std::vector<DeviceParams> devs{device(), device()};
  Allocation good = Allocation::zeros(2);
  good.loads = {5e3, 5e3};
  good.t_map = {0.05, 0.05};
  good.t_red = {1e-3};
  const double need = sys.alpha * 5e3;
  good.t_shu = {0.04, 0.04};
  const double p = power_for_rate(devs[0], sys, need / 0.04);
  good.rf_energy = {p * 0.04, p * 0.04};
  ASSERT_TRUE(check_allocation(sys, devs, good, 1e-7).feasible);

  Allocation slow = good;
  slow.t_map[0] = 1e-6;
  EXPECT_GT(check_allocation(sys, devs, slow, 1e-7).map_speed[0], 0.0);
  EXPECT_FALSE(check_allocation(sys, devs, slow, 1e-7).feasible);

  Allocation late = good;
  late.t_map[1] = 0.07;
  EXPECT_FALSE(check_allocation(sys, devs, late, 1e-7).feasible);

  Allocation quiet = good;
  quiet.rf_energy[0] *= 0.5;
  EXPECT_GT(check_allocation(sys, devs, quiet, 1e-7).shuffle_rate[0], 0.0);
  EXPECT_FALSE(check_allocation(sys, devs, quiet, 1e-7).feasible);

  Allocation loud = good;
  loud.rf_energy[0] = 1.0;
  EXPECT_GT(check_allocation(sys, devs, loud, 1e-7).power_cap[0], 0.0);
  EXPECT_FALSE(check_allocation(sys, devs, loud, 1e-7).feasible);

  Allocation hasty = good;
  hasty.t_red[0] = 1e-9;
  EXPECT_FALSE(check_allocation(sys, devs, hasty, 1e-7).feasible);

  Allocation negative = good;
  negative.loads = {1e4 + 1.0, -1.0};
  EXPECT_FALSE(check_allocation(sys, devs, negative, 1e-7).feasible);
  EXPECT_EQ(check_allocation(sys, devs, negative, 1e-7).most_negative_entry, -1.0);
}

TEST(CheckAllocation, DimensionMismatchThrows) {
  const SystemConfig sys = table1_system();
  EXPECT_THROW(check_allocation(sys, {device()}, Allocation::zeros(1), 1e-7), std::invalid_argument);
  EXPECT_THROW(check_allocation(sys, {device(), device()}, Allocation::zeros(3), 1e-7), std::invalid_argument);
}

TEST(CheckAllocation, ReportCsvHasOneRowPerDevice) {
  const SystemConfig sys = table1_system();
  const ConstraintReport r = check_allocation(sys, {device(), device()}, Allocation::zeros(2), 1e-7);
  std::stringstream ss;
  write_constraint_report_csv(ss, r);
  std::string line;
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(TotalEnergy, SingleDeviceWithoutShuffleBits) {
  const SystemConfig sys = make_system(1, 1e4, 0.0, 0.1, 15e3, 1e-9);
  Allocation a = Allocation::zeros(1);
  a.loads[0] = 1e4;
  a.t_map[0] = 0.1;
  a.t_red[0] = 0.1;
  EXPECT_EQ(total_energy(sys, {device()}, a).e_shu[0], 0.0);
  a.t_shu[0] = 0.01;
  EXPECT_NEAR(total_energy(sys, {device()}, a).e_shu[0], 0.01 * 0.01, 1e-18);
}

TEST(TotalEnergy, SymmetricAllocationGivesIdenticalEntries) {
  const SystemConfig sys = table1_system(2, 1e4, 1e-3);
  Allocation a = Allocation::zeros(2);
  a.loads = {5e3, 5e3};
  a.t_map = {0.05, 0.05};
  a.t_shu = {0.02, 0.02};
  a.rf_energy = {1e-4, 1e-4};
  a.t_red = {1e-3};
  const EnergyBreakdown b = total_energy(sys, {device(), device()}, a);
  EXPECT_EQ(b.e_map[0], b.e_map[1]);
  EXPECT_EQ(b.e_shu[0], b.e_shu[1]);
  EXPECT_EQ(b.e_red[0], b.e_red[1]);
  EXPECT_NEAR(b.total, b.map_total() + b.shuffle_total() + b.reduce_total(), 1e-12 * b.total);
}

TEST(TotalEnergy, IdleDevicesStillReduce) {
  const SystemConfig sys = table1_system(2, 1e4, 1e-3);
  Allocation a = Allocation::zeros(2);
  a.loads = {1e4, 0.0};
  a.t_map = {0.05, 0.0};
  a.t_red = {1e-3};
  const EnergyBreakdown b = total_energy(sys, {device(), device()}, a);
  EXPECT_EQ(b.e_map[1], 0.0);
  EXPECT_EQ(b.e_shu[1], 0.0);
  EXPECT_GT(b.e_red[1], 0.0);
}

TEST(TotalEnergy, AdditiveOverDeviceSubsets) {
  const auto devs = sample_population(3, PopulationBounds::table1(), 4);
  const SystemConfig sys = table1_system(4, 4e4, 1e-3);
  Allocation a = Allocation::zeros(4);
  a.loads = {1e4, 1e4, 1e4, 1e4};
  a.t_map = {0.05, 0.06, 0.07, 0.08};
  a.t_shu = {0.01, 0.02, 0.01, 0.02};
  a.rf_energy = {1e-4, 2e-4, 3e-4, 4e-4};
  a.t_red = {2e-3};
  const double whole = total_energy(sys, devs, a).total;
  double parts = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    parts += map_energy(devs[i], a.loads[i], a.t_map[i]) + shuffle_energy(devs[i], a.t_shu[i], a.rf_energy[i]) +
             reduce_energy(devs[i], sys.reduce_bits(), a.t_red[0]);
  }
  EXPECT_NEAR(whole, parts, 1e-12 * whole);
}
