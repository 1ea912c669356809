#pragma once

// Domain types shared by every module: device and system parameters, the
// decision variables of the energy program, dual multipliers, and the random
// device population used by the Monte-Carlo experiments.
//
// Units are SI throughout: bits, seconds, watts, joules, hertz.

#include "mre/detail/numeric.hpp"

#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mre {

/// Compute and radio capabilities of one device.
struct DeviceParams {
  double kappa = 0.0;      ///< effective switched capacitance
  double c = 0.0;          ///< CPU cycles per bit
  double f_max = 0.0;      ///< cycles/s
  double h = 0.0;          ///< uplink channel power gain
  double p_max = 0.0;      ///< W
  double p_circuit = 0.0;  ///< W, constant radio circuit power

  /// Bits per second at full CPU speed.
  double max_rate() const { return f_max / c; }
  /// kappa * c^3, the coefficient of l^3 / t^2 in the computing energy.
  double compute_coeff() const { return kappa * c * c * c; }

  void validate() const {
    for (double v : {kappa, c, f_max, h, p_max, p_circuit}) {
      if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument("DeviceParams: all fields must be positive and finite");
    }
  }

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

/// How the uplink rate is counted. `nats` is the literal model B ln(1+SNR)
/// compared directly against bit counts; `bits` divides by ln 2.
enum class RateUnit { nats, bits };

struct SystemConfig {
  std::size_t n_devices = 0;
  double task_bits = 0.0;   ///< L
  double beta = 0.0;        ///< intermediate-result ratio
  double alpha = 0.0;       ///< (n_devices - 1) * beta, bits shuffled per Map bit
  double deadline = 0.0;    ///< tau, s
  double bandwidth = 0.0;   ///< B, Hz
  double noise_psd = 0.0;   ///< N0, W/Hz
  double snr_gap = 1.0;     ///< Gamma >= 1
  RateUnit rate_unit = RateUnit::nats;

  /// Size of the intermediate results every device combines in Reduce.
  double reduce_bits() const { return beta * task_bits; }
  /// Scale applied to B ln(1+SNR): 1 for nats, 1/ln 2 for bits.
  double rate_scale() const { return rate_unit == RateUnit::nats ? 1.0 : 1.0 / std::numbers::ln2; }

  void validate() const {
    if (n_devices < 1) throw std::invalid_argument("SystemConfig: n_devices must be >= 1");
    if (!(task_bits >= 0.0) || !std::isfinite(task_bits))
      throw std::invalid_argument("SystemConfig: task_bits must be finite and >= 0");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("SystemConfig: beta must be >= 0");
    if (alpha != static_cast<double>(n_devices - 1) * beta)
      throw std::invalid_argument("SystemConfig: alpha must equal (n_devices - 1) * beta");
    if (!(deadline > 0.0) || !std::isfinite(deadline)) throw std::invalid_argument("SystemConfig: deadline must be > 0");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw std::invalid_argument("SystemConfig: bandwidth must be > 0");
    if (!(noise_psd > 0.0) || !std::isfinite(noise_psd)) throw std::invalid_argument("SystemConfig: noise_psd must be > 0");
    if (!(snr_gap >= 1.0) || !std::isfinite(snr_gap)) throw std::invalid_argument("SystemConfig: snr_gap must be >= 1");
  }

  /// Same system with a different task size (beta, hence alpha, unchanged).
  SystemConfig with_task_bits(double bits) const {
    SystemConfig s = *this;
    s.task_bits = bits;
    s.validate();
    return s;
  }

  friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

inline SystemConfig make_system(std::size_t n, double task_bits, double beta, double deadline, double bandwidth,
                                double noise_psd, double snr_gap = 1.0, RateUnit unit = RateUnit::nats) {
  if (n < 1) throw std::invalid_argument("make_system: n must be >= 1");
  SystemConfig s;
  s.n_devices = n;
  s.task_bits = task_bits;
  s.beta = beta;
  s.alpha = static_cast<double>(n - 1) * beta;
  s.deadline = deadline;
  s.bandwidth = bandwidth;
  s.noise_psd = noise_psd;
  s.snr_gap = snr_gap;
  s.rate_unit = unit;
  s.validate();
  return s;
}

/// Decision variables. `t_red` holds one shared Reduce time, or one entry
/// per device for the fixed-frequency schemes.
struct Allocation {
  std::vector<double> loads;
  std::vector<double> t_map;
  std::vector<double> t_shu;
  std::vector<double> t_red;
  std::vector<double> rf_energy;

  static Allocation zeros(std::size_t n, std::size_t n_red = 1) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
            std::vector<double>(n_red, 0.0), std::vector<double>(n, 0.0)};
  }

  std::size_t size() const { return loads.size(); }
  double reduce_time(std::size_t n) const { return t_red.size() == 1 ? t_red[0] : t_red.at(n); }
  double max_reduce_time() const {
    double m = 0.0;
    for (double t : t_red) m = std::max(m, t);
    return m;
  }
  /// RF transmit power E/t, with 0/0 := 0 for idle devices.
  double power(std::size_t n) const { return t_shu[n] > 0.0 ? rf_energy[n] / t_shu[n] : 0.0; }

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Outer Lagrange multipliers. `lambda_per_device` is used instead of
/// `lambda` when every device has its own load constraint (Blind).
struct Multipliers {
  double lambda = 0.0;
  std::vector<double> mu;
  std::vector<double> beta_t;
  std::vector<double> lambda_per_device;

  static Multipliers zeros(std::size_t n) { return {0.0, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), {}}; }

  bool per_device_loads() const { return !lambda_per_device.empty(); }
  double load_price(std::size_t n) const { return per_device_loads() ? lambda_per_device.at(n) : lambda; }

  void validate() const {
    for (double v : mu)
      if (!(v >= 0.0)) throw std::invalid_argument("Multipliers: mu must be >= 0");
    for (double v : beta_t)
      if (!(v >= 0.0)) throw std::invalid_argument("Multipliers: beta must be >= 0");
    if (mu.size() != beta_t.size()) throw std::invalid_argument("Multipliers: size mismatch");
  }

  friend bool operator==(const Multipliers&, const Multipliers&) = default;
};

struct EnergyBreakdown {
  std::vector<double> e_map;
  std::vector<double> e_shu;
  std::vector<double> e_red;
  double total = 0.0;

  double map_total() const { return sum(e_map); }
  double shuffle_total() const { return sum(e_shu); }
  double reduce_total() const { return sum(e_red); }

 private:
  static double sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Random populations

struct UniformRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// |CN|^2 (power gain, default) or |CN| for the channel draw.
enum class ChannelDraw { power_gain, amplitude };

struct PopulationBounds {
  UniformRange kappa{1e-28, 1e-27};
  UniformRange c{500.0, 1500.0};
  UniformRange f_max{1e9, 3e9};
  UniformRange p_max{10e-3, 25e-3};
  UniformRange p_circuit{10e-3, 25e-3};
  double channel_variance = 1e-3;
  ChannelDraw channel = ChannelDraw::power_gain;

  static PopulationBounds table1() { return {}; }

  void validate() const {
    for (const UniformRange& r : {kappa, c, f_max, p_max, p_circuit}) {
      if (!(r.lo > 0.0) || !(r.lo <= r.hi) || !std::isfinite(r.hi))
        throw std::invalid_argument("PopulationBounds: need 0 < lo <= hi");
    }
    if (!(channel_variance > 0.0)) throw std::invalid_argument("PopulationBounds: channel variance must be > 0");
  }
};

namespace detail {

// Uniform [0,1) from the top 53 bits; platform independent, unlike
// std::uniform_real_distribution.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double draw_uniform(std::mt19937_64& rng, const UniformRange& r) {
  return r.lo + (r.hi - r.lo) * unit_uniform(rng);
}

}  // namespace detail

/// One device drawn from its own stream keyed by (seed, index).
inline DeviceParams sample_device(std::uint64_t seed, std::uint64_t index, const PopulationBounds& b) {
  std::mt19937_64 rng(detail::stream_seed(seed, index));
  DeviceParams d;
  d.kappa = detail::draw_uniform(rng, b.kappa);
  d.c = detail::draw_uniform(rng, b.c);
  d.f_max = detail::draw_uniform(rng, b.f_max);
  // Box-Muller draw of a circularly-symmetric complex Gaussian with the
  // given variance (each quadrature carries half of it).
  const double u1 = 1.0 - detail::unit_uniform(rng);
  const double u2 = detail::unit_uniform(rng);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double sigma = std::sqrt(0.5 * b.channel_variance);
  const double re = sigma * radius * std::cos(2.0 * std::numbers::pi * u2);
  const double im = sigma * radius * std::sin(2.0 * std::numbers::pi * u2);
  const double mag2 = re * re + im * im;
  d.h = b.channel == ChannelDraw::power_gain ? mag2 : std::sqrt(mag2);
  // A zero draw is possible only with probability 2^-53; keep the invariant.
  if (!(d.h > 0.0)) d.h = std::numeric_limits<double>::min();
  d.p_max = detail::draw_uniform(rng, b.p_max);
  d.p_circuit = detail::draw_uniform(rng, b.p_circuit);
  return d;
}

inline std::vector<DeviceParams> sample_population(std::uint64_t seed, const PopulationBounds& bounds, std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample_population: n must be >= 1");
  bounds.validate();
  std::vector<DeviceParams> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_device(seed, i, bounds));
  return out;
}

// ---------------------------------------------------------------------------
// CSV serialisation (shortest round-trip formatting, so lossless)

inline constexpr const char* kPopulationHeader = "idx,kappa,c,f_max,h,p_max,p_circuit";

inline void write_population_csv(std::ostream& os, const std::vector<DeviceParams>& devices) {
  using detail::format_double;
  os << kPopulationHeader << '\n';
  for (std::size_t i = 0; i < devices.size(); ++i) {
    const auto& d = devices[i];
    os << i << ',' << format_double(d.kappa) << ',' << format_double(d.c) << ',' << format_double(d.f_max) << ','
       << format_double(d.h) << ',' << format_double(d.p_max) << ',' << format_double(d.p_circuit) << '\n';
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::vector<DeviceParams> read_population_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("population csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kPopulationHeader) throw std::invalid_argument("population csv: bad header '" + line + "'");
  std::vector<DeviceParams> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 7) throw std::invalid_argument("population csv line " + std::to_string(lineno) + ": expected 7 columns");
    try {
      DeviceParams d{detail::parse_double(cells[1]), detail::parse_double(cells[2]), detail::parse_double(cells[3]),
                     detail::parse_double(cells[4]), detail::parse_double(cells[5]), detail::parse_double(cells[6])};
      d.validate();
      out.push_back(d);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("population csv line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw std::invalid_argument("population csv: no devices");
  return out;
}

inline constexpr const char* kAllocationHeader = "idx,l,t_map,t_shu,t_red,rf_energy";

inline void write_allocation_csv(std::ostream& os, const Allocation& a) {
  using detail::format_double;
  os << kAllocationHeader << '\n';
  for (std::size_t i = 0; i < a.size(); ++i) {
    os << i << ',' << format_double(a.loads[i]) << ',' << format_double(a.t_map[i]) << ',' << format_double(a.t_shu[i])
       << ',' << (a.t_red.size() == 1 && i > 0 ? std::string() : format_double(a.reduce_time(i))) << ','
       << format_double(a.rf_energy[i]) << '\n';
  }
}

inline Allocation read_allocation_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kAllocationHeader) throw std::invalid_argument("allocation csv: bad header");
  Allocation a;
  bool shared_red = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 6) throw std::invalid_argument("allocation csv: expected 6 columns");
    a.loads.push_back(detail::parse_double(cells[1]));
    a.t_map.push_back(detail::parse_double(cells[2]));
    a.t_shu.push_back(detail::parse_double(cells[3]));
    if (cells[4].empty()) {
      shared_red = true;
    } else {
      a.t_red.push_back(detail::parse_double(cells[4]));
    }
    a.rf_energy.push_back(detail::parse_double(cells[5]));
  }
  if (shared_red && a.t_red.size() != 1) throw std::invalid_argument("allocation csv: inconsistent t_red column");
  return a;
}

inline constexpr const char* kMultipliersHeader = "idx,lambda,mu,beta";
inline constexpr const char* kMultipliersPerDeviceHeader = "idx,lambda_n,mu,beta";

inline void write_multipliers_csv(std::ostream& os, const Multipliers& m) {
  using detail::format_double;
  os << (m.per_device_loads() ? kMultipliersPerDeviceHeader : kMultipliersHeader) << '\n';
  for (std::size_t i = 0; i < m.mu.size(); ++i) {
    os << i << ',' << format_double(m.per_device_loads() ? m.lambda_per_device[i] : m.lambda) << ','
       << format_double(m.mu[i]) << ',' << format_double(m.beta_t[i]) << '\n';
  }
}

inline Multipliers read_multipliers_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || (line != kMultipliersHeader && line != kMultipliersPerDeviceHeader))
    throw std::invalid_argument("multipliers csv: bad header");
  const bool per_device = line == kMultipliersPerDeviceHeader;
  Multipliers m;
  std::vector<double> lambdas;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 4) throw std::invalid_argument("multipliers csv: expected 4 columns");
    lambdas.push_back(detail::parse_double(cells[1]));
    m.mu.push_back(detail::parse_double(cells[2]));
    m.beta_t.push_back(detail::parse_double(cells[3]));
  }
  if (per_device) {
    m.lambda_per_device = lambdas;
  } else if (!lambdas.empty()) {
    m.lambda = lambdas.front();
  }
  return m;
}

}  // namespace mre
