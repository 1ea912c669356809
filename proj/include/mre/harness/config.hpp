#pragma once

// Experiment configuration: a flat `key = value` file, `#` starts a
// comment, lists are comma separated. Units are part of the key names.

#include "mre/model.hpp"
#include "mre/schemes.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mre::harness {

/// Malformed configuration; the message is anchored as "source:line: ...".
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t trials = 100;
  std::vector<std::size_t> n_list{10, 20, 30, 40, 50};
  std::vector<double> tau_list{0.025, 0.05, 0.075, 0.1, 0.125, 0.15, 0.175, 0.2};  ///< s
  double task_bits = 1e6;
  double reduce_bits = 100.0;  ///< beta L
  std::vector<SchemeId> schemes{kAllSchemes.begin(), kAllSchemes.end()};
  double bandwidth = 15e3;
  double noise_psd = 1e-9;
  double snr_gap = 1.0;
  RateUnit rate_unit = RateUnit::nats;
  PopulationBounds bounds = PopulationBounds::table1();
  double gap_tol = 1e-6;
  double feas_tol = 1e-7;
  double participation_tol = 1e-9;
  double min_acceptance = 0.01;  ///< energy sweeps abort below this acceptance rate
  std::vector<double> ratio_list{0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t n = 10;  ///< single solves and the tau sweep
  double tau = 0.1;    ///< single solves, the N sweep and participation
  std::string out;
  std::string devices_csv;
  std::size_t threads = 1;

  double beta() const { return task_bits > 0.0 ? reduce_bits / task_bits : 0.0; }

  SystemConfig system(std::size_t n_devices, double deadline, double bits) const {
    return make_system(n_devices, bits, beta(), deadline, bandwidth, noise_psd, snr_gap, rate_unit);
  }

  SolverOptions solver_options() const {
    SolverOptions o;
    o.gap_tol = gap_tol;
    o.feas_tol = feas_tol;
    return o;
  }

  void validate() const {
    if (trials < 1) throw config_error("config: trials must be >= 1");
    if (n_list.empty() || tau_list.empty() || schemes.empty() || ratio_list.empty())
      throw config_error("config: lists must be non-empty");
    for (std::size_t v : n_list)
      if (v < 1) throw config_error("config: device counts must be >= 1");
    for (double t : tau_list)
      if (!(t > 0.0)) throw config_error("config: deadlines must be > 0");
    for (double r : ratio_list)
      if (!(r > 0.0 && r <= 1.0)) throw config_error("config: load ratios must lie in (0, 1]");
    if (!(task_bits >= 0.0) || !(reduce_bits >= 0.0)) throw config_error("config: sizes must be >= 0");
    if (task_bits == 0.0 && reduce_bits > 0.0) throw config_error("config: beta_L_bits needs L_bits > 0");
    if (!(tau > 0.0) || n < 1) throw config_error("config: n and tau_ms must be positive");
    if (threads < 1) throw config_error("config: threads must be >= 1");
    try {
      bounds.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(std::string("config: ") + e.what());
    }
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty list item");
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

inline double number(const std::string& v) { return mre::detail::parse_double(v); }

inline std::uint64_t unsigned_integer(const std::string& v) {
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw std::invalid_argument("not a non-negative integer: '" + v + "'");
  std::size_t pos = 0;
  const unsigned long long x = std::stoull(v, &pos);
  return static_cast<std::uint64_t>(x);
}

inline std::vector<double> numbers(const std::string& v, double scale = 1.0) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(number(s) * scale);
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = unsigned_integer(v); }},
      {"trials", [](ExperimentConfig& c, const std::string& v) { c.trials = unsigned_integer(v); }},
      {"threads", [](ExperimentConfig& c, const std::string& v) { c.threads = unsigned_integer(v); }},
      {"n", [](ExperimentConfig& c, const std::string& v) { c.n = unsigned_integer(v); }},
      {"n_list",
       [](ExperimentConfig& c, const std::string& v) {
         c.n_list.clear();
         for (const auto& s : split_list(v)) c.n_list.push_back(unsigned_integer(s));
       }},
      {"tau_ms", [](ExperimentConfig& c, const std::string& v) { c.tau = number(v) * 1e-3; }},
      {"tau_ms_list", [](ExperimentConfig& c, const std::string& v) { c.tau_list = numbers(v, 1e-3); }},
      {"L_bits", [](ExperimentConfig& c, const std::string& v) { c.task_bits = number(v); }},
      {"beta_L_bits", [](ExperimentConfig& c, const std::string& v) { c.reduce_bits = number(v); }},
      {"schemes",
       [](ExperimentConfig& c, const std::string& v) {
         c.schemes.clear();
         for (const auto& s : split_list(v)) c.schemes.push_back(parse_scheme(s));
       }},
      {"bandwidth_Hz", [](ExperimentConfig& c, const std::string& v) { c.bandwidth = number(v); }},
      {"noise_psd_W_per_Hz", [](ExperimentConfig& c, const std::string& v) { c.noise_psd = number(v); }},
      {"snr_gap", [](ExperimentConfig& c, const std::string& v) { c.snr_gap = number(v); }},
      {"rate_unit",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "nats") c.rate_unit = RateUnit::nats;
         else if (v == "bits") c.rate_unit = RateUnit::bits;
         else throw std::invalid_argument("rate_unit must be 'nats' or 'bits'");
       }},
      {"kappa_min", [](ExperimentConfig& c, const std::string& v) { c.bounds.kappa.lo = number(v); }},
      {"kappa_max", [](ExperimentConfig& c, const std::string& v) { c.bounds.kappa.hi = number(v); }},
      {"c_min_cycles_per_bit", [](ExperimentConfig& c, const std::string& v) { c.bounds.c.lo = number(v); }},
      {"c_max_cycles_per_bit", [](ExperimentConfig& c, const std::string& v) { c.bounds.c.hi = number(v); }},
      {"f_max_GHz_min", [](ExperimentConfig& c, const std::string& v) { c.bounds.f_max.lo = number(v) * 1e9; }},
      {"f_max_GHz_max", [](ExperimentConfig& c, const std::string& v) { c.bounds.f_max.hi = number(v) * 1e9; }},
      {"p_max_mW_min", [](ExperimentConfig& c, const std::string& v) { c.bounds.p_max.lo = number(v) * 1e-3; }},
      {"p_max_mW_max", [](ExperimentConfig& c, const std::string& v) { c.bounds.p_max.hi = number(v) * 1e-3; }},
      {"p_circuit_mW_min", [](ExperimentConfig& c, const std::string& v) { c.bounds.p_circuit.lo = number(v) * 1e-3; }},
      {"p_circuit_mW_max", [](ExperimentConfig& c, const std::string& v) { c.bounds.p_circuit.hi = number(v) * 1e-3; }},
      {"h_variance", [](ExperimentConfig& c, const std::string& v) { c.bounds.channel_variance = number(v); }},
      {"channel_draw",
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "power_gain") c.bounds.channel = ChannelDraw::power_gain;
         else if (v == "amplitude") c.bounds.channel = ChannelDraw::amplitude;
         else throw std::invalid_argument("channel_draw must be 'power_gain' or 'amplitude'");
       }},
      {"gap_tol", [](ExperimentConfig& c, const std::string& v) { c.gap_tol = number(v); }},
      {"feas_tol", [](ExperimentConfig& c, const std::string& v) { c.feas_tol = number(v); }},
      {"participation_tol", [](ExperimentConfig& c, const std::string& v) { c.participation_tol = number(v); }},
      {"min_acceptance", [](ExperimentConfig& c, const std::string& v) { c.min_acceptance = number(v); }},
      {"ratio_list", [](ExperimentConfig& c, const std::string& v) { c.ratio_list = numbers(v); }},
      {"out", [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
      {"devices_csv", [](ExperimentConfig& c, const std::string& v) { c.devices_csv = v; }},
  };
  return table;
}

}  // namespace detail

/// Applies one `key = value` assignment; errors are not line-anchored.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& table = detail::setters();
  const auto it = table.find(key);
  if (it == table.end()) throw std::invalid_argument("unknown key '" + key + "'");
  it->second(cfg, value);
}

inline ExperimentConfig parse_config(std::istream& is, const std::string& source = "config") {
  ExperimentConfig cfg;
  std::map<std::string, int> seen;
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(lineno) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where + "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw config_error(where + "missing key");
    if (value.empty()) throw config_error(where + "missing value for '" + key + "'");
    if (auto prev = seen.find(key); prev != seen.end())
      throw config_error(where + "duplicate key '" + key + "' (first on line " + std::to_string(prev->second) + ")");
    seen[key] = lineno;
    try {
      apply_setting(cfg, key, value);
    } catch (const std::invalid_argument& e) {
      throw config_error(where + e.what());
    } catch (const std::out_of_range&) {
      throw config_error(where + "value out of range for '" + key + "'");
    }
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error(path + ": cannot open");
  return parse_config(in, path);
}

/// Devices of a single-instance run: the CSV file if given, else a sampled population.
inline std::vector<DeviceParams> instance_devices(const ExperimentConfig& cfg) {
  if (cfg.devices_csv.empty()) return sample_population(cfg.seed, cfg.bounds, cfg.n);
  std::ifstream in(cfg.devices_csv);
  if (!in) throw config_error(cfg.devices_csv + ": cannot open");
  try {
    return read_population_csv(in);
  } catch (const std::invalid_argument& e) {
    throw config_error(cfg.devices_csv + ": " + e.what());
  }
}

}  // namespace mre::harness
