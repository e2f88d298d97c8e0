#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace leosat {

/// Thrown on malformed scenario files or violated configuration invariants.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Scenario constants for the downlink simulator. All values are linear scale
/// and SI units; dB-valued inputs are converted once at load time.
struct SystemConfig {
  int n_tx_x = 12;   ///< antennas along the x axis
  int n_tx_y = 12;   ///< antennas along the y axis
  int k_users = 9;   ///< number of single-antenna user terminals
  int m_rf = 9;      ///< RF chains feeding the analog network

  double rician_kappa = db_to_linear(18.0);  ///< Rician factor (linear)
  double amplifier_inefficiency = 2.0;       ///< xi = 1 / PA efficiency
  double bandwidth_hz = 2.0e7;
  double carrier_hz = 2.0e9;
  double gain_sat = db_to_linear(3.0);  ///< satellite antenna gain (linear)
  double gain_ut = 1.0;                 ///< terminal antenna gain (linear)
  double noise_temp_k = 300.0;
  double boltzmann = 1.380e-23;  ///< J/K
  double power_budget_w = 10.0;  ///< total transmit power budget P

  /// Satellite-to-terminal distance per user, meters. A single entry is
  /// broadcast to all users when the scenario is finalized.
  std::vector<double> distances_m{1.0e6};

  int n_tx() const { return n_tx_x * n_tx_y; }

  /// Broadcasts a scalar distance list to k_users entries.
  void finalize();
};

/// Static power draw of the transmitter components, in mW as configured.
struct PowerModel {
  double p_ps_2_mw = 12.0;
  double p_ps_3_mw = 16.0;
  double p_ps_4_mw = 20.0;
  double p_ps_inf_mw = 25.0;
  double p_dac_mw = 300.0;
  double p_mixer_mw = 19.0;
  double p_lpf_mw = 14.0;
  double p_bba_mw = 5.0;
  double p_lo_mw = 5.0;
  double p_bb_mw = 200.0;

  /// Phase shifter draw for a given resolution; bits == 0 means continuous.
  /// Throws ConfigError for resolutions without a table entry.
  double ps_mw(int bits) const;

  /// Per-RF-chain draw: DAC + mixer + low-pass filter + baseband amplifier.
  double rfc_mw() const { return p_dac_mw + p_mixer_mw + p_lpf_mw + p_bba_mw; }
};

struct Scenario {
  SystemConfig cfg;
  PowerModel pm;
};

/// Parses a flat key-value scenario ("key = value", '#' comments). Unset keys
/// keep their defaults. Keys suffixed _db / _dbw are converted to linear.
Scenario parse_scenario(const std::string& text);

/// Loads and parses a scenario file. Throws ConfigError on I/O failure.
Scenario load_scenario(const std::string& path);

/// Returns human-readable violations of the SystemConfig invariants; empty
/// means the configuration is valid.
std::vector<std::string> validate_config(const SystemConfig& cfg);

/// Violations of the PowerModel invariants (nonnegativity, monotone p_ps).
std::vector<std::string> validate_power_model(const PowerModel& pm);

/// Validates and finalizes in place; throws ConfigError listing all problems.
void require_valid(Scenario& sc);

}  // namespace leosat
