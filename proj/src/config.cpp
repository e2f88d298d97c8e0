#include "leosat/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace leosat {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid numeric value for '" + key + "': " + value);
  }
}

int parse_int(const std::string& key, const std::string& value) {
  double v = parse_number(key, value);
  int i = static_cast<int>(std::lround(v));
  if (std::abs(v - i) > 1e-9) throw ConfigError("expected integer for '" + key + "': " + value);
  return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_number(key, item));
  }
  if (out.empty()) throw ConfigError("empty list for '" + key + "'");
  return out;
}

}  // namespace

void SystemConfig::finalize() {
  if (distances_m.size() == 1 && k_users > 1) {
    distances_m.assign(static_cast<std::size_t>(k_users), distances_m.front());
  }
}

double PowerModel::ps_mw(int bits) const {
  switch (bits) {
    case 0: return p_ps_inf_mw;
    case 2: return p_ps_2_mw;
    case 3: return p_ps_3_mw;
    case 4: return p_ps_4_mw;
    default:
      throw ConfigError("no phase shifter power entry for resolution " + std::to_string(bits) +
                        " bits (known: 2, 3, 4, continuous)");
  }
}

Scenario parse_scenario(const std::string& text) {
  Scenario sc;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");
    }

    SystemConfig& c = sc.cfg;
    PowerModel& p = sc.pm;
    if (key == "n_tx_x") c.n_tx_x = parse_int(key, value);
    else if (key == "n_tx_y") c.n_tx_y = parse_int(key, value);
    else if (key == "k_users") c.k_users = parse_int(key, value);
    else if (key == "m_rf") c.m_rf = parse_int(key, value);
    else if (key == "rician_kappa") c.rician_kappa = parse_number(key, value);
    else if (key == "rician_kappa_db") c.rician_kappa = db_to_linear(parse_number(key, value));
    else if (key == "amplifier_inefficiency") c.amplifier_inefficiency = parse_number(key, value);
    else if (key == "bandwidth_hz") c.bandwidth_hz = parse_number(key, value);
    else if (key == "carrier_hz") c.carrier_hz = parse_number(key, value);
    else if (key == "gain_sat") c.gain_sat = parse_number(key, value);
    else if (key == "gain_sat_db") c.gain_sat = db_to_linear(parse_number(key, value));
    else if (key == "gain_ut") c.gain_ut = parse_number(key, value);
    else if (key == "gain_ut_db") c.gain_ut = db_to_linear(parse_number(key, value));
    else if (key == "noise_temp_k") c.noise_temp_k = parse_number(key, value);
    else if (key == "boltzmann") c.boltzmann = parse_number(key, value);
    else if (key == "power_budget_w") c.power_budget_w = parse_number(key, value);
    else if (key == "power_budget_dbw") c.power_budget_w = db_to_linear(parse_number(key, value));
    else if (key == "distances_m") c.distances_m = parse_list(key, value);
    else if (key == "p_ps_2_mw") p.p_ps_2_mw = parse_number(key, value);
    else if (key == "p_ps_3_mw") p.p_ps_3_mw = parse_number(key, value);
    else if (key == "p_ps_4_mw") p.p_ps_4_mw = parse_number(key, value);
    else if (key == "p_ps_inf_mw") p.p_ps_inf_mw = parse_number(key, value);
    else if (key == "p_dac_mw") p.p_dac_mw = parse_number(key, value);
    else if (key == "p_mixer_mw") p.p_mixer_mw = parse_number(key, value);
    else if (key == "p_lpf_mw") p.p_lpf_mw = parse_number(key, value);
    else if (key == "p_bba_mw") p.p_bba_mw = parse_number(key, value);
    else if (key == "p_lo_mw") p.p_lo_mw = parse_number(key, value);
    else if (key == "p_bb_mw") p.p_bb_mw = parse_number(key, value);
    else throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::vector<std::string> validate_config(const SystemConfig& cfg) {
  std::vector<std::string> errs;
  auto positive = [&](double v, const char* name) {
    if (!(v > 0.0)) errs.push_back(std::string(name) + " must be strictly positive");
  };
  if (cfg.n_tx_x < 1) errs.push_back("n_tx_x must be >= 1");
  if (cfg.n_tx_y < 1) errs.push_back("n_tx_y must be >= 1");
  if (cfg.k_users < 1) errs.push_back("k_users must be >= 1");
  if (cfg.m_rf < cfg.k_users || cfg.m_rf > cfg.n_tx()) {
    errs.push_back("m_rf must satisfy k_users <= m_rf <= n_tx_x*n_tx_y");
  }
  if (cfg.rician_kappa < 0.0) errs.push_back("rician_kappa must be >= 0");
  if (cfg.amplifier_inefficiency < 1.0) errs.push_back("amplifier_inefficiency must be >= 1");
  positive(cfg.bandwidth_hz, "bandwidth_hz");
  positive(cfg.carrier_hz, "carrier_hz");
  positive(cfg.gain_sat, "gain_sat");
  if (cfg.gain_ut < 0.0) errs.push_back("gain_ut must be >= 0");
  positive(cfg.noise_temp_k, "noise_temp_k");
  positive(cfg.boltzmann, "boltzmann");
  positive(cfg.power_budget_w, "power_budget_w");
  if (cfg.distances_m.empty()) errs.push_back("distances_m must not be empty");
  if (cfg.distances_m.size() != 1 && cfg.distances_m.size() != static_cast<std::size_t>(cfg.k_users)) {
    errs.push_back("distances_m must have 1 or k_users entries");
  }
  for (double d : cfg.distances_m) {
    if (!(d > 0.0)) {
      errs.push_back("distances_m entries must be strictly positive");
      break;
    }
  }
  return errs;
}

std::vector<std::string> validate_power_model(const PowerModel& pm) {
  std::vector<std::string> errs;
  const double vals[] = {pm.p_ps_2_mw, pm.p_ps_3_mw, pm.p_ps_4_mw, pm.p_ps_inf_mw, pm.p_dac_mw,
                         pm.p_mixer_mw, pm.p_lpf_mw, pm.p_bba_mw, pm.p_lo_mw, pm.p_bb_mw};
  for (double v : vals) {
    if (v < 0.0) {
      errs.push_back("power model entries must be nonnegative");
      break;
    }
  }
  if (!(pm.p_ps_2_mw <= pm.p_ps_3_mw && pm.p_ps_3_mw <= pm.p_ps_4_mw &&
        pm.p_ps_4_mw <= pm.p_ps_inf_mw)) {
    errs.push_back("p_ps must be nondecreasing in resolution (2 <= 3 <= 4 <= inf)");
  }
  return errs;
}

void require_valid(Scenario& sc) {
  auto errs = validate_config(sc.cfg);
  auto perrs = validate_power_model(sc.pm);
  errs.insert(errs.end(), perrs.begin(), perrs.end());
  if (!errs.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  sc.cfg.finalize();
}

}  // namespace leosat
