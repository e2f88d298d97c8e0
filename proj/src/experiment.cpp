#include "leosat/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "leosat/metrics.hpp"

namespace leosat {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sanitize_csv(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  }
  return s;
}

std::string resolution_label(Architecture arch, int bits) {
  if (arch == Architecture::FullyDigital) return "na";
  return bits == 0 ? "inf" : std::to_string(bits);
}

bool rf_sweep(ExperimentKind kind) {
  return kind == ExperimentKind::EeVsRfChains || kind == ExperimentKind::MethodCompare;
}

struct GridPoint {
  Architecture arch;
  int resolution_bits;  // 0 = continuous; ignored for fully digital
  double sweep_value;
  bool npp_baseline;
};

struct Unit {
  double sumrate_bits_s = 0.0;
  double mc_bits_s = 0.0;
  double p_total_w = 0.0;
  double p_rad_w = 0.0;
  double ee = 0.0;
  double residual = 0.0;
  double runtime_s = 0.0;
  bool ok = false;
  std::string error;
};

Unit eval_unit(const ExperimentSpec& spec, const SystemConfig& base_cfg, const PowerModel& pm,
               const GridPoint& gp, std::uint64_t seed, int trial) {
  Unit u;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    SystemConfig cfg = base_cfg;
    if (rf_sweep(spec.kind)) {
      cfg.m_rf = static_cast<int>(std::lround(gp.sweep_value));
    } else {
      cfg.power_budget_w = db_to_linear(gp.sweep_value);
    }
    auto errs = validate_config(cfg);
    if (!errs.empty()) throw ConfigError("grid point config: " + errs.front());
    cfg.finalize();
    if (gp.arch == Architecture::PartiallyConnected) {
      partial_block_size(cfg.n_tx(), cfg.m_rf);  // throws when m_rf does not divide n_t
    }

    std::mt19937_64 chan_rng(child_seed(seed, static_cast<std::uint64_t>(trial), kChannelStream));
    const ChannelState ch = sample_channel_state(cfg, chan_rng);
    const int bits = gp.arch == Architecture::FullyDigital ? 0 : gp.resolution_bits;
    const double p_static = transmit_power_static(gp.arch, cfg.m_rf, bits, pm, cfg.n_tx());

    const DigitalSolution sol = dinkelbach_solve(ch, cfg, p_static, spec.solver);
    CMat effective = sol.b;
    if (gp.arch != Architecture::FullyDigital) {
      const PhaseShifterSpec ps{gp.arch, gp.resolution_bits};
      FactorizeResult fr;
      if (gp.npp_baseline) {
        fr = npp_factorize(sol.b, cfg.m_rf, ps, spec.factor_tol, spec.factor_cap);
      } else if (gp.arch == Architecture::FullyConnected) {
        fr = aim_adp(sol.b, cfg.m_rf, ps, spec.sched, spec.factor_tol, spec.factor_cap);
      } else {
        fr = avpim_adp(sol.b, cfg.m_rf, ps, spec.sched);
      }
      effective = fr.hp.effective();
      u.residual = fr.residual;
    }

    const double n0 = noise_power(cfg);
    u.sumrate_bits_s = cfg.bandwidth_hz * rate_upper_bound(effective, ch, n0).sum();
    u.p_rad_w = radiated_power(effective);
    u.p_total_w = total_power(effective, cfg.amplifier_inefficiency, p_static);
    u.ee = u.sumrate_bits_s / u.p_total_w;

    std::mt19937_64 mc_rng(child_seed(seed, static_cast<std::uint64_t>(trial), kMcStream));
    u.mc_bits_s =
        cfg.bandwidth_hz * monte_carlo_sum_rate(effective, ch, cfg, mc_rng, spec.mc_samples).mean_bits;
    u.ok = true;
  } catch (const std::exception& e) {
    u.error = e.what();
  }
  u.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return u;
}

std::string seed_group_label(const std::vector<std::uint64_t>& seeds, int trials) {
  bool consecutive = true;
  for (std::size_t i = 1; i < seeds.size(); ++i) {
    if (seeds[i] != seeds[i - 1] + 1) {
      consecutive = false;
      break;
    }
  }
  std::ostringstream os;
  if (consecutive && seeds.size() > 1) {
    os << "s" << seeds.front() << ".." << seeds.back();
  } else if (seeds.size() == 1) {
    os << "s" << seeds.front();
  } else {
    os << "s" << seeds.front() << "+" << seeds.size();
  }
  os << "x" << trials;
  return os.str();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::EeVsRfChains: return "ee_vs_rf_chains";
    case ExperimentKind::EeVsPowerBudget: return "ee_vs_power_budget";
    case ExperimentKind::BoundTightness: return "bound_tightness";
    case ExperimentKind::MethodCompare: return "method_compare";
  }
  return "unknown";
}

ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "ee_vs_rf_chains") return ExperimentKind::EeVsRfChains;
  if (s == "ee_vs_power_budget") return ExperimentKind::EeVsPowerBudget;
  if (s == "bound_tightness") return ExperimentKind::BoundTightness;
  if (s == "method_compare") return ExperimentKind::MethodCompare;
  throw ConfigError("unknown experiment kind: " + s);
}

void ExperimentSpec::validate() const {
  if (sweep.empty()) throw ConfigError("experiment sweep must not be empty");
  if (seeds.empty()) throw ConfigError("experiment seeds must not be empty");
  if (trials_per_point < 1) throw ConfigError("trials_per_point must be >= 1");
  if (architectures.empty()) throw ConfigError("experiment architectures must not be empty");
  if (resolutions.empty()) throw ConfigError("experiment resolutions must not be empty");
  if (mc_samples < 1) throw ConfigError("mc_samples must be >= 1");
  sched.validate();
}

ExperimentSpec default_experiment(ExperimentKind kind, bool small_preset) {
  ExperimentSpec spec;
  spec.kind = kind;
  switch (kind) {
    case ExperimentKind::EeVsRfChains:
      spec.sweep = small_preset ? std::vector<double>{4, 8, 16}
                                : std::vector<double>{9, 12, 16, 18, 24, 36};
      spec.architectures = {Architecture::FullyConnected, Architecture::PartiallyConnected,
                            Architecture::FullyDigital};
      spec.resolutions = {2, 3, 4, 0};
      break;
    case ExperimentKind::MethodCompare:
      spec.sweep = small_preset ? std::vector<double>{4, 8, 16}
                                : std::vector<double>{9, 12, 16, 18, 24, 36};
      spec.architectures = {Architecture::FullyConnected, Architecture::PartiallyConnected};
      spec.resolutions = {4, 0};
      break;
    case ExperimentKind::EeVsPowerBudget:
    case ExperimentKind::BoundTightness: {
      spec.architectures = {Architecture::FullyDigital};
      spec.resolutions = {0};
      const double step = small_preset ? 5.0 : 2.0;
      for (double p = -10.0; p <= 20.0 + 1e-9; p += step) spec.sweep.push_back(p);
      break;
    }
  }
  return spec;
}

void apply_small_preset(SystemConfig& cfg) {
  cfg.n_tx_x = 4;
  cfg.n_tx_y = 4;
  cfg.k_users = 4;
  cfg.m_rf = 4;
}

ResultTable run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg,
                           const PowerModel& pm) {
  spec.validate();
  {
    auto errs = validate_config(cfg);
    auto perrs = validate_power_model(pm);
    errs.insert(errs.end(), perrs.begin(), perrs.end());
    if (!errs.empty()) throw ConfigError("run_experiment: " + errs.front());
  }

  std::vector<GridPoint> points;
  for (Architecture arch : spec.architectures) {
    const std::vector<int> res_list =
        arch == Architecture::FullyDigital ? std::vector<int>{0} : spec.resolutions;
    for (int bits : res_list) {
      for (double sv : spec.sweep) {
        points.push_back(GridPoint{arch, bits, sv, false});
        if (spec.kind == ExperimentKind::MethodCompare && arch != Architecture::FullyDigital) {
          points.push_back(GridPoint{arch, bits, sv, true});
        }
      }
    }
  }

  struct Task {
    std::size_t point;
    std::uint64_t seed;
    int trial;
  };
  std::vector<Task> tasks;
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::uint64_t seed : spec.seeds) {
      for (int t = 0; t < spec.trials_per_point; ++t) tasks.push_back(Task{p, seed, t});
    }
  }

  std::vector<Unit> units(tasks.size());
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      units[i] = eval_unit(spec, cfg, pm, points[tasks[i].point], tasks[i].seed, tasks[i].trial);
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Group units back into rows in grid order.
  const int units_per_point = static_cast<int>(spec.seeds.size()) * spec.trials_per_point;
  ResultTable table;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const GridPoint& gp = points[p];
    const std::size_t base = p * static_cast<std::size_t>(units_per_point);

    auto make_row = [&](const std::string& seed_group) {
      ResultRow row;
      row.experiment = to_string(spec.kind);
      row.architecture = to_string(gp.arch) + (gp.npp_baseline ? "_npp" : "");
      row.resolution = resolution_label(gp.arch, gp.resolution_bits);
      row.m_rf = rf_sweep(spec.kind) ? static_cast<int>(std::lround(gp.sweep_value)) : cfg.m_rf;
      row.power_budget_dbw = rf_sweep(spec.kind) ? linear_to_db(cfg.power_budget_w)
                                                 : gp.sweep_value;
      row.seed_group = seed_group;
      return row;
    };

    if (spec.kind == ExperimentKind::BoundTightness) {
      // One row per (seed, trial) so the per-instance bound/MC gap is visible.
      for (int uidx = 0; uidx < units_per_point; ++uidx) {
        const Unit& u = units[base + static_cast<std::size_t>(uidx)];
        const std::uint64_t seed = spec.seeds[static_cast<std::size_t>(uidx) /
                                              static_cast<std::size_t>(spec.trials_per_point)];
        const int trial = uidx % spec.trials_per_point;
        std::ostringstream os;
        os << "s" << seed << "t" << trial;
        ResultRow row = make_row(os.str());
        if (u.ok) {
          row.ee_mean_bit_per_j = u.ee;
          row.sumrate_mean_bit_s = u.sumrate_bits_s;
          row.sumrate_mc_mean_bit_s = u.mc_bits_s;
          row.residual_frobenius = u.residual;
          row.p_radiated_w_mean = u.p_rad_w;
        } else {
          row.error = u.error;
        }
        row.runtime_s = u.runtime_s;
        table.push_back(std::move(row));
      }
      continue;
    }

    ResultRow row = make_row(seed_group_label(spec.seeds, spec.trials_per_point));
    double sum_rate = 0.0, sum_mc = 0.0, sum_ptotal = 0.0, sum_prad = 0.0, sum_res = 0.0;
    double runtime = 0.0;
    std::vector<double> ee_values;
    for (int uidx = 0; uidx < units_per_point; ++uidx) {
      const Unit& u = units[base + static_cast<std::size_t>(uidx)];
      runtime += u.runtime_s;
      if (!u.ok) {
        if (row.error.empty()) row.error = u.error;
        continue;
      }
      sum_rate += u.sumrate_bits_s;
      sum_mc += u.mc_bits_s;
      sum_ptotal += u.p_total_w;
      sum_prad += u.p_rad_w;
      sum_res += u.residual;
      ee_values.push_back(u.ee);
    }
    const auto n_ok = static_cast<double>(ee_values.size());
    if (n_ok > 0.0) {
      row.ee_mean_bit_per_j = sum_rate / sum_ptotal;
      row.sumrate_mean_bit_s = sum_rate / n_ok;
      row.sumrate_mc_mean_bit_s = sum_mc / n_ok;
      row.residual_frobenius = sum_res / n_ok;
      row.p_radiated_w_mean = sum_prad / n_ok;
      if (ee_values.size() > 1) {
        double mean = 0.0;
        for (double e : ee_values) mean += e;
        mean /= n_ok;
        double var = 0.0;
        for (double e : ee_values) var += (e - mean) * (e - mean);
        row.ee_std = std::sqrt(var / (n_ok - 1.0));
      }
    }
    row.runtime_s = runtime;
    table.push_back(std::move(row));
  }
  return table;
}

std::string results_to_csv(const ResultTable& table) {
  std::ostringstream os;
  os << "experiment,architecture,resolution,m_rf,power_budget_dbw,seed_group,"
        "ee_mean_bit_per_j,ee_std,sumrate_mean_bit_s,sumrate_mc_mean_bit_s,"
        "residual_frobenius,runtime_s,p_radiated_w_mean,error\n";
  for (const auto& r : table) {
    os << r.experiment << ',' << r.architecture << ',' << r.resolution << ',' << r.m_rf << ','
       << format_double(r.power_budget_dbw) << ',' << r.seed_group << ','
       << format_double(r.ee_mean_bit_per_j) << ',' << format_double(r.ee_std) << ','
       << format_double(r.sumrate_mean_bit_s) << ',' << format_double(r.sumrate_mc_mean_bit_s)
       << ',' << format_double(r.residual_frobenius) << ',' << format_double(r.runtime_s) << ','
       << format_double(r.p_radiated_w_mean) << ',' << sanitize_csv(r.error) << '\n';
  }
  return os.str();
}

nlohmann::json results_to_json(const ResultTable& table) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : table) {
    arr.push_back({{"experiment", r.experiment},
                   {"architecture", r.architecture},
                   {"resolution", r.resolution},
                   {"m_rf", r.m_rf},
                   {"power_budget_dbw", r.power_budget_dbw},
                   {"seed_group", r.seed_group},
                   {"ee_mean_bit_per_j", r.ee_mean_bit_per_j},
                   {"ee_std", r.ee_std},
                   {"sumrate_mean_bit_s", r.sumrate_mean_bit_s},
                   {"sumrate_mc_mean_bit_s", r.sumrate_mc_mean_bit_s},
                   {"residual_frobenius", r.residual_frobenius},
                   {"runtime_s", r.runtime_s},
                   {"p_radiated_w_mean", r.p_radiated_w_mean},
                   {"error", r.error}});
  }
  return arr;
}

ResultTable results_from_json(const nlohmann::json& j) {
  ResultTable table;
  for (const auto& item : j) {
    ResultRow r;
    item.at("experiment").get_to(r.experiment);
    item.at("architecture").get_to(r.architecture);
    item.at("resolution").get_to(r.resolution);
    item.at("m_rf").get_to(r.m_rf);
    item.at("power_budget_dbw").get_to(r.power_budget_dbw);
    item.at("seed_group").get_to(r.seed_group);
    item.at("ee_mean_bit_per_j").get_to(r.ee_mean_bit_per_j);
    item.at("ee_std").get_to(r.ee_std);
    item.at("sumrate_mean_bit_s").get_to(r.sumrate_mean_bit_s);
    item.at("sumrate_mc_mean_bit_s").get_to(r.sumrate_mc_mean_bit_s);
    item.at("residual_frobenius").get_to(r.residual_frobenius);
    item.at("runtime_s").get_to(r.runtime_s);
    item.at("p_radiated_w_mean").get_to(r.p_radiated_w_mean);
    item.at("error").get_to(r.error);
    table.push_back(std::move(r));
  }
  return table;
}

void emit_results(const ResultTable& table, const std::string& format, const std::string& path) {
  if (table.empty()) throw std::invalid_argument("emit_results: table is empty");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (format == "csv") {
    out << results_to_csv(table);
  } else if (format == "json") {
    out << results_to_json(table).dump(2) << '\n';
  } else {
    throw std::invalid_argument("emit_results: unknown format '" + format + "'");
  }
  if (!out.good()) throw std::runtime_error("write failed: " + path);
}

bool any_row_failed(const ResultTable& table) {
  for (const auto& r : table) {
    if (!r.error.empty()) return true;
  }
  return false;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t child_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t purpose) {
  return splitmix64(splitmix64(seed ^ splitmix64(trial + 0x51EDu)) ^ purpose);
}

}  // namespace leosat
