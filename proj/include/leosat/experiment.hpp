#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "leosat/config.hpp"
#include "leosat/digital.hpp"
#include "leosat/hybrid.hpp"
#include "leosat/power.hpp"

namespace leosat {

enum class ExperimentKind { EeVsRfChains, EeVsPowerBudget, BoundTightness, MethodCompare };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_from_string(const std::string& s);

/// Grid description of one experiment run. The sweep axis is the number of RF
/// chains for EeVsRfChains / MethodCompare and the power budget in dBW for
/// EeVsPowerBudget / BoundTightness.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::EeVsRfChains;
  std::vector<double> sweep;
  std::vector<Architecture> architectures;
  std::vector<int> resolutions;  ///< bits per phase shifter, 0 = continuous
  std::vector<std::uint64_t> seeds{1};
  int trials_per_point = 1;
  int mc_samples = 10000;
  MmSchedule sched{};
  SolverOptions solver{};
  double factor_tol = 1e-4;
  int factor_cap = 50;

  void validate() const;
};

/// Table-I-shaped default grids per experiment kind; `small_preset` shrinks
/// the sweep for quick runs.
ExperimentSpec default_experiment(ExperimentKind kind, bool small_preset = false);

/// Desk-scale scenario override: 4x4 array, 4 users, 4 RF chains.
void apply_small_preset(SystemConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::string architecture;  ///< "_npp" suffix marks the baseline factorization
  std::string resolution;    ///< "2" | "3" | "4" | "inf" | "na"
  int m_rf = 0;
  double power_budget_dbw = 0.0;
  std::string seed_group;
  double ee_mean_bit_per_j = 0.0;  ///< pooled over trials: sum(rate)/sum(power)
  double ee_std = 0.0;             ///< sample std of per-trial EE
  double sumrate_mean_bit_s = 0.0;
  double sumrate_mc_mean_bit_s = 0.0;
  double residual_frobenius = 0.0;
  double runtime_s = 0.0;
  double p_radiated_w_mean = 0.0;
  std::string error;
};

using ResultTable = std::vector<ResultRow>;

/// Runs the full grid. Each (seed, trial) pair owns its RNG streams, so the
/// pipeline is a pure function of (spec, cfg, pm); channel realizations are
/// keyed by (seed, trial) alone and therefore shared across grid points,
/// which pairs the sweep curves. Per-row solver failures land in the error
/// column instead of aborting the sweep.
ResultTable run_experiment(const ExperimentSpec& spec, const SystemConfig& cfg,
                           const PowerModel& pm);

std::string results_to_csv(const ResultTable& table);
nlohmann::json results_to_json(const ResultTable& table);
ResultTable results_from_json(const nlohmann::json& j);

/// Writes the table as "csv" or "json". Throws on I/O failure with the path.
void emit_results(const ResultTable& table, const std::string& format, const std::string& path);

bool any_row_failed(const ResultTable& table);

/// SplitMix64 mix used for the documented child-seed scheme.
std::uint64_t splitmix64(std::uint64_t x);

inline constexpr std::uint64_t kChannelStream = 0xC5A1;
inline constexpr std::uint64_t kMcStream = 0x3C0F;

/// Child seed for (seed, trial) and a purpose tag; reorder-invariant.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t trial, std::uint64_t purpose);

}  // namespace leosat
