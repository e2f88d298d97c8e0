#pragma once

#include <random>
#include <string>

#include <json.hpp>

#include "leosat/channel.hpp"
#include "leosat/config.hpp"
#include "leosat/types.hpp"

namespace leosat {

/// Instantaneous SINR of user k: |b_k^H h_k|^2 / (sum_{l!=k} |b_l^H h_k|^2 + n0).
double instantaneous_sinr(const Eigen::Ref<const CMat>& b, const Eigen::Ref<const CVec>& h_k,
                          int k, double n0);

/// Closed-form ergodic-rate upper bound per user, bits per channel use:
/// log2(1 + gamma_k |v_k^H b_k|^2 / (sum_{l!=k} gamma_k |v_k^H b_l|^2 + n0)).
RVec rate_upper_bound(const Eigen::Ref<const CMat>& b, const ChannelState& ch, double n0);

struct McRate {
  double mean_bits = 0.0;   ///< mean of sum_k log2(1 + SINR_k) over draws
  double std_error = 0.0;   ///< standard error of the mean
  int samples = 0;
};

/// Monte Carlo estimate of the ergodic sum rate (bits per channel use) under
/// i.i.d. Rician gain draws, h_k = g_k v_k.
McRate monte_carlo_sum_rate(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                            const SystemConfig& cfg, std::mt19937_64& rng, int n_samples);

/// EE = B_w * sum_k Rbar_k / (xi * sum_k ||b_k||^2 + p_static), bits per Joule.
double energy_efficiency(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                         const SystemConfig& cfg, double p_static_w);

struct RateReport {
  RVec per_user_bits_per_sec;
  double sum_bits_per_sec = 0.0;
  double ee_bits_per_joule = 0.0;
};

RateReport make_rate_report(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                            const SystemConfig& cfg, double p_static_w);

void to_json(nlohmann::json& j, const RateReport& r);
void from_json(const nlohmann::json& j, RateReport& r);

}  // namespace leosat
