#include "leosat/metrics.hpp"

#include "leosat/power.hpp"

namespace leosat {

double instantaneous_sinr(const Eigen::Ref<const CMat>& b, const Eigen::Ref<const CVec>& h_k,
                          int k, double n0) {
  const CVec proj = b.adjoint() * h_k;  // entry l is b_l^H h_k
  const double signal = std::norm(proj(k));
  const double interference = proj.squaredNorm() - signal;
  return signal / (interference + n0);
}

RVec rate_upper_bound(const Eigen::Ref<const CMat>& b, const ChannelState& ch, double n0) {
  const int k_users = ch.n_users();
  // gains(k, l) = |v_k^H b_l|^2
  const RMat gains = (ch.directions.adjoint() * b).cwiseAbs2();
  RVec rates(k_users);
  for (int k = 0; k < k_users; ++k) {
    const double total = ch.powers(k) * gains.row(k).sum();
    const double signal = ch.powers(k) * gains(k, k);
    rates(k) = std::log2(1.0 + signal / (total - signal + n0));
  }
  return rates;
}

McRate monte_carlo_sum_rate(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                            const SystemConfig& cfg, std::mt19937_64& rng, int n_samples) {
  if (n_samples < 1) throw std::invalid_argument("monte_carlo_sum_rate: n_samples must be >= 1");
  const int k_users = ch.n_users();
  const double n0 = noise_power(cfg);
  // With h_k = g_k v_k, only the K x K cross terms t(k, l) = |v_k^H b_l|^2
  // enter the SINR; precompute them once.
  const RMat t = (ch.directions.adjoint() * b).cwiseAbs2();

  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    double sum_rate = 0.0;
    for (int k = 0; k < k_users; ++k) {
      const Complex g = sample_channel_gain(rng, cfg.rician_kappa, ch.powers(k));
      const double g2 = std::norm(g);
      const double signal = g2 * t(k, k);
      const double interference = g2 * (t.row(k).sum() - t(k, k));
      sum_rate += std::log2(1.0 + signal / (interference + n0));
    }
    acc += sum_rate;
    acc2 += sum_rate * sum_rate;
  }
  McRate out;
  out.samples = n_samples;
  out.mean_bits = acc / n_samples;
  if (n_samples > 1) {
    const double var = std::max(0.0, (acc2 - acc * acc / n_samples) / (n_samples - 1));
    out.std_error = std::sqrt(var / n_samples);
  }
  return out;
}

double energy_efficiency(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                         const SystemConfig& cfg, double p_static_w) {
  const double sum_rate = rate_upper_bound(b, ch, noise_power(cfg)).sum();
  const double p_total = total_power(b, cfg.amplifier_inefficiency, p_static_w);
  return cfg.bandwidth_hz * sum_rate / p_total;
}

RateReport make_rate_report(const Eigen::Ref<const CMat>& b, const ChannelState& ch,
                            const SystemConfig& cfg, double p_static_w) {
  RateReport r;
  r.per_user_bits_per_sec = cfg.bandwidth_hz * rate_upper_bound(b, ch, noise_power(cfg));
  r.sum_bits_per_sec = r.per_user_bits_per_sec.sum();
  r.ee_bits_per_joule =
      r.sum_bits_per_sec / total_power(b, cfg.amplifier_inefficiency, p_static_w);
  return r;
}

void to_json(nlohmann::json& j, const RateReport& r) {
  std::vector<double> per_user(r.per_user_bits_per_sec.data(),
                               r.per_user_bits_per_sec.data() + r.per_user_bits_per_sec.size());
  j = nlohmann::json{{"per_user_bits_per_sec", per_user},
                     {"sum_bits_per_sec", r.sum_bits_per_sec},
                     {"ee_bits_per_joule", r.ee_bits_per_joule}};
}

void from_json(const nlohmann::json& j, RateReport& r) {
  const auto per_user = j.at("per_user_bits_per_sec").get<std::vector<double>>();
  r.per_user_bits_per_sec =
      Eigen::Map<const RVec>(per_user.data(), static_cast<Eigen::Index>(per_user.size()));
  j.at("sum_bits_per_sec").get_to(r.sum_bits_per_sec);
  j.at("ee_bits_per_joule").get_to(r.ee_bits_per_joule);
}

}  // namespace leosat
