#include "leosat/channel.hpp"

#include <stdexcept>

namespace leosat {

CVec array_response(double theta_x, double theta_y, int n_x, int n_y) {
  const CVec vx = axis_response(theta_x, n_x);
  const CVec vy = axis_response(theta_y, n_y);
  CVec v(n_x * n_y);
  for (int i = 0; i < n_x; ++i) v.segment(i * n_y, n_y) = vx(i) * vy;
  return v;
}

Eigen::Matrix<double, Eigen::Dynamic, 2> sample_space_angles(std::mt19937_64& rng, int k) {
  Eigen::Matrix<double, Eigen::Dynamic, 2> angles(k, 2);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < k; ++i) {
    angles(i, 0) = uni(rng);
    angles(i, 1) = uni(rng);
  }
  return angles;
}

Complex sample_channel_gain(std::mt19937_64& rng, double kappa, double gamma) {
  if (gamma == 0.0) return Complex(0.0, 0.0);
  const double mean = std::sqrt(kappa * gamma / (2.0 * (kappa + 1.0)));
  const double sigma = std::sqrt(gamma / (2.0 * (kappa + 1.0)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double re = mean + sigma * gauss(rng);
  const double im = mean + sigma * gauss(rng);
  return Complex(re, im);
}

double link_budget_gamma(const SystemConfig& cfg, double d_k) {
  if (!(d_k > 0.0)) throw std::invalid_argument("link_budget_gamma: distance must be > 0");
  const double ratio = kSpeedOfLight / (4.0 * std::numbers::pi * cfg.carrier_hz * d_k);
  return cfg.gain_sat * cfg.gain_ut * static_cast<double>(cfg.n_tx()) * ratio * ratio;
}

double noise_power(const SystemConfig& cfg) {
  return cfg.boltzmann * cfg.bandwidth_hz * cfg.noise_temp_k;
}

ChannelState make_channel_state(const SystemConfig& cfg,
                                const Eigen::Matrix<double, Eigen::Dynamic, 2>& angles) {
  const int k = static_cast<int>(angles.rows());
  ChannelState ch;
  ch.directions.resize(cfg.n_tx(), k);
  ch.powers.resize(k);
  ch.space_angles = angles;
  for (int i = 0; i < k; ++i) {
    ch.directions.col(i) = array_response(angles(i, 0), angles(i, 1), cfg.n_tx_x, cfg.n_tx_y);
    const double d = cfg.distances_m.size() == 1 ? cfg.distances_m.front()
                                                 : cfg.distances_m.at(static_cast<std::size_t>(i));
    ch.powers(i) = link_budget_gamma(cfg, d);
  }
  return ch;
}

ChannelState sample_channel_state(const SystemConfig& cfg, std::mt19937_64& rng) {
  return make_channel_state(cfg, sample_space_angles(rng, cfg.k_users));
}

}  // namespace leosat
