#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "leosat/config.hpp"
#include "leosat/types.hpp"

namespace leosat {

inline constexpr double kSpeedOfLight = 3.0e8;  // m/s

/// Statistical channel state: per-user array direction v_k (unit norm),
/// average channel power gamma_k, and the space angle pair that produced v_k.
struct ChannelState {
  CMat directions;                ///< n_tx x K, column k is v_k
  RVec powers;                    ///< gamma_k
  Eigen::Matrix<double, Eigen::Dynamic, 2> space_angles;  ///< K x 2, (theta_x, theta_y)

  int n_users() const { return static_cast<int>(directions.cols()); }
  int n_tx() const { return static_cast<int>(directions.rows()); }

  /// Rank-1 spatial covariance gamma_k v_k v_k^H of user k.
  CMat covariance(int k) const {
    return powers(k) * (directions.col(k) * directions.col(k).adjoint());
  }
};

/// Single-axis steering vector: entries exp{-j pi (m-1) theta} / sqrt(n).
template <typename Real>
Vec<std::complex<Real>> axis_response(Real theta, int n) {
  Vec<std::complex<Real>> v(n);
  const Real norm = Real(1) / std::sqrt(static_cast<Real>(n));
  for (int m = 0; m < n; ++m) {
    const Real phase = -std::numbers::pi_v<Real> * static_cast<Real>(m) * theta;
    v(m) = std::polar(norm, phase);
  }
  return v;
}

/// Planar-array response v_x(theta_x) (x) v_y(theta_y); unit l2 norm.
CVec array_response(double theta_x, double theta_y, int n_x, int n_y);

/// K independent space-angle pairs, each coordinate uniform on [-1, 1).
Eigen::Matrix<double, Eigen::Dynamic, 2> sample_space_angles(std::mt19937_64& rng, int k);

/// One Rician channel-gain draw: real and imaginary parts are independent
/// Gaussians with mean sqrt(kappa*gamma / (2(kappa+1))) and variance
/// gamma / (2(kappa+1)), so E{|g|^2} = gamma.
Complex sample_channel_gain(std::mt19937_64& rng, double kappa, double gamma);

/// Free-space link budget: gamma = G_sat G_ut N_t (c / (4 pi f_c d))^2.
/// Rejects d_k <= 0.
double link_budget_gamma(const SystemConfig& cfg, double d_k);

/// Thermal noise power k_B * B_w * T_n in Watts.
double noise_power(const SystemConfig& cfg);

/// Assembles the channel state for given angles using the config link budget.
ChannelState make_channel_state(const SystemConfig& cfg,
                                const Eigen::Matrix<double, Eigen::Dynamic, 2>& angles);

/// Convenience: sample angles with the given RNG and assemble the state.
ChannelState sample_channel_state(const SystemConfig& cfg, std::mt19937_64& rng);

}  // namespace leosat
