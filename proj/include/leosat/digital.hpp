#pragma once

#include <string>
#include <vector>

#include "leosat/channel.hpp"
#include "leosat/config.hpp"
#include "leosat/types.hpp"

namespace leosat {

/// Block-coordinate state of the weighted-MMSE solver.
struct WmmseState {
  CVec u;             ///< per-user linear receiver scalars
  RVec omega;         ///< per-user MSE weights, omega_k = 1/e_k > 0
  CMat b;             ///< precoder, n_tx x K
  double multiplier_a = 0.0;  ///< power-constraint multiplier of the last b-update
  bool converged = false;
  int cycles = 0;
  /// Subproblem objective after every u/omega/b update when recording is on;
  /// normalized by the bandwidth so the scale is O(K).
  std::vector<double> inner_objective;
};

/// Per-outer-iteration log of the ratio maximization.
struct DinkelbachTrace {
  std::vector<double> rho;               ///< auxiliary ratio, bit/J
  std::vector<double> f_value;           ///< F(rho_n) = Bw*sum Rbar - rho_n*P_total, bit/s
  std::vector<double> radiated_w;        ///< sum_k ||b_k||^2 per iteration
  std::vector<double> sum_rate_bits_s;   ///< Bw * sum_k Rbar_k per iteration
  /// Inner objective recordings of each subproblem (record_inner only).
  std::vector<std::vector<double>> inner_objectives;
  int iterations = 0;
  bool converged = false;
};

struct SolverOptions {
  /// Outer termination: F(rho_n) <= eps1_scale * bandwidth_hz (bit/s).
  double eps1_scale = 1e-3;
  /// Inner termination on |sum_k ln omega_k - previous| < eps2.
  double eps2 = 1e-5;
  int outer_cap = 50;
  int inner_cap = 200;
  bool record_inner = false;
};

/// Mean-square error e_k of each user's signal estimate under receiver u.
RVec wmmse_mse(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const CMat>& b,
               const ChannelState& ch, double n0);

/// MMSE receiver update u_k = sqrt(gamma_k) v_k^H b_k / (sum_i gamma_k |v_k^H b_i|^2 + n0).
CVec wmmse_update_u(const Eigen::Ref<const CMat>& b, const ChannelState& ch, double n0);

/// Weight update omega_k = 1/e_k. Throws on a degenerate e_k <= 0 (impossible
/// with n0 > 0).
RVec wmmse_update_omega(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const CMat>& b,
                        const ChannelState& ch, double n0);

struct BUpdate {
  CMat b;
  double a = 0.0;  ///< power multiplier; zero when the budget is slack
};

/// Precoder update: b_k = Bw omega_k sqrt(gamma_k) u_k^* (M + (rho*xi + a) I)^{-1} v_k
/// with M = sum_l Bw omega_l |u_l|^2 gamma_l v_l v_l^H. The multiplier a is 0
/// when the unconstrained solution fits the power budget, otherwise chosen by
/// bisection so that sum_k ||b_k||^2 = P within 1e-8 relative (feasible side).
/// `rho` is the weight multiplying the power term of the subproblem objective.
/// Throws std::runtime_error if no bisection bracket can be established.
BUpdate wmmse_update_b(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const RVec>& omega,
                       const ChannelState& ch, const SystemConfig& cfg, double rho);

/// Cycles u -> omega -> b until the omega-based criterion |sum ln omega -
/// previous| < eps2 or the cycle cap; the subproblem objective is
/// non-increasing across updates. Returns converged=false when capped.
WmmseState wmmse_solve(const ChannelState& ch, const SystemConfig& cfg, double rho,
                       const Eigen::Ref<const CMat>& init_b, double eps2, int cycle_cap = 200,
                       bool record_objective = false);

struct DigitalSolution {
  CMat b;
  DinkelbachTrace trace;
  WmmseState state;  ///< final inner state (receivers, weights, multiplier)
};

/// Energy-efficiency maximizing fully digital precoder: Dinkelbach ratio
/// iteration with the WMMSE inner solver, warm-started across outer
/// iterations from the matched-filter initializer b_k = sqrt(P/K) v_k.
DigitalSolution dinkelbach_solve(const ChannelState& ch, const SystemConfig& cfg,
                                 double p_static_w, const SolverOptions& opts = {});

/// Stationarity residual ||(M + (rho*xi + a) I) b_k - Bw omega_k sqrt(gamma_k)
/// u_k^* v_k||_F of a state, computed against the densely assembled quadratic.
double wmmse_kkt_residual(const WmmseState& st, const ChannelState& ch, const SystemConfig& cfg,
                          double rho);

/// Subproblem objective sum_k (omega_k e_k - ln omega_k) + rho*xi*||b||_F^2/Bw.
double wmmse_objective(const WmmseState& st, const ChannelState& ch, const SystemConfig& cfg,
                       double rho);

/// Writes (n, rho, f_value, radiated_w, sum_rate_bits_s) rows as CSV.
void write_dinkelbach_trace_csv(const DinkelbachTrace& trace, const std::string& path);

}  // namespace leosat
