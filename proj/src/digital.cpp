#include "leosat/digital.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "leosat/metrics.hpp"
#include "leosat/power.hpp"

namespace leosat {

namespace {

constexpr double kLn2 = 0.6931471805599453;

/// Quadratic form data of the precoder update: the matrix to invert is
/// sigma*I + V diag(c) V^H with per-user column weights c >= 0.
struct BUpdateContext {
  const ChannelState* ch = nullptr;
  RVec c;        ///< Bw * omega_l * |u_l|^2 * gamma_l
  CVec q;        ///< Bw * omega_k * sqrt(gamma_k) * conj(u_k)
  CMat gram;     ///< V^H V, K x K
  std::vector<int> active;  ///< indices with c > 0
};

BUpdateContext make_context(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const RVec>& omega,
                            const ChannelState& ch, double bw) {
  BUpdateContext ctx;
  ctx.ch = &ch;
  const int k_users = ch.n_users();
  ctx.c.resize(k_users);
  ctx.q.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    ctx.c(k) = bw * omega(k) * std::norm(u(k)) * ch.powers(k);
    ctx.q(k) = bw * omega(k) * std::sqrt(ch.powers(k)) * std::conj(u(k));
  }
  ctx.gram = ch.directions.adjoint() * ch.directions;
  for (int k = 0; k < k_users; ++k) {
    if (ctx.c(k) > 0.0) ctx.active.push_back(k);
  }
  return ctx;
}

/// Solves (sigma*I + V diag(c) V^H) X = V and scales columns by q, via the
/// low-rank identity so only an |active| x |active| system is factorized.
CMat solve_shifted(const BUpdateContext& ctx, double sigma) {
  const CMat& dirs = ctx.ch->directions;
  const int k_users = static_cast<int>(dirs.cols());
  const int na = static_cast<int>(ctx.active.size());
  if (na == 0) return CMat::Zero(dirs.rows(), k_users);

  CMat g_sa(na, k_users);   // rows of the Gram matrix for active users
  CMat core(na, na);        // sigma * diag(1/c_S) + G_SS
  for (int i = 0; i < na; ++i) {
    g_sa.row(i) = ctx.gram.row(ctx.active[i]);
    for (int j = 0; j < na; ++j) core(i, j) = ctx.gram(ctx.active[i], ctx.active[j]);
    core(i, i) += sigma / ctx.c(ctx.active[i]);
  }
  const CMat y = core.ldlt().solve(g_sa);
  CMat dirs_active(dirs.rows(), na);
  for (int i = 0; i < na; ++i) dirs_active.col(i) = dirs.col(ctx.active[i]);
  CMat x = (dirs - dirs_active * y) / sigma;
  for (int k = 0; k < k_users; ++k) x.col(k) *= ctx.q(k);
  return x;
}

/// Minimum-norm solution of (V diag(c) V^H) x_k = v_k on the active span,
/// used when rho = 0 makes the shift vanish. Returns false when the active
/// Gram matrix is too ill-conditioned to trust.
bool solve_unshifted(const BUpdateContext& ctx, CMat& out) {
  const CMat& dirs = ctx.ch->directions;
  const int k_users = static_cast<int>(dirs.cols());
  const int na = static_cast<int>(ctx.active.size());
  out = CMat::Zero(dirs.rows(), k_users);
  if (na == 0) return true;

  CMat g_ss(na, na);
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < na; ++j) g_ss(i, j) = ctx.gram(ctx.active[i], ctx.active[j]);
  }
  Eigen::SelfAdjointEigenSolver<CMat> eig(g_ss);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) return false;

  CMat rhs = CMat::Zero(na, na);
  for (int i = 0; i < na; ++i) rhs(i, i) = 1.0 / ctx.c(ctx.active[i]);
  const CMat y = g_ss.ldlt().solve(rhs);
  CMat dirs_active(dirs.rows(), na);
  for (int i = 0; i < na; ++i) dirs_active.col(i) = dirs.col(ctx.active[i]);
  const CMat x = dirs_active * y;
  for (int i = 0; i < na; ++i) out.col(ctx.active[i]) = ctx.q(ctx.active[i]) * x.col(i);
  return true;
}

}  // namespace

RVec wmmse_mse(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const CMat>& b,
               const ChannelState& ch, double n0) {
  const int k_users = ch.n_users();
  const CMat t = ch.directions.adjoint() * b;  // t(k, i) = v_k^H b_i
  RVec e(k_users);
  for (int k = 0; k < k_users; ++k) {
    const double root_gamma = std::sqrt(ch.powers(k));
    const double desired = std::norm(u(k) * root_gamma * t(k, k) - 1.0);
    const double cross = ch.powers(k) * std::norm(u(k)) *
                         (t.row(k).cwiseAbs2().sum() - std::norm(t(k, k)));
    e(k) = desired + cross + n0 * std::norm(u(k));
  }
  return e;
}

CVec wmmse_update_u(const Eigen::Ref<const CMat>& b, const ChannelState& ch, double n0) {
  const int k_users = ch.n_users();
  const CMat t = ch.directions.adjoint() * b;
  CVec u(k_users);
  for (int k = 0; k < k_users; ++k) {
    const double denom = ch.powers(k) * t.row(k).cwiseAbs2().sum() + n0;
    // Minimizer of e_k, whose desired-signal term is u_k sqrt(gamma) v_k^H b_k;
    // hence the conjugate on the numerator.
    u(k) = std::sqrt(ch.powers(k)) * std::conj(t(k, k)) / denom;
  }
  return u;
}

RVec wmmse_update_omega(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const CMat>& b,
                        const ChannelState& ch, double n0) {
  const RVec e = wmmse_mse(u, b, ch, n0);
  RVec omega(e.size());
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    if (!(e(k) > 0.0)) throw std::runtime_error("wmmse_update_omega: degenerate MSE e_k <= 0");
    omega(k) = 1.0 / e(k);
  }
  return omega;
}

BUpdate wmmse_update_b(const Eigen::Ref<const CVec>& u, const Eigen::Ref<const RVec>& omega,
                       const ChannelState& ch, const SystemConfig& cfg, double rho) {
  if (rho < 0.0) throw std::invalid_argument("wmmse_update_b: rho must be >= 0");
  const double p_budget = cfg.power_budget_w;
  const double sigma0 = rho * cfg.amplifier_inefficiency;
  const BUpdateContext ctx = make_context(u, omega, ch, cfg.bandwidth_hz);

  if (ctx.active.empty()) {
    return {CMat::Zero(ch.n_tx(), ch.n_users()), 0.0};
  }

  // Slack-budget attempt with a = 0.
  if (sigma0 > 0.0) {
    CMat b0 = solve_shifted(ctx, sigma0);
    if (radiated_power(b0) <= p_budget) return {std::move(b0), 0.0};
  } else {
    CMat b0;
    if (solve_unshifted(ctx, b0) && radiated_power(b0) <= p_budget) return {std::move(b0), 0.0};
  }

  // Active budget: bisection on the multiplier. sum ||b_k(a)||^2 is
  // continuous and strictly decreasing in a.
  double a_hi = 1.0;
  CMat b_hi = solve_shifted(ctx, sigma0 + a_hi);
  double norm_hi = radiated_power(b_hi);
  int doublings = 0;
  while (norm_hi > p_budget) {
    if (++doublings > 60) {
      throw std::runtime_error("wmmse_update_b: bisection bracket not found (doubling cap)");
    }
    a_hi *= 2.0;
    b_hi = solve_shifted(ctx, sigma0 + a_hi);
    norm_hi = radiated_power(b_hi);
  }

  double a_lo = 0.0;
  for (int it = 0; it < 240; ++it) {
    const bool tight = (p_budget - norm_hi) <= 1e-10 * p_budget &&
                       a_hi * (p_budget - norm_hi) <= 1e-7 * p_budget;
    const bool collapsed = (a_hi - a_lo) <= 1e-15 * a_hi;
    if (tight || collapsed) break;
    const double mid = 0.5 * (a_lo + a_hi);
    CMat b_mid = solve_shifted(ctx, sigma0 + mid);
    const double norm_mid = radiated_power(b_mid);
    if (norm_mid > p_budget) {
      a_lo = mid;
    } else {
      a_hi = mid;
      b_hi = std::move(b_mid);
      norm_hi = norm_mid;
    }
  }
  return {std::move(b_hi), a_hi};
}

double wmmse_objective(const WmmseState& st, const ChannelState& ch, const SystemConfig& cfg,
                       double rho) {
  const RVec e = wmmse_mse(st.u, st.b, ch, noise_power(cfg));
  double obj = 0.0;
  for (Eigen::Index k = 0; k < e.size(); ++k) obj += st.omega(k) * e(k) - std::log(st.omega(k));
  obj += rho * cfg.amplifier_inefficiency * radiated_power(st.b) / cfg.bandwidth_hz;
  return obj;
}

WmmseState wmmse_solve(const ChannelState& ch, const SystemConfig& cfg, double rho,
                       const Eigen::Ref<const CMat>& init_b, double eps2, int cycle_cap,
                       bool record_objective) {
  const double n0 = noise_power(cfg);
  WmmseState st;
  st.b = init_b;
  double sum_log_omega_prev = 0.0;
  bool have_prev = false;

  for (int cycle = 1; cycle <= cycle_cap; ++cycle) {
    st.u = wmmse_update_u(st.b, ch, n0);
    if (record_objective && st.omega.size() > 0) {
      st.inner_objective.push_back(wmmse_objective(st, ch, cfg, rho));
    }
    st.omega = wmmse_update_omega(st.u, st.b, ch, n0);
    if (record_objective) st.inner_objective.push_back(wmmse_objective(st, ch, cfg, rho));

    BUpdate upd = wmmse_update_b(st.u, st.omega, ch, cfg, rho);
    st.b = std::move(upd.b);
    st.multiplier_a = upd.a;
    if (record_objective) st.inner_objective.push_back(wmmse_objective(st, ch, cfg, rho));

    st.cycles = cycle;
    double sum_log_omega = 0.0;
    for (Eigen::Index k = 0; k < st.omega.size(); ++k) sum_log_omega += std::log(st.omega(k));
    if (have_prev && std::abs(sum_log_omega - sum_log_omega_prev) < eps2) {
      st.converged = true;
      break;
    }
    sum_log_omega_prev = sum_log_omega;
    have_prev = true;
  }
  return st;
}

DigitalSolution dinkelbach_solve(const ChannelState& ch, const SystemConfig& cfg,
                                 double p_static_w, const SolverOptions& opts) {
  const int k_users = ch.n_users();
  const double p_budget = cfg.power_budget_w;
  const double eps1 = opts.eps1_scale * cfg.bandwidth_hz;
  const double n0 = noise_power(cfg);

  // Matched-filter initializer: b_k = sqrt(P/K) v_k, full budget.
  CMat b = ch.directions * std::sqrt(p_budget / k_users);

  DigitalSolution sol;
  double rho_ee = 0.0;
  for (int n = 0; n < opts.outer_cap; ++n) {
    // The rate terms are tracked in bits while the quadratic subproblem uses
    // the natural-log MSE weighting, so the ratio enters scaled by ln 2.
    sol.state = wmmse_solve(ch, cfg, rho_ee * kLn2, b, opts.eps2, opts.inner_cap,
                            opts.record_inner);
    b = sol.state.b;

    const double sum_rate_bits_s = cfg.bandwidth_hz * rate_upper_bound(b, ch, n0).sum();
    const double p_total = total_power(b, cfg.amplifier_inefficiency, p_static_w);
    const double f_value = sum_rate_bits_s - rho_ee * p_total;

    sol.trace.rho.push_back(rho_ee);
    sol.trace.f_value.push_back(f_value);
    sol.trace.radiated_w.push_back(radiated_power(b));
    sol.trace.sum_rate_bits_s.push_back(sum_rate_bits_s);
    if (opts.record_inner) sol.trace.inner_objectives.push_back(sol.state.inner_objective);
    sol.trace.iterations = n + 1;

    if (f_value <= eps1) {
      sol.trace.converged = true;
      break;
    }
    rho_ee = sum_rate_bits_s / p_total;
  }
  sol.b = b;
  return sol;
}

double wmmse_kkt_residual(const WmmseState& st, const ChannelState& ch, const SystemConfig& cfg,
                          double rho) {
  const double bw = cfg.bandwidth_hz;
  const int k_users = ch.n_users();
  CMat m = CMat::Zero(ch.n_tx(), ch.n_tx());
  for (int l = 0; l < k_users; ++l) {
    const double c = bw * st.omega(l) * std::norm(st.u(l)) * ch.powers(l);
    m.noalias() += c * (ch.directions.col(l) * ch.directions.col(l).adjoint());
  }
  const double sigma = rho * cfg.amplifier_inefficiency + st.multiplier_a;
  CMat residual = m * st.b + sigma * st.b;
  for (int k = 0; k < k_users; ++k) {
    residual.col(k) -=
        bw * st.omega(k) * std::sqrt(ch.powers(k)) * std::conj(st.u(k)) * ch.directions.col(k);
  }
  return residual.norm();
}

void write_dinkelbach_trace_csv(const DinkelbachTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "n,rho,f_value,radiated_w,sum_rate_bits_s\n";
  char buf[256];
  for (std::size_t n = 0; n < trace.rho.size(); ++n) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", n, trace.rho[n],
                  trace.f_value[n], trace.radiated_w[n], trace.sum_rate_bits_s[n]);
    out << buf;
  }
}

}  // namespace leosat
