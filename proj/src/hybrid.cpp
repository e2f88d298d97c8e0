#include "leosat/hybrid.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <stdexcept>

namespace leosat {

namespace {

/// Phase value maximizing Re(conj(v) * c) over the feasible set; keeps
/// `fallback` when c vanishes. For discrete sets this is the nearest
/// constellation point to the phase of c, ties toward the smaller index.
Complex best_phase(Complex c, const PhaseShifterSpec& spec, Complex fallback) {
  if (std::abs(c) < 1e-300) return fallback;
  if (spec.continuous()) return c / std::abs(c);
  const int levels = spec.levels();
  int best_m = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int m = 0; m < levels; ++m) {
    const double score = std::real(std::conj(constellation_point(m, levels)) * c);
    if (score > best) {
      best = score;
      best_m = m;
    }
  }
  return constellation_point(best_m, levels);
}

/// Entrywise refinement of min ||B - VW||_F over feasible phases, holding all
/// other entries fixed; each accepted change strictly decreases the residual.
void polish_fully(CMat& v, const Eigen::Ref<const CMat>& b, const Eigen::Ref<const CMat>& w,
                  const PhaseShifterSpec& spec, int max_sweeps) {
  CMat residual = b - v * w;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (int i = 0; i < v.rows(); ++i) {
      for (int j = 0; j < v.cols(); ++j) {
        const auto wj = w.row(j);
        if (wj.squaredNorm() <= 0.0) continue;
        const Complex c = ((residual.row(i) + v(i, j) * wj) * wj.adjoint())(0, 0);
        const Complex nv = best_phase(c, spec, v(i, j));
        if (std::abs(nv - v(i, j)) > 1e-12) {
          residual.row(i) += (v(i, j) - nv) * wj;
          v(i, j) = nv;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
}

/// Entrywise refinement of max r^H A r over feasible phases, block by block.
void polish_partial(CVec& r, const BlockDiagQuadratic& a, const PhaseShifterSpec& spec,
                    int max_sweeps) {
  const int bs = a.block_size;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
      auto p = r.segment(static_cast<Eigen::Index>(i) * bs, bs);
      const CMat& d = a.blocks[i];
      for (int m = 0; m < bs; ++m) {
        const Complex c = (d.row(m) * p)(0, 0) - d(m, m) * p(m);
        const Complex nv = best_phase(c, spec, p(m));
        if (std::abs(nv - p(m)) > 1e-12) {
          p(m) = nv;
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
}

struct ApgCallbacks {
  std::function<double(const CMat&)> objective;
  std::function<CMat(const CMat&)> gradient;
  std::function<CMat(const CMat&)> project;
  std::function<double(const CMat&)> hull_distance;  // optional
  std::function<double(const CMat&)> residual;       // optional, for traces
};

/// Inexact MM loop: one accelerated projected-gradient step per iteration on
/// the surrogate of f(V) - eta ||V||^2, with backtracked step sizes and the
/// penalty escalation schedule. With `monotone` set, an accelerated step that
/// raises f is replaced by the unextrapolated step, or dropped if that is
/// worse too (monotone-FISTA acceptance).
CMat inexact_mm_apg(const ApgCallbacks& cb, double lipschitz, CMat v, const MmSchedule& sched,
                    MmRunStats* stats, MmTrace* trace, int outer_iter, bool monotone = false) {
  CMat v_prev = v;
  double alpha_prev = 0.0;
  double eta = sched.eta0;
  double beta = std::max(lipschitz, 1e-6);
  int since_escalation = 0;
  int streak = 0;
  int n = 0;

  // One backtracked projected-gradient step from the given base point.
  auto apg_step = [&](const CMat& z, bool& first_try) {
    const CMat grad = cb.gradient(z) - 2.0 * eta * v;  // surrogate anchored at v
    const double gz = cb.objective(z) - 2.0 * eta * rip(v, z);
    CMat v_next;
    first_try = true;
    for (int bt = 0; bt <= 60; ++bt) {
      v_next = cb.project(z - grad / beta);
      const double gv = cb.objective(v_next) - 2.0 * eta * rip(v, v_next);
      const double rhs = gz + rip(grad, v_next - z) + 0.5 * beta * fro2(v_next - z);
      if (gv <= rhs + 1e-12 * (1.0 + std::abs(rhs))) break;
      beta *= 2.0;
      first_try = false;
    }
    return v_next;
  };

  while (eta <= sched.eta_upper) {
    const double alpha = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * alpha_prev * alpha_prev));
    const double zeta = (alpha_prev - 1.0) / alpha;
    const CMat z = v + zeta * (v - v_prev);

    bool first_try = true;
    CMat v_next = apg_step(z, first_try);
    if (monotone) {
      const double f_cur = cb.objective(v);
      if (cb.objective(v_next) > f_cur + 1e-12 * (1.0 + std::abs(f_cur))) {
        bool dummy = true;
        CMat plain = apg_step(v, dummy);
        v_next = cb.objective(plain) <= f_cur + 1e-12 * (1.0 + std::abs(f_cur)) ? std::move(plain)
                                                                                : v;
      }
    }
    if (first_try) {
      if (++streak >= 5) {
        beta = std::max(0.5 * beta, 1e-6);
        streak = 0;
      }
    } else {
      streak = 0;
    }

    if (stats) {
      stats->beta_max = std::max(stats->beta_max, beta);
      if (cb.hull_distance) {
        stats->hull_violation_max = std::max(stats->hull_violation_max, cb.hull_distance(v_next));
      }
      ++stats->iterations;
      stats->f_trace.push_back(cb.objective(v_next));
    }
    if (trace) {
      MmTraceRow row;
      row.outer_iter = outer_iter;
      row.inner_iter = n;
      row.eta = eta;
      row.beta = beta;
      row.residual = cb.residual ? cb.residual(v_next) : 0.0;
      row.objective = cb.objective(v_next) - eta * fro2(v_next);
      trace->rows.push_back(row);
    }

    const double step = (v_next - v).norm();
    v_prev = v;
    v = std::move(v_next);
    alpha_prev = alpha;
    ++n;
    if (++since_escalation >= sched.inner_budget || step < sched.inner_tol) {
      eta *= sched.growth;
      since_escalation = 0;
    }
  }
  return v;
}

double spectral_norm_hermitian(const CMat& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMat> eig(m, Eigen::EigenvaluesOnly);
  return std::max(std::abs(eig.eigenvalues().minCoeff()), std::abs(eig.eigenvalues().maxCoeff()));
}

}  // namespace

void MmSchedule::validate() const {
  if (!(eta0 > 0.0) || !(growth > 1.0) || inner_budget < 1 || !(eta_upper > eta0) ||
      !(inner_tol > 0.0)) {
    throw std::invalid_argument("MmSchedule: need eta0 > 0, growth > 1, inner_budget >= 1, "
                                "inner_tol > 0, eta_upper > eta0");
  }
}

std::vector<double> apg_extrapolation_weights(int count) {
  std::vector<double> zetas;
  zetas.reserve(static_cast<std::size_t>(count));
  double alpha_prev = 0.0;
  for (int n = 0; n < count; ++n) {
    const double alpha = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * alpha_prev * alpha_prev));
    zetas.push_back((alpha_prev - 1.0) / alpha);
    alpha_prev = alpha;
  }
  return zetas;
}

CMat ls_digital_step(const Eigen::Ref<const CMat>& b_target, const Eigen::Ref<const CMat>& v) {
  const int m_rf = static_cast<int>(v.cols());
  CMat gram = v.adjoint() * v;
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    gram += Complex(1e-10 * gram.real().trace() / m_rf, 0.0) * CMat::Identity(m_rf, m_rf);
  }
  return gram.ldlt().solve(v.adjoint() * b_target);
}

AnalogPrecoder mm_analog_fully(const Eigen::Ref<const CMat>& b_target,
                               const Eigen::Ref<const CMat>& w, const PhaseShifterSpec& spec,
                               const MmSchedule& sched, std::optional<CMat> v0,
                               MmRunStats* stats, MmTrace* trace, int outer_iter) {
  if (spec.architecture != Architecture::FullyConnected) {
    throw std::invalid_argument("mm_analog_fully: spec must be fully connected");
  }
  sched.validate();
  const int m_rf = static_cast<int>(w.rows());
  const CMat start = v0 ? std::move(*v0) : initial_analog(b_target, m_rf, spec).v;

  const CMat wwh = w * w.adjoint();
  const CMat bwh = b_target * w.adjoint();
  const double lipschitz = 2.0 * spectral_norm_hermitian(wwh);

  ApgCallbacks cb;
  cb.objective = [&](const CMat& x) { return fro2(b_target - x * w); };
  cb.gradient = [&](const CMat& z) { return CMat(2.0 * (z * wwh - bwh)); };
  cb.project = [&](const CMat& x) { return project_hull_matrix(x, spec); };
  cb.hull_distance = [&](const CMat& x) {
    return (x - project_hull_matrix(x, spec)).cwiseAbs().maxCoeff();
  };
  cb.residual = [&](const CMat& x) { return (b_target - x * w).norm(); };

  const CMat v_end =
      inexact_mm_apg(cb, lipschitz, project_hull_matrix(start, spec), sched, stats, trace,
                     outer_iter);

  AnalogPrecoder cand = round_to_feasible(v_end, spec);
  polish_fully(cand.v, b_target, w, spec, 4);
  AnalogPrecoder incumbent = round_to_feasible(start, spec);
  if (cb.objective(cand.v) <= cb.objective(incumbent.v)) return cand;
  return incumbent;
}

FactorizeResult aim_adp(const Eigen::Ref<const CMat>& b_target, int m_rf,
                        const PhaseShifterSpec& spec, const MmSchedule& sched, double outer_tol,
                        int outer_cap, MmTrace* trace) {
  if (spec.architecture != Architecture::FullyConnected) {
    throw std::invalid_argument("aim_adp: spec must be fully connected");
  }
  AnalogPrecoder v = initial_analog(b_target, m_rf, spec);
  CMat w;
  FactorizeResult res;
  double f_prev = std::numeric_limits<double>::infinity();
  for (int t = 0; t < outer_cap; ++t) {
    // The ridge fallback inside the least-squares stage can lose to the
    // incumbent on rank-deficient analog matrices; keep the better one.
    CMat w_new = ls_digital_step(b_target, v.v);
    if (t == 0 || fro2(b_target - v.v * w_new) <= fro2(b_target - v.v * w)) w = std::move(w_new);
    v = mm_analog_fully(b_target, w, spec, sched, v.v, nullptr, trace, t);
    const double f = (b_target - v.v * w).norm();
    res.residual_trace.push_back(f);
    res.outer_iterations = t + 1;
    if (f <= 1e-14 * b_target.norm()) break;
    if (std::isfinite(f_prev) && (f_prev - f) <= outer_tol * std::max(f_prev, 1e-300)) break;
    f_prev = f;
  }
  const double vw_norm = (v.v * w).norm();
  if (vw_norm > 0.0) w *= b_target.norm() / vw_norm;
  res.hp = HybridPrecoder{std::move(v), std::move(w)};
  res.residual = (b_target - res.hp.effective()).norm();
  return res;
}

CMat vp_digital_partial(const Eigen::Ref<const CMat>& b_target, const AnalogPrecoder& v) {
  if (v.spec.architecture != Architecture::PartiallyConnected) {
    throw std::invalid_argument("vp_digital_partial: analog precoder must be partially connected");
  }
  const double beta =
      fro2(b_target) * static_cast<double>(v.m_rf()) / static_cast<double>(v.n_tx());
  const CMat vhb = v.v.adjoint() * b_target;
  const double norm = vhb.norm();
  if (!(norm > 0.0)) {
    throw std::invalid_argument("vp_digital_partial: degenerate input, V^H B = 0");
  }
  return (std::sqrt(beta) / norm) * vhb;
}

CMat BlockDiagQuadratic::assemble() const {
  const int n = dim();
  CMat a = CMat::Zero(n, n);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    a.block(static_cast<Eigen::Index>(i) * block_size, static_cast<Eigen::Index>(i) * block_size,
            block_size, block_size) = blocks[i];
  }
  return a;
}

CVec BlockDiagQuadratic::apply(const Eigen::Ref<const CVec>& r) const {
  CVec out(dim());
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto seg = r.segment(static_cast<Eigen::Index>(i) * block_size, block_size);
    out.segment(static_cast<Eigen::Index>(i) * block_size, block_size) = blocks[i] * seg;
  }
  return out;
}

double BlockDiagQuadratic::quad(const Eigen::Ref<const CVec>& r) const {
  double total = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto seg = r.segment(static_cast<Eigen::Index>(i) * block_size, block_size);
    total += std::real((seg.adjoint() * blocks[i] * seg)(0, 0));
  }
  return total;
}

double BlockDiagQuadratic::op_norm() const {
  double norm = 0.0;
  for (const auto& d : blocks) norm = std::max(norm, spectral_norm_hermitian(d));
  return norm;
}

BlockDiagQuadratic build_blockdiag_quadratic(const Eigen::Ref<const CMat>& b_target, int m_rf) {
  const int n_t = static_cast<int>(b_target.rows());
  BlockDiagQuadratic out;
  out.block_size = partial_block_size(n_t, m_rf);
  out.blocks.reserve(static_cast<std::size_t>(m_rf));
  for (int i = 0; i < m_rf; ++i) {
    const auto rows = b_target.middleRows(static_cast<Eigen::Index>(i) * out.block_size,
                                          out.block_size);
    out.blocks.push_back(rows * rows.adjoint());
  }
  return out;
}

CVec mm_analog_partial(const BlockDiagQuadratic& a_mat, const PhaseShifterSpec& spec,
                       const MmSchedule& sched, MmRunStats* stats, MmTrace* trace) {
  sched.validate();
  const int n = a_mat.dim();
  const int bs = a_mat.block_size;

  // Start from the dominant-eigenvector phases of each block.
  CVec r0(n);
  for (std::size_t i = 0; i < a_mat.blocks.size(); ++i) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(a_mat.blocks[i]);
    const CVec top = eig.eigenvectors().col(bs - 1);
    for (int m = 0; m < bs; ++m) {
      const Complex e = top(m);
      r0(static_cast<Eigen::Index>(i) * bs + m) = std::abs(e) < 1e-12 ? Complex(1.0, 0.0)
                                                                      : e / std::abs(e);
    }
  }

  ApgCallbacks cb;
  cb.objective = [&](const CMat& x) { return -a_mat.quad(x.col(0)); };
  cb.gradient = [&](const CMat& z) { return CMat(-2.0 * a_mat.apply(z.col(0))); };
  cb.project = [&](const CMat& x) {
    CMat out(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = project_hull(x(i), spec);
    return out;
  };
  cb.hull_distance = [&](const CMat& x) { return (x - cb.project(x)).cwiseAbs().maxCoeff(); };
  const double lipschitz = 2.0 * a_mat.op_norm();

  const CMat r_end =
      inexact_mm_apg(cb, lipschitz, cb.project(r0), sched, stats, trace, 0, /*monotone=*/true);

  CVec cand(n), incumbent(n);
  for (int i = 0; i < n; ++i) {
    cand(i) = round_scalar_to_feasible(r_end(i), spec);
    incumbent(i) = round_scalar_to_feasible(r0(i), spec);
  }
  polish_partial(cand, a_mat, spec, 4);
  if (a_mat.quad(cand) >= a_mat.quad(incumbent)) return cand;
  return incumbent;
}

CMat assemble_partial_analog(const Eigen::Ref<const CVec>& r, int m_rf) {
  const int n_t = static_cast<int>(r.size());
  const int bs = partial_block_size(n_t, m_rf);
  CMat v = CMat::Zero(n_t, m_rf);
  for (int i = 0; i < m_rf; ++i) {
    v.block(static_cast<Eigen::Index>(i) * bs, i, bs, 1) =
        r.segment(static_cast<Eigen::Index>(i) * bs, bs);
  }
  return v;
}

FactorizeResult avpim_adp(const Eigen::Ref<const CMat>& b_target, int m_rf,
                          const PhaseShifterSpec& spec, const MmSchedule& sched, MmTrace* trace) {
  if (spec.architecture != Architecture::PartiallyConnected) {
    throw std::invalid_argument("avpim_adp: spec must be partially connected");
  }
  const BlockDiagQuadratic a_mat = build_blockdiag_quadratic(b_target, m_rf);
  const CVec r = mm_analog_partial(a_mat, spec, sched, nullptr, trace);
  AnalogPrecoder v{assemble_partial_analog(r, m_rf), spec};
  CMat w = vp_digital_partial(b_target, v);

  FactorizeResult res;
  res.outer_iterations = 1;
  res.residual_trace.push_back((b_target - v.v * w).norm());
  const double vw_norm = (v.v * w).norm();
  if (vw_norm > 0.0) w *= b_target.norm() / vw_norm;
  res.hp = HybridPrecoder{std::move(v), std::move(w)};
  res.residual = (b_target - res.hp.effective()).norm();
  return res;
}

FactorizeResult npp_factorize(const Eigen::Ref<const CMat>& b_target, int m_rf,
                              const PhaseShifterSpec& spec, double outer_tol, int outer_cap) {
  if (spec.architecture == Architecture::FullyDigital) {
    throw std::invalid_argument("npp_factorize: needs a hybrid architecture");
  }
  const bool partial = spec.architecture == Architecture::PartiallyConnected;
  AnalogPrecoder v = initial_analog(b_target, m_rf, spec);
  CMat w;
  FactorizeResult res;
  double f_prev = std::numeric_limits<double>::infinity();
  for (int t = 0; t < outer_cap; ++t) {
    CMat w_new = partial ? vp_digital_partial(b_target, v) : ls_digital_step(b_target, v.v);
    if (t == 0 || fro2(b_target - v.v * w_new) <= fro2(b_target - v.v * w)) w = std::move(w_new);
    AnalogPrecoder cand = npp_analog_update(b_target, w, spec);
    if (fro2(b_target - cand.v * w) <= fro2(b_target - v.v * w)) v = std::move(cand);
    const double f = (b_target - v.v * w).norm();
    res.residual_trace.push_back(f);
    res.outer_iterations = t + 1;
    if (f <= 1e-14 * b_target.norm()) break;
    if (std::isfinite(f_prev) && (f_prev - f) <= outer_tol * std::max(f_prev, 1e-300)) break;
    f_prev = f;
  }
  const double vw_norm = (v.v * w).norm();
  if (vw_norm > 0.0) w *= b_target.norm() / vw_norm;
  res.hp = HybridPrecoder{std::move(v), std::move(w)};
  res.residual = (b_target - res.hp.effective()).norm();
  return res;
}

AnalogPrecoder initial_analog(const Eigen::Ref<const CMat>& b_target, int m_rf,
                              const PhaseShifterSpec& spec) {
  const int n_t = static_cast<int>(b_target.rows());
  const int k = static_cast<int>(b_target.cols());
  CMat raw(n_t, m_rf);
  for (int j = 0; j < m_rf; ++j) raw.col(j) = b_target.col(j % k);
  return round_to_feasible(raw, spec);
}

void write_mm_trace_csv(const MmTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "outer_iter,inner_iter,eta,beta,residual,objective\n";
  char buf[256];
  for (const auto& row : trace.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g,%.17g,%.17g,%.17g\n", row.outer_iter,
                  row.inner_iter, row.eta, row.beta, row.residual, row.objective);
    out << buf;
  }
}

}  // namespace leosat
