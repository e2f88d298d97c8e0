#pragma once

#include <optional>
#include <string>
#include <vector>

#include "leosat/feasible_sets.hpp"
#include "leosat/types.hpp"

namespace leosat {

/// Penalty escalation schedule of the inexact MM method. The penalty starts
/// at eta0 and is multiplied by `growth` after `inner_budget` iterations or
/// when successive iterates are closer than `inner_tol`; the loop stops once
/// the penalty exceeds eta_upper.
struct MmSchedule {
  double eta0 = 0.01;
  double growth = 5.0;
  int inner_budget = 400;
  double inner_tol = 1e-5;
  double eta_upper = 200.0;

  void validate() const;
};

struct HybridPrecoder {
  AnalogPrecoder analog;
  CMat digital;  ///< m_rf x K

  CMat effective() const { return analog.v * digital; }
};

struct MmTraceRow {
  int outer_iter = 0;
  int inner_iter = 0;
  double eta = 0.0;
  double beta = 0.0;
  double residual = 0.0;   ///< ||B - VW||_F at the iterate
  double objective = 0.0;  ///< penalized objective F_eta at the iterate
};

struct MmTrace {
  std::vector<MmTraceRow> rows;
};

/// Diagnostics of one inexact-MM run.
struct MmRunStats {
  double beta_max = 0.0;
  double hull_violation_max = 0.0;  ///< worst distance of an iterate from the hull
  int iterations = 0;
  std::vector<double> f_trace;  ///< smooth objective at every accepted iterate
};

/// Extrapolation weights zeta_n = (alpha_{n-1} - 1) / alpha_n of the
/// accelerated step, alpha_n = (1 + sqrt(1 + 4 alpha_{n-1}^2)) / 2, alpha_{-1} = 0.
std::vector<double> apg_extrapolation_weights(int count);

/// Unconstrained least-squares digital stage W = (V^H V)^{-1} V^H B; a ridge
/// of 1e-10 * trace(V^H V) / M_t is added when the Gram matrix condition
/// exceeds 1e12. Normalization is deferred to the end of the alternation.
CMat ls_digital_step(const Eigen::Ref<const CMat>& b_target, const Eigen::Ref<const CMat>& v);

/// Analog stage of the fully connected factorization: inexact MM with a
/// single accelerated projected-gradient step per iteration on the penalized
/// objective ||B - VW||_F^2 - eta ||V||_F^2 over the element-wise hull, with
/// the escalation schedule `sched`. The result is rounded to the feasible
/// phase set, refined by coordinate sweeps, and never worse (in ||B - VW||_F)
/// than the rounded starting point.
AnalogPrecoder mm_analog_fully(const Eigen::Ref<const CMat>& b_target,
                               const Eigen::Ref<const CMat>& w, const PhaseShifterSpec& spec,
                               const MmSchedule& sched,
                               std::optional<CMat> v0 = std::nullopt,
                               MmRunStats* stats = nullptr, MmTrace* trace = nullptr,
                               int outer_iter = 0);

struct FactorizeResult {
  HybridPrecoder hp;
  std::vector<double> residual_trace;  ///< ||B - VW||_F per alternating iteration
  double residual = 0.0;               ///< final residual after normalization
  int outer_iterations = 0;
};

/// Alternating factorization for the fully connected architecture:
/// least-squares digital stage and inexact-MM analog stage until the relative
/// residual change drops below outer_tol, then W is scaled so that
/// ||VW||_F = ||B||_F.
FactorizeResult aim_adp(const Eigen::Ref<const CMat>& b_target, int m_rf,
                        const PhaseShifterSpec& spec, const MmSchedule& sched = {},
                        double outer_tol = 1e-4, int outer_cap = 50, MmTrace* trace = nullptr);

/// Closed-form digital stage of the partially connected factorization:
/// W = sqrt(beta) V^H B / ||V^H B||_F with beta = ||B||_F^2 M_t / N_t.
/// Requires a feasible block-diagonal V; throws on V^H B = 0.
CMat vp_digital_partial(const Eigen::Ref<const CMat>& b_target, const AnalogPrecoder& v);

/// Diagonal blocks D_i of C = B B^H over the per-subarray index ranges.
struct BlockDiagQuadratic {
  std::vector<CMat> blocks;
  int block_size = 0;

  int dim() const { return block_size * static_cast<int>(blocks.size()); }
  CMat assemble() const;
  CVec apply(const Eigen::Ref<const CVec>& r) const;
  double quad(const Eigen::Ref<const CVec>& r) const;  ///< r^H A r
  double op_norm() const;                              ///< max block spectral norm
};

BlockDiagQuadratic build_blockdiag_quadratic(const Eigen::Ref<const CMat>& b_target, int m_rf);

/// Maximizes r^H A r over per-entry feasible phases via the same inexact-MM
/// machinery on the hull (objective -r^H A r - delta ||r||^2), followed by
/// rounding and per-block coordinate refinement. Deterministic start from the
/// dominant-eigenvector phases of each block.
CVec mm_analog_partial(const BlockDiagQuadratic& a_mat, const PhaseShifterSpec& spec,
                       const MmSchedule& sched, MmRunStats* stats = nullptr,
                       MmTrace* trace = nullptr);

/// Stacks the per-block phase vector r into the block-diagonal analog matrix.
CMat assemble_partial_analog(const Eigen::Ref<const CVec>& r, int m_rf);

/// Two-step factorization for the partially connected architecture: one
/// analog stage on the block quadratic, then the closed-form digital stage.
FactorizeResult avpim_adp(const Eigen::Ref<const CMat>& b_target, int m_rf,
                          const PhaseShifterSpec& spec, const MmSchedule& sched = {},
                          MmTrace* trace = nullptr);

/// Nearest-point-projection baseline: the same alternation as aim_adp (or the
/// partially connected digital stage) but with the analog stage replaced by
/// rounding of the unconstrained least-squares analog matrix. The analog step
/// is only accepted when it does not increase the residual.
FactorizeResult npp_factorize(const Eigen::Ref<const CMat>& b_target, int m_rf,
                              const PhaseShifterSpec& spec, double outer_tol = 1e-4,
                              int outer_cap = 50);

/// Deterministic feasible starting analog matrix built from the phases of the
/// target's columns (cycled across RF chains, restricted to the support).
AnalogPrecoder initial_analog(const Eigen::Ref<const CMat>& b_target, int m_rf,
                              const PhaseShifterSpec& spec);

void write_mm_trace_csv(const MmTrace& trace, const std::string& path);

}  // namespace leosat
