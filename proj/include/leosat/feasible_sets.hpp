#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "leosat/power.hpp"
#include "leosat/types.hpp"

namespace leosat {

/// Phase-shift network description: connectivity plus phase resolution.
/// resolution_bits == 0 means continuous phases; otherwise L = 2^bits levels
/// at angles (2m+1) pi / L, m = 0..L-1.
struct PhaseShifterSpec {
  Architecture architecture = Architecture::FullyConnected;
  int resolution_bits = 0;

  bool continuous() const { return resolution_bits == 0; }
  int levels() const { return 1 << resolution_bits; }
};

/// m-th constellation point exp{j (2 pi m / L + pi / L)}.
template <typename Real = double>
std::complex<Real> constellation_point(int m, int levels) {
  const Real angle = std::numbers::pi_v<Real> * (2 * m + 1) / static_cast<Real>(levels);
  return std::polar(Real(1), angle);
}

/// Euclidean projection onto the closed unit disc.
template <typename Real>
std::complex<Real> project_hull_cps(std::complex<Real> v) {
  const Real mag = std::abs(v);
  return mag <= Real(1) ? v : v / mag;
}

/// Euclidean projection onto the convex hull of the L-point constellation
/// (the regular L-gon with vertices at angles (2m+1) pi / L). The sector is
/// chosen by the angle of v; within its sector the hull boundary is the
/// rotated vertical segment Re = cos(pi/L), |Im| <= sin(pi/L).
template <typename Real>
std::complex<Real> project_hull_dps(std::complex<Real> v, int levels) {
  const Real pi = std::numbers::pi_v<Real>;
  const Real step = Real(2) * pi / static_cast<Real>(levels);
  const Real m = std::floor((std::arg(v) + pi / levels) / step);
  const std::complex<Real> rot = std::polar(Real(1), -step * m);
  const std::complex<Real> vt = v * rot;
  const Real re = std::clamp(vt.real(), Real(0), std::cos(pi / levels));
  const Real im = std::clamp(vt.imag(), -std::sin(pi / levels), std::sin(pi / levels));
  return std::conj(rot) * std::complex<Real>(re, im);
}

/// Scalar hull projection for the given spec.
inline Complex project_hull(Complex v, const PhaseShifterSpec& spec) {
  return spec.continuous() ? project_hull_cps(v) : project_hull_dps(v, spec.levels());
}

/// Nearest feasible phase value: v/|v| for continuous (1 when |v| ~ 0), the
/// nearest constellation point otherwise. Equidistant ties take the smaller
/// constellation index.
Complex round_scalar_to_feasible(Complex v, const PhaseShifterSpec& spec);

/// Analog precoder with its structural spec. For the partially connected
/// architecture only the block-diagonal support holds nonzeros.
struct AnalogPrecoder {
  CMat v;
  PhaseShifterSpec spec;

  int n_tx() const { return static_cast<int>(v.rows()); }
  int m_rf() const { return static_cast<int>(v.cols()); }
};

/// Subarray size N_t / M_t of the partially connected network.
/// Requires m_rf to divide n_t.
int partial_block_size(int n_t, int m_rf);

/// True where the architecture allows a nonzero entry.
bool on_support(const PhaseShifterSpec& spec, int row, int col, int block_size);

/// Entrywise hull projection on the support; off-support entries are zeroed.
CMat project_hull_matrix(const Eigen::Ref<const CMat>& v, const PhaseShifterSpec& spec);

/// Entrywise rounding of the support onto the feasible phase set.
AnalogPrecoder round_to_feasible(const Eigen::Ref<const CMat>& v, const PhaseShifterSpec& spec);

/// Feasibility of an analog precoder against its spec, within tol per entry.
/// Checks unit modulus / constellation membership and, for the partially
/// connected case, that off-block entries are exactly zero.
bool analog_is_feasible(const AnalogPrecoder& a, double tol = 1e-9);

/// Nearest-point-projection analog update: the unconstrained least-squares
/// analog matrix B W^H (W W^H)^{-1}, restricted to the support and rounded
/// entrywise. A ridge of 1e-10 * trace is added when W W^H is ill-conditioned.
AnalogPrecoder npp_analog_update(const Eigen::Ref<const CMat>& b_target,
                                 const Eigen::Ref<const CMat>& w, const PhaseShifterSpec& spec);

}  // namespace leosat
