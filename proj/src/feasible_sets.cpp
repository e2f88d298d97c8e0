#include "leosat/feasible_sets.hpp"

#include <limits>
#include <stdexcept>

namespace leosat {

Complex round_scalar_to_feasible(Complex v, const PhaseShifterSpec& spec) {
  if (spec.continuous()) {
    const double mag = std::abs(v);
    if (mag < 1e-12) return Complex(1.0, 0.0);
    return v / mag;
  }
  const int levels = spec.levels();
  int best_m = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int m = 0; m < levels; ++m) {
    const double d = std::norm(v - constellation_point(m, levels));
    if (d < best_d) {
      best_d = d;
      best_m = m;
    }
  }
  return constellation_point(best_m, levels);
}

int partial_block_size(int n_t, int m_rf) {
  if (m_rf < 1 || n_t % m_rf != 0) {
    throw std::invalid_argument("partially connected network requires m_rf to divide n_t");
  }
  return n_t / m_rf;
}

bool on_support(const PhaseShifterSpec& spec, int row, int col, int block_size) {
  if (spec.architecture != Architecture::PartiallyConnected) return true;
  return row / block_size == col;
}

CMat project_hull_matrix(const Eigen::Ref<const CMat>& v, const PhaseShifterSpec& spec) {
  const int rows = static_cast<int>(v.rows());
  const int cols = static_cast<int>(v.cols());
  CMat out = CMat::Zero(rows, cols);
  if (spec.architecture == Architecture::PartiallyConnected) {
    const int bs = partial_block_size(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = c * bs; r < (c + 1) * bs; ++r) out(r, c) = project_hull(v(r, c), spec);
    }
  } else {
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) out(r, c) = project_hull(v(r, c), spec);
    }
  }
  return out;
}

AnalogPrecoder round_to_feasible(const Eigen::Ref<const CMat>& v, const PhaseShifterSpec& spec) {
  const int rows = static_cast<int>(v.rows());
  const int cols = static_cast<int>(v.cols());
  AnalogPrecoder out{CMat::Zero(rows, cols), spec};
  if (spec.architecture == Architecture::PartiallyConnected) {
    const int bs = partial_block_size(rows, cols);
    for (int c = 0; c < cols; ++c) {
      for (int r = c * bs; r < (c + 1) * bs; ++r) out.v(r, c) = round_scalar_to_feasible(v(r, c), spec);
    }
  } else {
    for (int c = 0; c < cols; ++c) {
      for (int r = 0; r < rows; ++r) out.v(r, c) = round_scalar_to_feasible(v(r, c), spec);
    }
  }
  return out;
}

bool analog_is_feasible(const AnalogPrecoder& a, double tol) {
  const int rows = a.n_tx();
  const int cols = a.m_rf();
  const bool partial = a.spec.architecture == Architecture::PartiallyConnected;
  const int bs = partial ? partial_block_size(rows, cols) : 0;
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const Complex v = a.v(r, c);
      if (partial && r / bs != c) {
        if (v != Complex(0.0, 0.0)) return false;
        continue;
      }
      if (a.spec.continuous()) {
        if (std::abs(std::abs(v) - 1.0) > tol) return false;
      } else {
        const Complex nearest = round_scalar_to_feasible(v, a.spec);
        if (std::abs(v - nearest) > tol) return false;
      }
    }
  }
  return true;
}

AnalogPrecoder npp_analog_update(const Eigen::Ref<const CMat>& b_target,
                                 const Eigen::Ref<const CMat>& w, const PhaseShifterSpec& spec) {
  const int m_rf = static_cast<int>(w.rows());
  CMat gram = w * w.adjoint();  // m_rf x m_rf
  Eigen::SelfAdjointEigenSolver<CMat> eig(gram);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmin > 0.0) || lmax / lmin > 1e12) {
    gram += Complex(1e-10 * gram.real().trace(), 0.0) * CMat::Identity(m_rf, m_rf);
  }
  // Least-squares analog matrix B W^H (W W^H)^{-1}.
  const CMat ls = gram.ldlt().solve(w * b_target.adjoint()).adjoint();
  if (spec.architecture == Architecture::PartiallyConnected) {
    const int bs = partial_block_size(static_cast<int>(b_target.rows()), m_rf);
    CMat masked = CMat::Zero(ls.rows(), ls.cols());
    for (int c = 0; c < m_rf; ++c) masked.block(c * bs, c, bs, 1) = ls.block(c * bs, c, bs, 1);
    return round_to_feasible(masked, spec);
  }
  return round_to_feasible(ls, spec);
}

}  // namespace leosat
