#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace leosat {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using CMat = Mat<Complex>;
using CVec = Vec<Complex>;
using RMat = Mat<double>;
using RVec = Vec<double>;

/// Squared Frobenius norm, spelled out for readability at call sites.
inline double fro2(const Eigen::Ref<const CMat>& m) { return m.squaredNorm(); }

/// Real inner product <A, B> = Re Tr{A^H B} on complex matrices.
inline double rip(const Eigen::Ref<const CMat>& a, const Eigen::Ref<const CMat>& b) {
  return a.cwiseProduct(b.conjugate()).real().sum();
}

}  // namespace leosat
