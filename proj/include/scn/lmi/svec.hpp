#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "scn/error.hpp"

namespace scn::lmi {

inline Eigen::Index svec_size(Eigen::Index n) { return n * (n + 1) / 2; }

// Position of entry (i, j), i >= j, in the column-wise lower-triangle ordering.
inline Eigen::Index svec_index(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  return j * n - j * (j - 1) / 2 + (i - j);
}

inline Eigen::Index smat_dim(Eigen::Index len) {
  const auto n = static_cast<Eigen::Index>(std::llround((std::sqrt(8.0 * len + 1.0) - 1.0) / 2.0));
  if (svec_size(n) != len) throw InvalidParameter("svec length is not triangular");
  return n;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> svec(
    const Eigen::MatrixBase<Derived>& S, double sym_tol = 1e-10) {
  using Scalar = typename Derived::Scalar;
  using std::abs;
  using std::sqrt;
  if (S.rows() != S.cols()) throw InvalidParameter("svec needs a square matrix");
  const Eigen::Index n = S.rows();
  const Scalar scale = std::max<Scalar>(Scalar(1), S.cwiseAbs().maxCoeff());
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(svec_size(n));
  const Scalar r2 = sqrt(Scalar(2));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    v(k++) = S(j, j);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      if (abs(S(i, j) - S(j, i)) > Scalar(sym_tol) * scale)
        throw InvalidParameter("svec input is not symmetric");
      v(k++) = r2 * Scalar(0.5) * (S(i, j) + S(j, i));
    }
  }
  return v;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> smat(
    const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = smat_dim(v.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> S(n, n);
  const Scalar inv_r2 = Scalar(1) / std::sqrt(Scalar(2));
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    S(j, j) = v(k++);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      S(i, j) = S(j, i) = v(k++) * inv_r2;
    }
  }
  return S;
}

}  // namespace scn::lmi
