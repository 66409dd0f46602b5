#pragma once

#include <Eigen/Dense>

#include "lsaboot/numkit.hpp"
#include "lsaboot/rng.hpp"

namespace lsaboot::testing {

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Vector gaussian_vector(Eigen::Index n, RngStream& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

/// Relative Frobenius distance |a - b| / |b|.
inline double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace lsaboot::testing
