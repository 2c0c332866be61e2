#pragma once

#include <Eigen/Dense>
#include <lapacke.h>

#include "ptlab/common.hpp"

namespace ptlab {

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending, eigenvectors
/// in columns.
struct Eigensystem {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;

  Eigen::Index size() const { return values.size(); }
};

/// Dense symmetric eigendecomposition (LAPACK divide and conquer). Consumes
/// the matrix to avoid a copy of large inputs.
inline Eigensystem symmetric_eigensystem(Eigen::MatrixXd matrix) {
  require(matrix.rows() == matrix.cols(), "symmetric_eigensystem: matrix must be square");
  const auto n = static_cast<lapack_int>(matrix.rows());
  Eigensystem out;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, matrix.data(), n, out.values.data());
  require(info == 0, "symmetric_eigensystem: LAPACK dsyevd failed");
  out.vectors = std::move(matrix);
  return out;
}

inline Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd matrix) {
  require(matrix.rows() == matrix.cols(), "symmetric_eigenvalues: matrix must be square");
  const auto n = static_cast<lapack_int>(matrix.rows());
  Eigen::VectorXd values(n);
  if (n == 0) return values;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, matrix.data(), n, values.data());
  require(info == 0, "symmetric_eigenvalues: LAPACK dsyevd failed");
  return values;
}

}  // namespace ptlab
