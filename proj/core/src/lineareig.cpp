#include "cemdc/lineareig.hpp"

#include <lapacke.h>

#include "cemdc/errors.hpp"

namespace cemdc {

void generalized_symmetric_eigen(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::VectorXd& eigenvalues,
                                 Eigen::MatrixXd& eigenvectors, const std::string& context) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n || B.rows() != n || B.cols() != n)
    throw NumericalError("eigensolve (" + context + "): non-square or mismatched pencil");
  eigenvalues.resize(n);
  const int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, A.data(), n, B.data(), n,
                                  eigenvalues.data());
  if (info != 0) {
    if (info > n)
      throw NumericalError("eigensolve (" + context + "): weighted mass matrix is not positive definite"
                           " (leading minor " + std::to_string(info - n) + ")");
    throw NumericalError("eigensolve (" + context + "): LAPACK dsygvd failed with info=" +
                         std::to_string(info));
  }
  eigenvectors = std::move(A);  // dsygvd overwrites A with B-orthonormal eigenvectors
}

}  // namespace cemdc
