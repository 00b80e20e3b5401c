#pragma once

#include <Eigen/Core>
#include <string>

namespace cemdc {

/// Dense generalized symmetric-definite eigensolve A x = lambda B x (B SPD).
/// All eigenvalues in ascending order; eigenvectors B-orthonormal
/// (X^T B X = I). Throws NumericalError (tagged with `context`) on breakdown,
/// in particular when B is not positive definite.
void generalized_symmetric_eigen(Eigen::MatrixXd A, Eigen::MatrixXd B, Eigen::VectorXd& eigenvalues,
                                 Eigen::MatrixXd& eigenvectors, const std::string& context);

}  // namespace cemdc
