#pragma once

#include <Eigen/Core>
#include <vector>

#include "cemdc/assembly.hpp"
#include "cemdc/grid.hpp"
#include "cemdc/media.hpp"

namespace cemdc {

/// Eigenpairs of the local pencil a_Q^(j) vs s^(j) on one coarse element.
/// `vectors` has one column per retained eigenfunction over the element's
/// two-continuum local dofs; rows at constrained (domain-boundary) dofs are
/// zero. `s_vectors` = S^(j) * vectors are the rows used as orthogonality
/// constraints by the basis construction.
struct ElementSpectrum {
  int elem = -1;
  Patch cell_patch;            // the m = 0 patch, K_j
  Eigen::VectorXd eigenvalues; // ascending; length >= count + 1 when available
  Eigen::MatrixXd vectors;     // (2 * n_loc) x count, s-orthonormal, sign-fixed
  Eigen::MatrixXd s_vectors;   // (2 * n_loc) x count
  int count = 0;               // L_j
};

class AuxiliarySpace {
public:
  AuxiliarySpace(const GridHierarchy& hier, std::vector<ElementSpectrum> elements);

  const GridHierarchy& hier() const { return *hier_; }
  int n_elements() const { return static_cast<int>(elements_.size()); }
  const ElementSpectrum& element(int j) const { return elements_[j]; }
  int count(int j) const { return elements_[j].count; }
  int offset(int j) const { return offsets_[j]; }
  int total_dim() const { return total_dim_; }

  /// Lambda = min_j lambda_{L_j + 1}: the smallest discarded eigenvalue.
  double lambda_min_discarded() const { return lambda_min_discarded_; }
  /// Largest retained eigenvalue over all elements.
  double lambda_max_kept() const { return lambda_max_kept_; }

  /// The projection pi: coefficients of sum_j pi_j(v) for a global field v,
  /// element-major. The auxiliary space is broken (element-wise), so the
  /// coefficient vector is its faithful discrete carrier; with s-orthonormal
  /// eigenfunctions the projection denominators are one and pi is the
  /// identity on coefficient data.
  Eigen::VectorXd project(const Eigen::VectorXd& global_field) const;
  /// Nodal rendering of auxiliary coefficients (scatter-add across shared
  /// element edges); visualization and diagnostics only, since broken
  /// functions have no unique nodal representative.
  BlockField expand(const Eigen::VectorXd& aux_coeffs) const;
  /// Rows are the global s-products against every auxiliary function:
  /// project(v) == constraint_matrix() * v. The kernel of this matrix is the
  /// discrete V-tilde.
  Eigen::SparseMatrix<double> constraint_matrix() const;

  /// A copy retaining only the first L eigenfunctions per element (L must
  /// not exceed any element's retained count). Eigenvalue tails are kept so
  /// the Lambda diagnostic stays meaningful.
  AuxiliarySpace with_count(int L) const;

private:
  const GridHierarchy* hier_;
  std::vector<ElementSpectrum> elements_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
  double lambda_min_discarded_ = 0.0;
  double lambda_max_kept_ = 0.0;
};

/// Smallest `count` eigenpairs of (A_Q^(j), S^(j)) on V(K_j): no constraint
/// on the element boundary interior to the domain; dofs on the global
/// boundary are constrained to zero unless `constrain_global_boundary` is
/// false (diagnostic use). Eigenvectors are s-orthonormal with the sign of
/// the first nonzero component positive.
ElementSpectrum local_eigensolve(const GridHierarchy& hier, const MediaField& media,
                                 const PartitionOfUnity& pou, int coarse_elem, int count,
                                 bool constrain_global_boundary = true);

/// Auxiliary spaces for every coarse element, keeping L eigenfunctions per
/// element (uniform or per-element) plus `extra` trailing eigenvalues for
/// diagnostics. Element solves run on `threads` workers; the result is
/// schedule-independent.
AuxiliarySpace build_auxiliary_space(const GridHierarchy& hier, const MediaField& media,
                                     const PartitionOfUnity& pou, int L, int extra = 1,
                                     int threads = 1);
AuxiliarySpace build_auxiliary_space(const GridHierarchy& hier, const MediaField& media,
                                     const PartitionOfUnity& pou, const std::vector<int>& L_per_elem,
                                     int extra = 1, int threads = 1);

}  // namespace cemdc
