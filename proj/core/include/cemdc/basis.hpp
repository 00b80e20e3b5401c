#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cemdc/assembly.hpp"
#include "cemdc/spectral.hpp"

namespace cemdc {

/// Which auxiliary functions the energy minimizer is constrained against.
/// `all_patch_elements` enforces the full phi-orthogonality (every auxiliary
/// function of every coarse element inside the patch); `selected_element_only`
/// is the narrower variational statement, kept for comparison.
enum class ConstraintScope { all_patch_elements, selected_element_only };

struct BasisOptions {
  ConstraintScope scope = ConstraintScope::all_patch_elements;
  double constraint_tolerance = 1e-8;  // max allowed constraint residual
  int threads = 1;
};

/// All localized basis functions of one coarse element: columns of `values`
/// are psi_{k,ms}^{(j)} over the patch's two-continuum local dofs (rows at
/// patch-boundary dofs are zero). `multipliers` holds the saddle-point
/// multiplier vectors, one column per k, over the constraint set listed in
/// `constraint_ids`.
struct ElementBasis {
  int elem = -1;
  int layers = 0;
  Patch patch;
  Eigen::MatrixXd values;
  Eigen::MatrixXd multipliers;
  std::vector<std::pair<int, int>> constraint_ids;  // (coarse element, k)

  int count() const { return static_cast<int>(values.cols()); }
};

/// The multiscale space: one localized basis block per coarse element, plus
/// the coarse-to-fine operator algebra (prolongation, restriction, Gram
/// matrices of local operators).
class CoarseSpace {
public:
  CoarseSpace(const GridHierarchy& hier, std::vector<ElementBasis> blocks);

  const GridHierarchy& hier() const { return *hier_; }
  int n_elements() const { return static_cast<int>(blocks_.size()); }
  const ElementBasis& block(int j) const { return blocks_[j]; }
  int offset(int j) const { return offsets_[j]; }
  int dim() const { return dim_; }

  /// Fine-grid field represented by coarse coefficients.
  BlockField prolongate(const Eigen::VectorXd& coarse) const;
  /// Psi^T v.
  Eigen::VectorXd restrict_to_coarse(const Eigen::VectorXd& fine) const;
  /// Psi^T Op Psi as a dense matrix; Op must be a fine-grid-local operator
  /// (nearest-neighbor stencil), which all assembled forms are.
  Eigen::MatrixXd gram(const SparseOperator& op, int threads = 1) const;
  /// One basis function as a global field.
  BlockField column(int j, int k) const;

private:
  const GridHierarchy* hier_;
  std::vector<ElementBasis> blocks_;
  std::vector<int> offsets_;
  int dim_ = 0;
};

/// The paper's oversampling rule m(H) = 9 log(1/H) / log(64), rounded half
/// down (reproduces the published pairings m(1/8)=4, m(1/16)=6, m(1/32)=7,
/// m(1/64)=9).
int oversampling_layers(double H);

/// All localized basis functions of element j on the m-layer patch: one
/// saddle-point factorization, one solve per k. Throws NumericalError naming
/// (j, m) if the system is singular or a constraint residual exceeds the
/// tolerance.
ElementBasis build_element_basis(const GridHierarchy& hier, const MediaField& media,
                                 const AuxiliarySpace& aux, int elem, int layers,
                                 const BasisOptions& opts = {});

/// Single localized basis function psi_{k,ms}^{(j)} expanded to global dofs,
/// with its multiplier vector.
std::pair<BlockField, Eigen::VectorXd> build_local_basis(const GridHierarchy& hier,
                                                         const MediaField& media,
                                                         const AuxiliarySpace& aux, int elem, int k,
                                                         int layers, const BasisOptions& opts = {});

/// Global (unlocalized) basis function psi_k^{(j)}; diagnostic use.
std::pair<BlockField, Eigen::VectorXd> build_global_basis(const GridHierarchy& hier,
                                                          const MediaField& media,
                                                          const AuxiliarySpace& aux, int elem, int k,
                                                          const BasisOptions& opts = {});

struct DecayRow {
  int layers;
  double diff_energy;  // || psi - psi_ms ||_{a_Q}^2
  double tail_energy;  // || psi ||_{a_Q}^2 outside K_{j,m}
};

/// Localization error and global-basis tail energy for increasing m.
std::vector<DecayRow> measure_decay(const GridHierarchy& hier, const MediaField& media,
                                    const AuxiliarySpace& aux, int elem, int k,
                                    const std::vector<int>& m_list, const BasisOptions& opts = {});

/// Builds every element's basis with a uniform layer count and assembles the
/// multiscale space. Elements whose patches coincide (e.g. when the patch
/// saturates to the whole domain) share one factorization.
CoarseSpace assemble_coarse_space(const GridHierarchy& hier, const MediaField& media,
                                  const AuxiliarySpace& aux, int layers,
                                  const BasisOptions& opts = {});

}  // namespace cemdc
