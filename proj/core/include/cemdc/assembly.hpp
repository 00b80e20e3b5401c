#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <optional>
#include <string>

#include "cemdc/grid.hpp"
#include "cemdc/media.hpp"

namespace cemdc {

/// Two-continuum nodal field in the block layout
/// [continuum-0 nodes | continuum-1 nodes].
struct BlockField {
  Eigen::VectorXd values;
  int nodes_per_continuum = 0;

  static BlockField zero(int nodes_per_continuum) {
    BlockField f;
    f.nodes_per_continuum = nodes_per_continuum;
    f.values = Eigen::VectorXd::Zero(2 * nodes_per_continuum);
    return f;
  }
  double& operator()(int continuum, int node) { return values[continuum * nodes_per_continuum + node]; }
  double operator()(int continuum, int node) const {
    return values[continuum * nodes_per_continuum + node];
  }
  Eigen::VectorBlock<Eigen::VectorXd> continuum(int c) {
    return values.segment(c * nodes_per_continuum, nodes_per_continuum);
  }
  int size() const { return static_cast<int>(values.size()); }
};

/// Descriptor of the dof set an operator lives on.
struct DofSetInfo {
  enum class Kind { global, patch } kind = Kind::global;
  int nodes_per_continuum = 0;
  int patch_elem = -1;  // coarse element id when kind == patch
  int patch_layers = 0;
};

/// Square sparse symmetric operator over a two-continuum dof set.
struct SparseOperator {
  Eigen::SparseMatrix<double> matrix;
  DofSetInfo dofs;
  bool symmetric = true;

  int size() const { return static_cast<int>(matrix.rows()); }
  double quadratic_form(const Eigen::VectorXd& v) const { return v.dot(matrix * v); }
  double bilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return u.dot(matrix * v);
  }
};

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b);

/// Per-continuum source; evaluated pointwise during load assembly.
using ScalarFunction = std::function<double(double, double)>;

/// Stiffness of continuum `continuum`: integral of kappa_i grad p . grad v
/// over the (patch) cells, plus aperture-scaled 1-D terms along fracture
/// edges. Returned on the full block layout with only block (i,i) filled.
SparseOperator assemble_stiffness(const GridHierarchy& hier, const MediaField& media, int continuum,
                                  const Patch* patch = nullptr);

/// Exchange operator rho*sigma*[M, -M; -M, M] with M the Q1 mass matrix.
SparseOperator assemble_exchange(const GridHierarchy& hier, const MediaField& media,
                                 const Patch* patch = nullptr);

/// Weighted mass for the spectral problem, both continua: cell weight
/// kappa-tilde = kappa * (cellwise sum_k |grad chi_k|^2); fracture edges use
/// the tangential hat gradients.
SparseOperator assemble_weighted_mass_s(const GridHierarchy& hier, const MediaField& media,
                                        const PartitionOfUnity& pou, const Patch* patch = nullptr);

/// Block-diagonal capacity mass (weights c_i).
SparseOperator assemble_capacity(const GridHierarchy& hier, const MediaField& media,
                                 const Patch* patch = nullptr);

/// Plain block-diagonal mass (unweighted), the discrete [L2]^2 product.
SparseOperator assemble_mass(const GridHierarchy& hier, const Patch* patch = nullptr);

/// a + q in one pass.
SparseOperator assemble_a_q(const GridHierarchy& hier, const MediaField& media,
                            const Patch* patch = nullptr);

/// Load vector with entries (rho f_i, hat) by 2x2 Gauss per cell.
BlockField assemble_load(const GridHierarchy& hier, const ScalarFunction& f1, const ScalarFunction& f2,
                         double rho);

/// Dirichlet masks over block dofs.
std::vector<unsigned char> global_dirichlet_mask(const GridHierarchy& hier);
/// Patch-boundary nodes (which include any part of the domain boundary the
/// patch touches), both continua.
std::vector<unsigned char> patch_dirichlet_mask(const GridHierarchy& hier, const Patch& patch);

/// Symmetric elimination: constrained rows/cols zeroed, unit diagonal.
/// Idempotent.
void apply_dirichlet(SparseOperator& op, const std::vector<unsigned char>& mask);
void apply_dirichlet(BlockField& field, const std::vector<unsigned char>& mask);

/// Coordinate-format (row col value) text export, one entry per line.
void export_operator_coordinate(const SparseOperator& op, const std::string& path);

}  // namespace cemdc
