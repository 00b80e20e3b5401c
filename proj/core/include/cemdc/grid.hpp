#pragma once

#include <array>
#include <vector>

#include "cemdc/errors.hpp"

namespace cemdc {

/// Axis-aligned rectangular domain (unitless coordinates).
struct Domain {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

inline Domain unit_square() { return Domain{}; }

/// Nested structured grid pair: a coarse quadrilateral grid refined into a
/// fine one. Nodes and cells are numbered lexicographically, x fastest.
/// Vectors over both continua use the block layout
/// [continuum-0 nodes | continuum-1 nodes].
class GridHierarchy {
public:
  GridHierarchy(Domain domain, int n_coarse, int refinement_factor);

  /// Alternative constructor pinning the fine resolution directly;
  /// n_fine must be a multiple of n_coarse.
  static GridHierarchy with_fine(Domain domain, int n_coarse, int n_fine);

  const Domain& domain() const { return domain_; }
  int n_coarse() const { return n_coarse_; }
  int n_fine() const { return n_fine_; }
  int refinement() const { return n_fine_ / n_coarse_; }

  double hx() const { return domain_.width() / n_fine_; }
  double hy() const { return domain_.height() / n_fine_; }
  double Hx() const { return domain_.width() / n_coarse_; }
  double Hy() const { return domain_.height() / n_coarse_; }

  int nodes_per_axis() const { return n_fine_ + 1; }
  int n_nodes() const { return nodes_per_axis() * nodes_per_axis(); }
  int n_cells() const { return n_fine_ * n_fine_; }
  int n_coarse_elems() const { return n_coarse_ * n_coarse_; }
  int n_coarse_nodes() const { return (n_coarse_ + 1) * (n_coarse_ + 1); }
  int n_block_dofs() const { return 2 * n_nodes(); }

  int node_id(int i, int j) const { return j * nodes_per_axis() + i; }
  std::array<int, 2> node_ij(int node) const {
    return {node % nodes_per_axis(), node / nodes_per_axis()};
  }
  int cell_id(int i, int j) const { return j * n_fine_ + i; }
  std::array<int, 2> cell_ij(int cell) const { return {cell % n_fine_, cell / n_fine_}; }
  int coarse_elem_id(int I, int J) const { return J * n_coarse_ + I; }
  std::array<int, 2> coarse_elem_ij(int elem) const { return {elem % n_coarse_, elem / n_coarse_}; }

  double node_x(int i) const { return domain_.x0 + i * hx(); }
  double node_y(int j) const { return domain_.y0 + j * hy(); }

  /// Corner nodes of a fine cell, counterclockwise from the lower left.
  std::array<int, 4> cell_nodes(int cell) const {
    auto [i, j] = cell_ij(cell);
    return {node_id(i, j), node_id(i + 1, j), node_id(i + 1, j + 1), node_id(i, j + 1)};
  }

  /// Coarse element containing a fine cell.
  std::array<int, 2> coarse_of_cell(int cell) const {
    auto [i, j] = cell_ij(cell);
    return {i / refinement(), j / refinement()};
  }

  bool is_boundary_node(int node) const { return boundary_[node] != 0; }
  const std::vector<unsigned char>& boundary_mask() const { return boundary_; }

  /// Block dof of (continuum, node) in the two-continuum layout.
  int block_dof(int continuum, int node) const { return continuum * n_nodes() + node; }

private:
  Domain domain_;
  int n_coarse_ = 0;
  int n_fine_ = 0;
  std::vector<unsigned char> boundary_;
};

/// A coarse element K_j enlarged by m rings of coarse elements (Chebyshev
/// distance in coarse indices), clipped at the domain boundary. m = 0 is K_j
/// itself. Fine nodes and cells are listed in global lexicographic order.
struct Patch {
  int coarse_elem = -1;
  int layers = 0;
  // inclusive coarse-element index rectangle
  int I0 = 0, I1 = -1, J0 = 0, J1 = -1;
  // inclusive fine-node index rectangle
  int i0 = 0, i1 = -1, j0 = 0, j1 = -1;

  std::vector<int> nodes;           // all patch fine nodes (global ids)
  std::vector<int> interior_nodes;  // strictly inside the patch rectangle
  std::vector<int> boundary_nodes;  // on the patch rectangle boundary
  std::vector<int> cells;           // patch fine cells (global ids)

  int nodes_x() const { return i1 - i0 + 1; }
  int nodes_y() const { return j1 - j0 + 1; }
  int n_nodes() const { return nodes_x() * nodes_y(); }
  int n_block_dofs() const { return 2 * n_nodes(); }

  /// Local node index of a global fine node; the caller must pass a node
  /// inside the patch rectangle.
  int local_node(const GridHierarchy& hier, int global_node) const {
    auto [i, j] = hier.node_ij(global_node);
    return (j - j0) * nodes_x() + (i - i0);
  }
  int local_block_dof(const GridHierarchy& hier, int continuum, int global_node) const {
    return continuum * n_nodes() + local_node(hier, global_node);
  }
  bool contains_node(const GridHierarchy& hier, int global_node) const {
    auto [i, j] = hier.node_ij(global_node);
    return i >= i0 && i <= i1 && j >= j0 && j <= j1;
  }
  bool contains_coarse_elem(int I, int J) const {
    return I >= I0 && I <= I1 && J >= J0 && J <= J1;
  }
  bool is_whole_domain(const GridHierarchy& hier) const {
    return I0 == 0 && J0 == 0 && I1 == hier.n_coarse() - 1 && J1 == hier.n_coarse() - 1;
  }
};

/// Bilinear coarse-grid hats evaluated on the fine grid. chi sums to one at
/// every fine node; per fine cell the exact cell average of
/// sum_k |grad chi_k|^2 is stored (the weight entering kappa-tilde).
class PartitionOfUnity {
public:
  struct Hat {
    int coarse_node;
    std::vector<int> nodes;      // fine nodes in the support
    std::vector<double> values;  // chi at those nodes
  };

  explicit PartitionOfUnity(const GridHierarchy& hier);

  const std::vector<Hat>& hats() const { return hats_; }
  const std::vector<double>& grad_sq_cell() const { return grad_sq_cell_; }

  /// chi of a coarse node evaluated at an arbitrary point.
  double chi(int coarse_node, double x, double y) const;
  /// sum_k chi_k at a fine node (should be 1).
  double sum_at_node(int fine_node) const;
  /// Exact value of sum_k |d chi_k / d tangent|^2 on a fine edge between two
  /// adjacent fine nodes (constant along such an edge).
  double grad_sq_edge(int node_a, int node_b) const;

private:
  const GridHierarchy* hier_;
  std::vector<Hat> hats_;
  std::vector<double> grad_sq_cell_;
};

/// Builds the nested hierarchy; throws ConfigError for non-positive or
/// non-nesting sizes.
GridHierarchy build_hierarchy(Domain domain, int n_coarse, int refinement_factor);

/// Oversampled region K_{j,m}; throws ConfigError on invalid element or m.
Patch oversample(const GridHierarchy& hier, int coarse_elem, int layers);

PartitionOfUnity partition_of_unity(const GridHierarchy& hier);

}  // namespace cemdc
