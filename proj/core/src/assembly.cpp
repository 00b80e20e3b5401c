#include "cemdc/assembly.hpp"

#include <array>
#include <cmath>
#include <fstream>

namespace cemdc {

namespace {

struct ElementMatrices {
  Eigen::Matrix4d stiffness;  // unit coefficient
  Eigen::Matrix4d mass;       // unit coefficient
};

// Q1 on an hx-by-hy rectangle, nodes counterclockwise from the lower left,
// 2x2 Gauss (exact for these integrands).
ElementMatrices reference_matrices(double hx, double hy) {
  ElementMatrices em;
  em.stiffness.setZero();
  em.mass.setZero();
  const double g = 1.0 / std::sqrt(3.0);
  const double gp[2] = {-g, g};
  const double detJ = hx * hy / 4.0;
  const double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  for (double xi : gp)
    for (double eta : gp) {
      double N[4], dNdx[4], dNdy[4];
      for (int a = 0; a < 4; ++a) {
        N[a] = 0.25 * (1.0 + sx[a] * xi) * (1.0 + sy[a] * eta);
        dNdx[a] = 0.25 * sx[a] * (1.0 + sy[a] * eta) * (2.0 / hx);
        dNdy[a] = 0.25 * sy[a] * (1.0 + sx[a] * xi) * (2.0 / hy);
      }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
          em.stiffness(a, b) += (dNdx[a] * dNdx[b] + dNdy[a] * dNdy[b]) * detJ;
          em.mass(a, b) += N[a] * N[b] * detJ;
        }
    }
  return em;
}

// Maps (continuum, global node) to a dof index, globally or patch-locally.
struct Indexer {
  const GridHierarchy* hier;
  const Patch* patch;

  int nodes_per_continuum() const { return patch ? patch->n_nodes() : hier->n_nodes(); }
  int n_dofs() const { return 2 * nodes_per_continuum(); }
  int dof(int continuum, int global_node) const {
    return patch ? patch->local_block_dof(*hier, continuum, global_node)
                 : hier->block_dof(continuum, global_node);
  }
  DofSetInfo info() const {
    DofSetInfo d;
    d.kind = patch ? DofSetInfo::Kind::patch : DofSetInfo::Kind::global;
    d.nodes_per_continuum = nodes_per_continuum();
    if (patch) {
      d.patch_elem = patch->coarse_elem;
      d.patch_layers = patch->layers;
    }
    return d;
  }
};

const std::vector<int>& cell_range(const GridHierarchy& hier, const Patch* patch,
                                   std::vector<int>& scratch) {
  if (patch) return patch->cells;
  scratch.resize(static_cast<size_t>(hier.n_cells()));
  for (int c = 0; c < hier.n_cells(); ++c) scratch[c] = c;
  return scratch;
}

bool edge_in_patch(const GridHierarchy& hier, const Patch* patch, int na, int nb) {
  if (!patch) return true;
  return patch->contains_node(hier, na) && patch->contains_node(hier, nb);
}

double edge_length(const GridHierarchy& hier, int na, int nb) {
  auto [ia, ja] = hier.node_ij(na);
  auto [ib, jb] = hier.node_ij(nb);
  return (ja == jb) ? hier.hx() * std::abs(ia - ib) : hier.hy() * std::abs(ja - jb);
}

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_cell_block(Triplets& trips, const Indexer& ix, int continuum, const std::array<int, 4>& nodes,
                    const Eigen::Matrix4d& local, double scale) {
  for (int a = 0; a < 4; ++a) {
    const int ra = ix.dof(continuum, nodes[a]);
    for (int b = 0; b < 4; ++b)
      trips.emplace_back(ra, ix.dof(continuum, nodes[b]), scale * local(a, b));
  }
}

void add_edge_block(Triplets& trips, const Indexer& ix, int continuum, int na, int nb,
                    const Eigen::Matrix2d& local, double scale) {
  const int d[2] = {ix.dof(continuum, na), ix.dof(continuum, nb)};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) trips.emplace_back(d[a], d[b], scale * local(a, b));
}

SparseOperator build(const Indexer& ix, Triplets& trips) {
  SparseOperator op;
  op.dofs = ix.info();
  op.matrix.resize(ix.n_dofs(), ix.n_dofs());
  op.matrix.setFromTriplets(trips.begin(), trips.end());
  return op;
}

}  // namespace

SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
  if (a.size() != b.size()) throw ConfigError("operator+: dof-set size mismatch");
  SparseOperator r;
  r.matrix = a.matrix + b.matrix;
  r.dofs = a.dofs;
  r.symmetric = a.symmetric && b.symmetric;
  return r;
}

SparseOperator assemble_stiffness(const GridHierarchy& hier, const MediaField& media, int continuum,
                                  const Patch* patch) {
  media.check_compatible(hier);
  const Indexer ix{&hier, patch};
  const ElementMatrices em = reference_matrices(hier.hx(), hier.hy());
  std::vector<int> scratch;
  const auto& cells = cell_range(hier, patch, scratch);

  Triplets trips;
  trips.reserve(cells.size() * 16 + 16);
  for (int cell : cells)
    add_cell_block(trips, ix, continuum, hier.cell_nodes(cell), em.stiffness,
                   media.kappa(continuum, cell));

  Eigen::Matrix2d edge_stiff;
  for (const auto& frac : media.fractures())
    for (size_t k = 0; k + 1 < frac.nodes.size(); ++k) {
      const int na = frac.nodes[k], nb = frac.nodes[k + 1];
      if (!edge_in_patch(hier, patch, na, nb)) continue;
      const double len = edge_length(hier, na, nb);
      edge_stiff << 1.0, -1.0, -1.0, 1.0;
      add_edge_block(trips, ix, continuum, na, nb, edge_stiff,
                     frac.aperture * frac.kappa[continuum] / len);
    }
  return build(ix, trips);
}

SparseOperator assemble_exchange(const GridHierarchy& hier, const MediaField& media,
                                 const Patch* patch) {
  media.check_compatible(hier);
  const Indexer ix{&hier, patch};
  const ElementMatrices em = reference_matrices(hier.hx(), hier.hy());
  std::vector<int> scratch;
  const auto& cells = cell_range(hier, patch, scratch);
  const double rs = media.rho() * media.sigma();

  Triplets trips;
  trips.reserve(cells.size() * 64);
  for (int cell : cells) {
    const auto nodes = hier.cell_nodes(cell);
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        const double m = rs * em.mass(a, b);
        for (int c = 0; c < 2; ++c) {
          trips.emplace_back(ix.dof(c, nodes[a]), ix.dof(c, nodes[b]), m);
          trips.emplace_back(ix.dof(c, nodes[a]), ix.dof(1 - c, nodes[b]), -m);
        }
      }
  }
  return build(ix, trips);
}

SparseOperator assemble_weighted_mass_s(const GridHierarchy& hier, const MediaField& media,
                                        const PartitionOfUnity& pou, const Patch* patch) {
  media.check_compatible(hier);
  const Indexer ix{&hier, patch};
  const ElementMatrices em = reference_matrices(hier.hx(), hier.hy());
  std::vector<int> scratch;
  const auto& cells = cell_range(hier, patch, scratch);
  const auto& gss = pou.grad_sq_cell();

  Triplets trips;
  trips.reserve(cells.size() * 32 + 16);
  for (int cell : cells)
    for (int c = 0; c < 2; ++c)
      add_cell_block(trips, ix, c, hier.cell_nodes(cell), em.mass, media.kappa(c, cell) * gss[cell]);

  Eigen::Matrix2d edge_mass;
  for (const auto& frac : media.fractures())
    for (size_t k = 0; k + 1 < frac.nodes.size(); ++k) {
      const int na = frac.nodes[k], nb = frac.nodes[k + 1];
      if (!edge_in_patch(hier, patch, na, nb)) continue;
      const double len = edge_length(hier, na, nb);
      edge_mass << 2.0, 1.0, 1.0, 2.0;
      edge_mass *= len / 6.0;
      const double w = pou.grad_sq_edge(na, nb);
      for (int c = 0; c < 2; ++c)
        add_edge_block(trips, ix, c, na, nb, edge_mass, frac.aperture * frac.kappa[c] * w);
    }
  return build(ix, trips);
}

SparseOperator assemble_capacity(const GridHierarchy& hier, const MediaField& media,
                                 const Patch* patch) {
  media.check_compatible(hier);
  const Indexer ix{&hier, patch};
  const ElementMatrices em = reference_matrices(hier.hx(), hier.hy());
  std::vector<int> scratch;
  const auto& cells = cell_range(hier, patch, scratch);

  Triplets trips;
  trips.reserve(cells.size() * 32 + 16);
  for (int cell : cells)
    for (int c = 0; c < 2; ++c)
      add_cell_block(trips, ix, c, hier.cell_nodes(cell), em.mass, media.capacity(c, cell));

  Eigen::Matrix2d edge_mass;
  for (const auto& frac : media.fractures())
    for (size_t k = 0; k + 1 < frac.nodes.size(); ++k) {
      const int na = frac.nodes[k], nb = frac.nodes[k + 1];
      if (!edge_in_patch(hier, patch, na, nb)) continue;
      const double len = edge_length(hier, na, nb);
      edge_mass << 2.0, 1.0, 1.0, 2.0;
      edge_mass *= len / 6.0;
      for (int c = 0; c < 2; ++c)
        add_edge_block(trips, ix, c, na, nb, edge_mass, frac.aperture * frac.capacity[c]);
    }
  return build(ix, trips);
}

SparseOperator assemble_mass(const GridHierarchy& hier, const Patch* patch) {
  const Indexer ix{&hier, patch};
  const ElementMatrices em = reference_matrices(hier.hx(), hier.hy());
  std::vector<int> scratch;
  const auto& cells = cell_range(hier, patch, scratch);
  Triplets trips;
  trips.reserve(cells.size() * 32);
  for (int cell : cells)
    for (int c = 0; c < 2; ++c) add_cell_block(trips, ix, c, hier.cell_nodes(cell), em.mass, 1.0);
  return build(ix, trips);
}

SparseOperator assemble_a_q(const GridHierarchy& hier, const MediaField& media, const Patch* patch) {
  SparseOperator op = assemble_stiffness(hier, media, 0, patch) +
                      assemble_stiffness(hier, media, 1, patch);
  if (media.sigma() != 0.0) op = op + assemble_exchange(hier, media, patch);
  return op;
}

BlockField assemble_load(const GridHierarchy& hier, const ScalarFunction& f1, const ScalarFunction& f2,
                         double rho) {
  BlockField b = BlockField::zero(hier.n_nodes());
  const double g = 1.0 / std::sqrt(3.0);
  const double gp[2] = {-g, g};
  const double detJ = hier.hx() * hier.hy() / 4.0;
  const double sx[4] = {-1.0, 1.0, 1.0, -1.0};
  const double sy[4] = {-1.0, -1.0, 1.0, 1.0};
  const ScalarFunction* fs[2] = {&f1, &f2};
  for (int cell = 0; cell < hier.n_cells(); ++cell) {
    const auto nodes = hier.cell_nodes(cell);
    auto [ci, cj] = hier.cell_ij(cell);
    const double xc = hier.node_x(ci) + 0.5 * hier.hx();
    const double yc = hier.node_y(cj) + 0.5 * hier.hy();
    for (double xi : gp)
      for (double eta : gp) {
        const double x = xc + 0.5 * hier.hx() * xi;
        const double y = yc + 0.5 * hier.hy() * eta;
        for (int c = 0; c < 2; ++c) {
          const double fv = (*fs[c])(x, y);
          if (fv == 0.0) continue;
          for (int a = 0; a < 4; ++a) {
            const double N = 0.25 * (1.0 + sx[a] * xi) * (1.0 + sy[a] * eta);
            b(c, nodes[a]) += rho * fv * N * detJ;
          }
        }
      }
  }
  return b;
}

std::vector<unsigned char> global_dirichlet_mask(const GridHierarchy& hier) {
  std::vector<unsigned char> mask(static_cast<size_t>(hier.n_block_dofs()), 0);
  for (int n = 0; n < hier.n_nodes(); ++n)
    if (hier.is_boundary_node(n)) mask[hier.block_dof(0, n)] = mask[hier.block_dof(1, n)] = 1;
  return mask;
}

std::vector<unsigned char> patch_dirichlet_mask(const GridHierarchy& hier, const Patch& patch) {
  std::vector<unsigned char> mask(static_cast<size_t>(patch.n_block_dofs()), 0);
  for (int node : patch.boundary_nodes) {
    mask[patch.local_block_dof(hier, 0, node)] = 1;
    mask[patch.local_block_dof(hier, 1, node)] = 1;
  }
  return mask;
}

void apply_dirichlet(SparseOperator& op, const std::vector<unsigned char>& mask) {
  if (static_cast<int>(mask.size()) != op.size())
    throw ConfigError("apply_dirichlet: mask size does not match operator");
  for (int outer = 0; outer < op.matrix.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, outer); it; ++it)
      if (mask[it.row()] || mask[it.col()]) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
  for (int d = 0; d < op.size(); ++d)
    if (mask[d]) op.matrix.coeffRef(d, d) = 1.0;
}

void apply_dirichlet(BlockField& field, const std::vector<unsigned char>& mask) {
  if (static_cast<int>(mask.size()) != field.size())
    throw ConfigError("apply_dirichlet: mask size does not match field");
  for (int d = 0; d < field.size(); ++d)
    if (mask[d]) field.values[d] = 0.0;
}

void export_operator_coordinate(const SparseOperator& op, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  char buf[64];
  for (int outer = 0; outer < op.matrix.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, outer); it; ++it) {
      std::snprintf(buf, sizeof buf, "%ld %ld %.17g\n", static_cast<long>(it.row()),
                    static_cast<long>(it.col()), it.value());
      os << buf;
    }
  if (!os) throw IoError("write to '" + path + "' failed");
}

}  // namespace cemdc
