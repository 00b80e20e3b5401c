#include "cemdc/basis.hpp"

#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>

#include "cemdc/parallel.hpp"

namespace cemdc {

int oversampling_layers(double H) {
  const double v = 9.0 * std::log(1.0 / H) / std::log(64.0);
  return std::max(1, static_cast<int>(std::ceil(v - 0.5)));
}

namespace {

// Factorized saddle-point system [A_Q B^T; B 0] on one patch. The constraint
// rows are the s-products against the auxiliary functions of every coarse
// element inside the patch (or of one element under the narrow scope).
struct PatchSaddle {
  Patch patch;
  std::vector<int> free_dofs;               // patch-local block dofs kept
  std::vector<int> to_free;                 // patch-local block dof -> free index (-1 constrained)
  std::vector<std::pair<int, int>> constraint_ids;
  Eigen::SparseMatrix<double> system;
  std::unique_ptr<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>> lu;

  int n_free() const { return static_cast<int>(free_dofs.size()); }
  int n_constraints() const { return static_cast<int>(constraint_ids.size()); }
  int constraint_row(int elem, int k) const {
    for (size_t r = 0; r < constraint_ids.size(); ++r)
      if (constraint_ids[r].first == elem && constraint_ids[r].second == k) return static_cast<int>(r);
    return -1;
  }
};

std::unique_ptr<PatchSaddle> factor_patch(const GridHierarchy& hier, const MediaField& media,
                                          const AuxiliarySpace& aux, int elem, int layers,
                                          const BasisOptions& opts) {
  auto ps = std::make_unique<PatchSaddle>();
  ps->patch = oversample(hier, elem, layers);
  const Patch& patch = ps->patch;
  const int n_loc = patch.n_nodes();

  SparseOperator aq = assemble_a_q(hier, media, &patch);

  ps->to_free.assign(2 * n_loc, -1);
  for (int c = 0; c < 2; ++c)
    for (int node : patch.interior_nodes) {
      const int ld = patch.local_block_dof(hier, c, node);
      ps->to_free[ld] = static_cast<int>(ps->free_dofs.size());
      ps->free_dofs.push_back(ld);
    }

  // constraint set: all auxiliary functions of coarse elements inside the patch
  for (int J = patch.J0; J <= patch.J1; ++J)
    for (int I = patch.I0; I <= patch.I1; ++I) {
      const int jp = hier.coarse_elem_id(I, J);
      if (opts.scope == ConstraintScope::selected_element_only && jp != elem) continue;
      for (int k = 0; k < aux.count(jp); ++k) ps->constraint_ids.push_back({jp, k});
    }

  const int nf = ps->n_free();
  const int nc = ps->n_constraints();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(aq.matrix.nonZeros()) + 4 * static_cast<size_t>(nc) * 64);
  for (int outer = 0; outer < aq.matrix.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(aq.matrix, outer); it; ++it) {
      const int r = ps->to_free[it.row()], c = ps->to_free[it.col()];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  for (int row = 0; row < nc; ++row) {
    const auto [jp, k] = ps->constraint_ids[row];
    const ElementSpectrum& es = aux.element(jp);
    const int n_elem_nodes = es.cell_patch.n_nodes();
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_elem_nodes; ++l) {
        const double v = es.s_vectors(c * n_elem_nodes + l, k);
        if (v == 0.0) continue;
        const int ld = patch.local_block_dof(hier, c, es.cell_patch.nodes[l]);
        const int fd = ps->to_free[ld];
        if (fd < 0) continue;  // zero-trace dof
        trips.emplace_back(nf + row, fd, v);
        trips.emplace_back(fd, nf + row, v);
      }
  }
  ps->system.resize(nf + nc, nf + nc);
  ps->system.setFromTriplets(trips.begin(), trips.end());
  ps->lu = std::make_unique<Eigen::UmfPackLU<Eigen::SparseMatrix<double>>>();
  ps->lu->compute(ps->system);
  if (ps->lu->info() != Eigen::Success) {
    std::ostringstream os;
    os << "basis: saddle factorization failed on element " << elem << " with m=" << layers
       << " (constraint rank deficiency or breakdown)";
    throw NumericalError(os.str());
  }
  return ps;
}

// Solves for psi_{k,ms}^{(elem)}; returns values over all patch-local block
// dofs (zeros on the patch boundary) and the multiplier vector.
void solve_basis(const PatchSaddle& ps, int elem, int k, double tol, Eigen::VectorXd& psi_patch,
                 Eigen::VectorXd& mu) {
  const int nf = ps.n_free();
  const int nc = ps.n_constraints();
  const int row = ps.constraint_row(elem, k);
  if (row < 0) throw ConfigError("basis: constraint row for requested (element, k) not present");
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf + nc);
  rhs[nf + row] = 1.0;
  const Eigen::VectorXd sol = ps.lu->solve(rhs);
  if (ps.lu->info() != Eigen::Success || !sol.allFinite()) {
    std::ostringstream os;
    os << "basis: saddle solve failed for element " << elem << ", k=" << k << ", m=" << ps.patch.layers;
    throw NumericalError(os.str());
  }
  // constraint residual: B psi must equal the selected unit vector
  double resid = 0.0;
  {
    const Eigen::VectorXd full = ps.system * sol;
    for (int r = 0; r < nc; ++r) resid = std::max(resid, std::abs(full[nf + r] - rhs[nf + r]));
  }
  if (resid > tol) {
    std::ostringstream os;
    os << "basis: constraint residual " << resid << " exceeds " << tol << " for element " << elem
       << ", k=" << k << ", m=" << ps.patch.layers;
    throw NumericalError(os.str());
  }
  psi_patch = Eigen::VectorXd::Zero(2 * ps.patch.n_nodes());
  for (int f = 0; f < nf; ++f) psi_patch[ps.free_dofs[f]] = sol[f];
  mu = sol.segment(nf, nc);
}

BlockField expand_patch_field(const GridHierarchy& hier, const Patch& patch,
                              const Eigen::VectorXd& local) {
  BlockField out = BlockField::zero(hier.n_nodes());
  const int n_loc = patch.n_nodes();
  for (int c = 0; c < 2; ++c)
    for (int l = 0; l < n_loc; ++l) out(c, patch.nodes[l]) = local[c * n_loc + l];
  return out;
}

// a_Q quadratic form of a global field over a set of coarse elements (sum of
// the element-local forms).
double aq_energy_on_elements(const GridHierarchy& hier, const MediaField& media,
                             const std::vector<int>& elems, const BlockField& field) {
  double total = 0.0;
  for (int j : elems) {
    Patch kp = oversample(hier, j, 0);
    SparseOperator aq = assemble_a_q(hier, media, &kp);
    const int n_loc = kp.n_nodes();
    Eigen::VectorXd local(2 * n_loc);
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) local[c * n_loc + l] = field(c, kp.nodes[l]);
    total += local.dot(aq.matrix * local);
  }
  return total;
}

}  // namespace

ElementBasis build_element_basis(const GridHierarchy& hier, const MediaField& media,
                                 const AuxiliarySpace& aux, int elem, int layers,
                                 const BasisOptions& opts) {
  if (layers < 1) throw ConfigError("basis: oversampling layers must be >= 1");
  auto ps = factor_patch(hier, media, aux, elem, layers, opts);
  ElementBasis eb;
  eb.elem = elem;
  eb.layers = layers;
  eb.patch = ps->patch;
  eb.constraint_ids = ps->constraint_ids;
  const int L = aux.count(elem);
  eb.values.resize(2 * ps->patch.n_nodes(), L);
  eb.multipliers.resize(ps->n_constraints(), L);
  Eigen::VectorXd psi, mu;
  for (int k = 0; k < L; ++k) {
    solve_basis(*ps, elem, k, opts.constraint_tolerance, psi, mu);
    eb.values.col(k) = psi;
    eb.multipliers.col(k) = mu;
  }
  return eb;
}

std::pair<BlockField, Eigen::VectorXd> build_local_basis(const GridHierarchy& hier,
                                                         const MediaField& media,
                                                         const AuxiliarySpace& aux, int elem, int k,
                                                         int layers, const BasisOptions& opts) {
  if (layers < 1) throw ConfigError("basis: oversampling layers must be >= 1");
  if (k < 0 || k >= aux.count(elem)) throw ConfigError("basis: eigenfunction index out of range");
  auto ps = factor_patch(hier, media, aux, elem, layers, opts);
  Eigen::VectorXd psi, mu;
  solve_basis(*ps, elem, k, opts.constraint_tolerance, psi, mu);
  return {expand_patch_field(hier, ps->patch, psi), mu};
}

std::pair<BlockField, Eigen::VectorXd> build_global_basis(const GridHierarchy& hier,
                                                          const MediaField& media,
                                                          const AuxiliarySpace& aux, int elem, int k,
                                                          const BasisOptions& opts) {
  return build_local_basis(hier, media, aux, elem, k, hier.n_coarse(), opts);
}

std::vector<DecayRow> measure_decay(const GridHierarchy& hier, const MediaField& media,
                                    const AuxiliarySpace& aux, int elem, int k,
                                    const std::vector<int>& m_list, const BasisOptions& opts) {
  if (!std::is_sorted(m_list.begin(), m_list.end()))
    throw ConfigError("measure_decay: m list must be ascending");
  auto [psi_glo, mu_glo] = build_global_basis(hier, media, aux, elem, k, opts);
  SparseOperator aq = assemble_a_q(hier, media);

  std::vector<DecayRow> rows;
  for (int m : m_list) {
    auto [psi_m, mu_m] = build_local_basis(hier, media, aux, elem, k, m, opts);
    const Eigen::VectorXd diff = psi_glo.values - psi_m.values;
    DecayRow row;
    row.layers = m;
    row.diff_energy = diff.dot(aq.matrix * diff);
    Patch patch = oversample(hier, elem, m);
    std::vector<int> outside;
    for (int j = 0; j < hier.n_coarse_elems(); ++j) {
      auto [I, J] = hier.coarse_elem_ij(j);
      if (!patch.contains_coarse_elem(I, J)) outside.push_back(j);
    }
    row.tail_energy = aq_energy_on_elements(hier, media, outside, psi_glo);
    rows.push_back(row);
  }
  return rows;
}

CoarseSpace assemble_coarse_space(const GridHierarchy& hier, const MediaField& media,
                                  const AuxiliarySpace& aux, int layers, const BasisOptions& opts) {
  if (layers < 1) throw ConfigError("basis: oversampling layers must be >= 1");
  const int n_elems = hier.n_coarse_elems();

  // group elements by patch rectangle so saturated patches share one
  // factorization (the constraint set then coincides as well)
  std::map<std::array<int, 5>, std::vector<int>> groups;
  for (int j = 0; j < n_elems; ++j) {
    auto [I, J] = hier.coarse_elem_ij(j);
    const int I0 = std::max(0, I - layers), I1 = std::min(hier.n_coarse() - 1, I + layers);
    const int J0 = std::max(0, J - layers), J1 = std::min(hier.n_coarse() - 1, J + layers);
    const int scope_key = opts.scope == ConstraintScope::selected_element_only ? j : -1;
    groups[{I0, I1, J0, J1, scope_key}].push_back(j);
  }
  std::vector<std::vector<int>> group_list;
  group_list.reserve(groups.size());
  for (auto& [key, elems] : groups) group_list.push_back(std::move(elems));

  std::vector<ElementBasis> blocks(n_elems);
  parallel_for(static_cast<int>(group_list.size()), opts.threads, [&](int g) {
    const auto& elems = group_list[g];
    auto ps = factor_patch(hier, media, aux, elems.front(), layers, opts);
    Eigen::VectorXd psi, mu;
    for (int elem : elems) {
      ElementBasis eb;
      eb.elem = elem;
      eb.layers = layers;
      eb.patch = ps->patch;
      eb.patch.coarse_elem = elem;
      eb.constraint_ids = ps->constraint_ids;
      const int L = aux.count(elem);
      eb.values.resize(2 * ps->patch.n_nodes(), L);
      eb.multipliers.resize(ps->n_constraints(), L);
      for (int k = 0; k < L; ++k) {
        solve_basis(*ps, elem, k, opts.constraint_tolerance, psi, mu);
        eb.values.col(k) = psi;
        eb.multipliers.col(k) = mu;
      }
      blocks[elem] = std::move(eb);
    }
  });
  return CoarseSpace(hier, std::move(blocks));
}

CoarseSpace::CoarseSpace(const GridHierarchy& hier, std::vector<ElementBasis> blocks)
    : hier_(&hier), blocks_(std::move(blocks)) {
  offsets_.resize(blocks_.size() + 1, 0);
  for (size_t j = 0; j < blocks_.size(); ++j) {
    offsets_[j] = dim_;
    dim_ += blocks_[j].count();
  }
  offsets_[blocks_.size()] = dim_;
}

BlockField CoarseSpace::prolongate(const Eigen::VectorXd& coarse) const {
  if (coarse.size() != dim_) throw ConfigError("prolongate: coefficient size mismatch");
  BlockField out = BlockField::zero(hier_->n_nodes());
  for (int j = 0; j < n_elements(); ++j) {
    const ElementBasis& eb = blocks_[j];
    const int n_loc = eb.patch.n_nodes();
    const Eigen::VectorXd local = eb.values * coarse.segment(offsets_[j], eb.count());
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) out(c, eb.patch.nodes[l]) += local[c * n_loc + l];
  }
  return out;
}

Eigen::VectorXd CoarseSpace::restrict_to_coarse(const Eigen::VectorXd& fine) const {
  Eigen::VectorXd out(dim_);
  const int nn = hier_->n_nodes();
  for (int j = 0; j < n_elements(); ++j) {
    const ElementBasis& eb = blocks_[j];
    const int n_loc = eb.patch.n_nodes();
    Eigen::VectorXd local(2 * n_loc);
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) local[c * n_loc + l] = fine[c * nn + eb.patch.nodes[l]];
    out.segment(offsets_[j], eb.count()) = eb.values.transpose() * local;
  }
  return out;
}

BlockField CoarseSpace::column(int j, int k) const {
  const ElementBasis& eb = blocks_[j];
  return expand_patch_field(*hier_, eb.patch, eb.values.col(k));
}

Eigen::MatrixXd CoarseSpace::gram(const SparseOperator& op, int threads) const {
  if (op.size() != hier_->n_block_dofs())
    throw ConfigError("gram: operator is not on the global dof set");
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dim_, dim_);
  const int nn = hier_->n_nodes();
  const int npa = hier_->nodes_per_axis();

  parallel_for(n_elements(), threads, [&](int jp) {
    const ElementBasis& ebp = blocks_[jp];
    const int n_loc = ebp.patch.n_nodes();

    // y columns = op * psi columns, supported on the patch grown by one node
    const int ei0 = std::max(0, ebp.patch.i0 - 1), ei1 = std::min(npa - 1, ebp.patch.i1 + 1);
    const int ej0 = std::max(0, ebp.patch.j0 - 1), ej1 = std::min(npa - 1, ebp.patch.j1 + 1);
    const int enx = ei1 - ei0 + 1, eny = ej1 - ej0 + 1;
    Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(2 * enx * eny, ebp.count());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * nn);
    Eigen::VectorXd y(2 * nn);
    for (int k = 0; k < ebp.count(); ++k) {
      for (int c = 0; c < 2; ++c)
        for (int l = 0; l < n_loc; ++l) x[c * nn + ebp.patch.nodes[l]] = ebp.values(c * n_loc + l, k);
      y.noalias() = op.matrix * x;
      for (int c = 0; c < 2; ++c)
        for (int jj = ej0; jj <= ej1; ++jj)
          for (int ii = ei0; ii <= ei1; ++ii)
            Y((c * eny + (jj - ej0)) * enx + (ii - ei0), k) = y[c * nn + hier_->node_id(ii, jj)];
      for (int c = 0; c < 2; ++c)
        for (int l = 0; l < n_loc; ++l) x[c * nn + ebp.patch.nodes[l]] = 0.0;
    }

    for (int j = 0; j < n_elements(); ++j) {
      const ElementBasis& ebj = blocks_[j];
      const int oi0 = std::max(ebj.patch.i0, ei0), oi1 = std::min(ebj.patch.i1, ei1);
      const int oj0 = std::max(ebj.patch.j0, ej0), oj1 = std::min(ebj.patch.j1, ej1);
      if (oi0 > oi1 || oj0 > oj1) continue;
      const int onx = oi1 - oi0 + 1, ony = oj1 - oj0 + 1;
      Eigen::MatrixXd U(2 * onx * ony, ebj.count());
      Eigen::MatrixXd W(2 * onx * ony, ebp.count());
      const int jnx = ebj.patch.nodes_x();
      for (int c = 0; c < 2; ++c)
        for (int jj = oj0; jj <= oj1; ++jj)
          for (int ii = oi0; ii <= oi1; ++ii) {
            const int orow = (c * ony + (jj - oj0)) * onx + (ii - oi0);
            U.row(orow) =
                ebj.values.row(c * ebj.patch.n_nodes() + (jj - ebj.patch.j0) * jnx + (ii - ebj.patch.i0));
            W.row(orow) = Y.row((c * eny + (jj - ej0)) * enx + (ii - ei0));
          }
      G.block(offsets_[j], offsets_[jp], ebj.count(), ebp.count()).noalias() = U.transpose() * W;
    }
  });
  return G;
}

}  // namespace cemdc
