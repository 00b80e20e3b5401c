#include "cemdc/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "cemdc/lineareig.hpp"
#include "cemdc/parallel.hpp"

namespace cemdc {

namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  if (scale == 0.0) return;
  for (int i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

}  // namespace

ElementSpectrum local_eigensolve(const GridHierarchy& hier, const MediaField& media,
                                 const PartitionOfUnity& pou, int coarse_elem, int count,
                                 bool constrain_global_boundary) {
  ElementSpectrum es;
  es.elem = coarse_elem;
  es.cell_patch = oversample(hier, coarse_elem, 0);
  const Patch& kp = es.cell_patch;
  const int n_loc = kp.n_nodes();
  const int n_dofs = 2 * n_loc;

  SparseOperator aq = assemble_a_q(hier, media, &kp);
  SparseOperator s = assemble_weighted_mass_s(hier, media, pou, &kp);

  // free dofs: everything except global-boundary nodes (V(K_j) keeps the
  // element boundary interior to the domain free)
  std::vector<int> free_dofs;
  free_dofs.reserve(n_dofs);
  for (int c = 0; c < 2; ++c)
    for (int l = 0; l < n_loc; ++l) {
      const int node = kp.nodes[l];
      if (constrain_global_boundary && hier.is_boundary_node(node)) continue;
      free_dofs.push_back(c * n_loc + l);
    }
  const int n_free = static_cast<int>(free_dofs.size());
  if (count < 1 || count > n_free)
    throw ConfigError("local_eigensolve: requested " + std::to_string(count) +
                      " eigenpairs on element " + std::to_string(coarse_elem) + " with only " +
                      std::to_string(n_free) + " free dofs");

  Eigen::MatrixXd Af = Eigen::MatrixXd::Zero(n_free, n_free);
  Eigen::MatrixXd Sf = Eigen::MatrixXd::Zero(n_free, n_free);
  std::vector<int> to_free(n_dofs, -1);
  for (int k = 0; k < n_free; ++k) to_free[free_dofs[k]] = k;
  for (int outer = 0; outer < aq.matrix.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(aq.matrix, outer); it; ++it) {
      const int r = to_free[it.row()], c = to_free[it.col()];
      if (r >= 0 && c >= 0) Af(r, c) = it.value();
    }
  for (int outer = 0; outer < s.matrix.outerSize(); ++outer)
    for (Eigen::SparseMatrix<double>::InnerIterator it(s.matrix, outer); it; ++it) {
      const int r = to_free[it.row()], c = to_free[it.col()];
      if (r >= 0 && c >= 0) Sf(r, c) = it.value();
    }

  Eigen::VectorXd evals;
  Eigen::MatrixXd evecs;
  generalized_symmetric_eigen(std::move(Af), std::move(Sf), evals, evecs,
                              "element " + std::to_string(coarse_elem));

  es.count = count;
  es.eigenvalues = evals;
  es.vectors = Eigen::MatrixXd::Zero(n_dofs, count);
  for (int k = 0; k < count; ++k) {
    for (int r = 0; r < n_free; ++r) es.vectors(free_dofs[r], k) = evecs(r, k);
    fix_sign(es.vectors.col(k));
  }
  es.s_vectors = s.matrix * es.vectors;
  return es;
}

AuxiliarySpace::AuxiliarySpace(const GridHierarchy& hier, std::vector<ElementSpectrum> elements)
    : hier_(&hier), elements_(std::move(elements)) {
  offsets_.resize(elements_.size() + 1, 0);
  lambda_min_discarded_ = std::numeric_limits<double>::infinity();
  lambda_max_kept_ = 0.0;
  for (size_t j = 0; j < elements_.size(); ++j) {
    const auto& e = elements_[j];
    offsets_[j] = total_dim_;
    total_dim_ += e.count;
    if (e.eigenvalues.size() > e.count)
      lambda_min_discarded_ = std::min(lambda_min_discarded_, e.eigenvalues[e.count]);
    if (e.count > 0) lambda_max_kept_ = std::max(lambda_max_kept_, e.eigenvalues[e.count - 1]);
  }
  offsets_[elements_.size()] = total_dim_;
}

Eigen::VectorXd AuxiliarySpace::project(const Eigen::VectorXd& global_field) const {
  Eigen::VectorXd coeffs(total_dim_);
  const int nn = hier_->n_nodes();
  for (int j = 0; j < n_elements(); ++j) {
    const auto& e = elements_[j];
    const int n_loc = e.cell_patch.n_nodes();
    Eigen::VectorXd local(2 * n_loc);
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) local[c * n_loc + l] = global_field[c * nn + e.cell_patch.nodes[l]];
    coeffs.segment(offsets_[j], e.count) = e.s_vectors.transpose() * local;
  }
  return coeffs;
}

BlockField AuxiliarySpace::expand(const Eigen::VectorXd& aux_coeffs) const {
  if (aux_coeffs.size() != total_dim_)
    throw ConfigError("auxiliary expand: coefficient size mismatch");
  BlockField out = BlockField::zero(hier_->n_nodes());
  const int nn = hier_->n_nodes();
  for (int j = 0; j < n_elements(); ++j) {
    const auto& e = elements_[j];
    const int n_loc = e.cell_patch.n_nodes();
    const Eigen::VectorXd local = e.vectors * aux_coeffs.segment(offsets_[j], e.count);
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) out.values[c * nn + e.cell_patch.nodes[l]] += local[c * n_loc + l];
  }
  return out;
}

Eigen::SparseMatrix<double> AuxiliarySpace::constraint_matrix() const {
  std::vector<Eigen::Triplet<double>> trips;
  const int nn = hier_->n_nodes();
  for (int j = 0; j < n_elements(); ++j) {
    const auto& e = elements_[j];
    const int n_loc = e.cell_patch.n_nodes();
    for (int k = 0; k < e.count; ++k)
      for (int c = 0; c < 2; ++c)
        for (int l = 0; l < n_loc; ++l) {
          const double v = e.s_vectors(c * n_loc + l, k);
          if (v != 0.0) trips.emplace_back(offsets_[j] + k, c * nn + e.cell_patch.nodes[l], v);
        }
  }
  Eigen::SparseMatrix<double> B(total_dim_, 2 * nn);
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

AuxiliarySpace AuxiliarySpace::with_count(int L) const {
  std::vector<ElementSpectrum> sliced;
  sliced.reserve(elements_.size());
  for (const auto& e : elements_) {
    if (L > e.count)
      throw ConfigError("auxiliary with_count: requested " + std::to_string(L) +
                        " > retained count " + std::to_string(e.count));
    ElementSpectrum s;
    s.elem = e.elem;
    s.cell_patch = e.cell_patch;
    s.eigenvalues = e.eigenvalues;
    s.vectors = e.vectors.leftCols(L);
    s.s_vectors = e.s_vectors.leftCols(L);
    s.count = L;
    sliced.push_back(std::move(s));
  }
  return AuxiliarySpace(*hier_, std::move(sliced));
}

AuxiliarySpace build_auxiliary_space(const GridHierarchy& hier, const MediaField& media,
                                     const PartitionOfUnity& pou, const std::vector<int>& L_per_elem,
                                     int extra, int threads) {
  if (static_cast<int>(L_per_elem.size()) != hier.n_coarse_elems())
    throw ConfigError("build_auxiliary_space: per-element count list has wrong length");
  if (extra < 1) throw ConfigError("build_auxiliary_space: extra eigenvalue count must be >= 1");
  std::vector<ElementSpectrum> elems(hier.n_coarse_elems());
  parallel_for(hier.n_coarse_elems(), threads, [&](int j) {
    if (L_per_elem[j] < 1)
      throw ConfigError("build_auxiliary_space: L must be >= 1 on element " + std::to_string(j));
    ElementSpectrum es = local_eigensolve(hier, media, pou, j, L_per_elem[j] + extra);
    // keep the extra pairs only as eigenvalues; vectors beyond L are dropped
    es.count = L_per_elem[j];
    es.eigenvalues = es.eigenvalues.head(L_per_elem[j] + extra).eval();
    es.vectors = es.vectors.leftCols(es.count).eval();
    es.s_vectors = es.s_vectors.leftCols(es.count).eval();
    elems[j] = std::move(es);
  });
  return AuxiliarySpace(hier, std::move(elems));
}

AuxiliarySpace build_auxiliary_space(const GridHierarchy& hier, const MediaField& media,
                                     const PartitionOfUnity& pou, int L, int extra, int threads) {
  return build_auxiliary_space(hier, media, pou,
                               std::vector<int>(hier.n_coarse_elems(), L), extra, threads);
}

}  // namespace cemdc
