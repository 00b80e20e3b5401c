#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "cemdc/basis.hpp"
#include "helpers.hpp"

using namespace cemdc;
using cemdc::testing::random_vector;

namespace {

struct DeskSetup {
  GridHierarchy hier;
  MediaField media;
  PartitionOfUnity pou;
  AuxiliarySpace aux;
  SparseOperator aq;

  DeskSetup(int n_coarse, int n_fine, double contrast, int L, double sigma = 1.0)
      : hier(GridHierarchy::with_fine(unit_square(), n_coarse, n_fine)),
        media(cemdc::testing::desk_channel_media(hier, contrast, sigma)),
        pou(hier),
        aux(build_auxiliary_space(hier, media, pou, L, 1, 2)),
        aq(assemble_a_q(hier, media)) {}

  double aq_norm(const BlockField& f) const { return std::sqrt(f.values.dot(aq.matrix * f.values)); }
};

}  // namespace

TEST_CASE("basis: oversampling formula reproduces the published pairings") {
  CHECK(oversampling_layers(1.0 / 8) == 4);
  CHECK(oversampling_layers(1.0 / 16) == 6);
  CHECK(oversampling_layers(1.0 / 32) == 7);
  CHECK(oversampling_layers(1.0 / 64) == 9);
  CHECK(oversampling_layers(1.0 / 4) == 3);
}

TEST_CASE("basis: patch covering the domain reproduces the global basis") {
  DeskSetup d(2, 16, 1e3, 3);
  for (int elem = 0; elem < d.hier.n_coarse_elems(); ++elem)
    for (int k = 0; k < 3; ++k) {
      auto [psi_ms, mu_ms] = build_local_basis(d.hier, d.media, d.aux, elem, k, 2);
      auto [psi_glo, mu_glo] = build_global_basis(d.hier, d.media, d.aux, elem, k);
      BlockField diff = psi_ms;
      diff.values -= psi_glo.values;
      CHECK(d.aq_norm(diff) <= 1e-8 * d.aq_norm(psi_glo));
    }
}

TEST_CASE("basis: constraints hold against every auxiliary function in the patch") {
  DeskSetup d(4, 16, 1e3, 2);
  const int elem = d.hier.coarse_elem_id(1, 2);
  auto [psi, mu] = build_local_basis(d.hier, d.media, d.aux, elem, 1, 1);
  // s-products against all auxiliary functions: delta at (elem, 1), zero at
  // every other function of elements inside the patch
  const Eigen::VectorXd coeffs = d.aux.project(psi.values);
  Patch patch = oversample(d.hier, elem, 1);
  for (int j = 0; j < d.aux.n_elements(); ++j) {
    auto [I, J] = d.hier.coarse_elem_ij(j);
    if (!patch.contains_coarse_elem(I, J)) continue;
    for (int k = 0; k < d.aux.count(j); ++k) {
      const double expected = (j == elem && k == 1) ? 1.0 : 0.0;
      CHECK(std::abs(coeffs[d.aux.offset(j) + k] - expected) <= 1e-8);
    }
  }
}

TEST_CASE("basis: support is confined to the patch and its boundary is zero") {
  DeskSetup d(4, 16, 100.0, 2);
  const int elem = d.hier.coarse_elem_id(2, 1);
  auto [psi, mu] = build_local_basis(d.hier, d.media, d.aux, elem, 0, 1);
  Patch patch = oversample(d.hier, elem, 1);
  for (int n = 0; n < d.hier.n_nodes(); ++n) {
    const bool inside = patch.contains_node(d.hier, n);
    for (int c = 0; c < 2; ++c) {
      if (!inside) CHECK(psi(c, n) == 0.0);
      if (d.hier.is_boundary_node(n)) CHECK(psi(c, n) == 0.0);
    }
  }
  for (int n : patch.boundary_nodes) CHECK(psi(0, n) == 0.0);
}

TEST_CASE("basis: energy decreases with the feasible set as m grows") {
  DeskSetup d(6, 24, 1e3, 2);
  const int elem = d.hier.coarse_elem_id(3, 3);
  double prev = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= 4; ++m) {
    auto [psi, mu] = build_local_basis(d.hier, d.media, d.aux, elem, 0, m);
    const double energy = d.aq_norm(psi);
    CHECK(energy <= prev * (1.0 + 1e-10));
    prev = energy;
  }
  auto [psi_glo, mu_glo] = build_global_basis(d.hier, d.media, d.aux, elem, 0);
  CHECK(d.aq_norm(psi_glo) <= prev * (1.0 + 1e-10));
}

TEST_CASE("basis: global basis satisfies the variational identities") {
  DeskSetup d(3, 12, 100.0, 2);
  const int elem = 4;
  auto [psi, mu] = build_global_basis(d.hier, d.media, d.aux, elem, 1);

  SUBCASE("a_Q-orthogonal to the kernel of pi") {
    // the kernel correction must stay inside V, so the constraint matrix is
    // restricted to interior columns before projecting
    Eigen::SparseMatrix<double> B = d.aux.constraint_matrix();
    for (int col = 0; col < B.outerSize(); ++col) {
      const int node = col % d.hier.n_nodes();
      if (!d.hier.is_boundary_node(node)) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(B, col); it; ++it) it.valueRef() = 0.0;
    }
    B.prune(0.0);
    Eigen::SparseMatrix<double> BBt = (B * Eigen::SparseMatrix<double>(B.transpose())).pruned();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(BBt);
    REQUIRE(ldlt.info() == Eigen::Success);
    for (unsigned seed = 50; seed < 60; ++seed) {
      BlockField v;
      v.nodes_per_continuum = d.hier.n_nodes();
      v.values = random_vector(d.hier.n_block_dofs(), seed);
      // zero the walls so v lies in V, then project onto ker(pi) within V
      for (int n = 0; n < d.hier.n_nodes(); ++n)
        if (d.hier.is_boundary_node(n)) v(0, n) = v(1, n) = 0.0;
      BlockField w = v;
      w.values -= B.transpose() * ldlt.solve(B * v.values);
      CHECK(d.aux.project(w.values).cwiseAbs().maxCoeff() < 1e-9);
      const double val = psi.values.dot(d.aq.matrix * w.values);
      const double scale = d.aq_norm(psi) * d.aq_norm(w);
      CHECK(std::abs(val) <= 1e-8 * scale);
    }
  }

  SUBCASE("pi of the basis recovers the auxiliary function") {
    const Eigen::VectorXd coeffs = d.aux.project(psi.values);
    for (int j = 0; j < d.aux.n_elements(); ++j)
      for (int k = 0; k < d.aux.count(j); ++k) {
        const double expected = (j == elem && k == 1) ? 1.0 : 0.0;
        CHECK(std::abs(coeffs[d.aux.offset(j) + k] - expected) <= 1e-8);
      }
  }
}

TEST_CASE("basis: saddle residuals are small in both blocks") {
  DeskSetup d(4, 16, 1e4, 2);
  const int elem = d.hier.coarse_elem_id(1, 1);
  auto [psi, mu] = build_local_basis(d.hier, d.media, d.aux, elem, 0, 2);

  // first block: a_Q(psi, w) + s(w, mu) = 0 for all w in V_0(patch); assemble
  // the residual vector on the patch interior dofs
  Patch patch = oversample(d.hier, elem, 2);
  SparseOperator aq_p = assemble_a_q(d.hier, d.media, &patch);
  const int n_loc = patch.n_nodes();
  Eigen::VectorXd psi_loc(2 * n_loc);
  for (int c = 0; c < 2; ++c)
    for (int l = 0; l < n_loc; ++l) psi_loc[c * n_loc + l] = psi(c, patch.nodes[l]);
  Eigen::VectorXd resid = aq_p.matrix * psi_loc;
  // add B^T mu: mu rows follow the (element, k) list of elements inside the patch
  int row = 0;
  for (int J = patch.J0; J <= patch.J1; ++J)
    for (int I = patch.I0; I <= patch.I1; ++I) {
      const int jp = d.hier.coarse_elem_id(I, J);
      const auto& es = d.aux.element(jp);
      const int ne = es.cell_patch.n_nodes();
      for (int k = 0; k < es.count; ++k, ++row)
        for (int c = 0; c < 2; ++c)
          for (int l = 0; l < ne; ++l)
            resid[patch.local_block_dof(d.hier, c, es.cell_patch.nodes[l])] +=
                es.s_vectors(c * ne + l, k) * mu[row];
    }
  double max_interior = 0.0;
  for (int node : patch.interior_nodes)
    for (int c = 0; c < 2; ++c)
      max_interior = std::max(max_interior,
                              std::abs(resid[patch.local_block_dof(d.hier, c, node)]));
  const double scale = std::max(1.0, psi_loc.dot(aq_p.matrix * psi_loc));
  CHECK(max_interior <= 1e-9 * scale);
}

TEST_CASE("basis: homogeneous media give translated bases on interior elements") {
  // elements whose whole m=1 patch stays away from the walls: their local
  // problems (including the nested auxiliary ones) are exact translates
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 6, 24);
  MediaField media = cemdc::testing::constant_media(hier, 1.0, 1.0, 1.0, 1.0);
  PartitionOfUnity pou(hier);
  AuxiliarySpace aux = build_auxiliary_space(hier, media, pou, 2, 1, 1);
  const int e1 = hier.coarse_elem_id(2, 2), e2 = hier.coarse_elem_id(3, 3);
  auto [psi1, mu1] = build_local_basis(hier, media, aux, e1, 0, 1);
  auto [psi2, mu2] = build_local_basis(hier, media, aux, e2, 0, 1);
  const int shift = hier.refinement();  // one coarse element diagonally
  double max_diff = 0.0;
  for (int j = 0; j + shift <= hier.n_fine(); ++j)
    for (int i = 0; i + shift <= hier.n_fine(); ++i)
      for (int c = 0; c < 2; ++c)
        max_diff = std::max(max_diff, std::abs(psi1(c, hier.node_id(i, j)) -
                                               psi2(c, hier.node_id(i + shift, j + shift))));
  CHECK(max_diff < 1e-8);
}

TEST_CASE("basis: decay table is monotone and vanishes at saturation") {
  DeskSetup d(6, 24, 1e3, 2);
  const int elem = d.hier.coarse_elem_id(3, 2);
  auto rows = measure_decay(d.hier, d.media, d.aux, elem, 0, {1, 2, 3, 6});
  REQUIRE(rows.size() == 4);
  for (size_t r = 0; r + 1 < rows.size(); ++r) {
    CHECK(rows[r + 1].diff_energy <= rows[r].diff_energy * (1.0 + 1e-9));
    CHECK(rows[r + 1].tail_energy <= rows[r].tail_energy * (1.0 + 1e-9));
  }
  CHECK(rows.back().diff_energy <= 1e-16);  // m = 6 covers the domain

  // exponential decay: least-squares slope of log(diff) vs m is negative
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t r = 0; r + 1 < rows.size(); ++r) {  // skip the saturated row
    const double x = rows[r].layers, y = std::log(std::max(rows[r].diff_energy, 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope < 0.0);
}

TEST_CASE("basis: coarse space assembly") {
  DeskSetup d(4, 16, 1e3, 2);
  CoarseSpace space = assemble_coarse_space(d.hier, d.media, d.aux, 1, {});
  CHECK(space.dim() == 2 * 16);

  SUBCASE("column supports respect the patch masks") {
    for (int j : {0, 5, 15})
      for (int k = 0; k < 2; ++k) {
        BlockField col = space.column(j, k);
        Patch patch = oversample(d.hier, j, 1);
        for (int n = 0; n < d.hier.n_nodes(); ++n)
          if (!patch.contains_node(d.hier, n)) {
            CHECK(col(0, n) == 0.0);
            CHECK(col(1, n) == 0.0);
          }
      }
  }

  SUBCASE("gram matrix matches explicit columns and is SPD") {
    const Eigen::MatrixXd G = space.gram(d.aq, 2);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() < 1e-10 * G.cwiseAbs().maxCoeff());
    // spot-check entries against explicitly expanded columns
    for (int a : {0, 7, 31})
      for (int b : {0, 13, 31}) {
        const BlockField ca = space.column(a / 2, a % 2);
        const BlockField cb = space.column(b / 2, b % 2);
        const double expected = ca.values.dot(d.aq.matrix * cb.values);
        CHECK(G(a, b) == doctest::Approx(expected).epsilon(1e-11));
      }
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    CHECK(llt.info() == Eigen::Success);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }

  SUBCASE("prolongate and restrict are adjoint") {
    const Eigen::VectorXd c = random_vector(space.dim(), 77);
    const Eigen::VectorXd v = random_vector(d.hier.n_block_dofs(), 78);
    const double left = space.prolongate(c).values.dot(v);
    const double right = c.dot(space.restrict_to_coarse(v));
    CHECK(left == doctest::Approx(right).epsilon(1e-12));
  }
}

TEST_CASE("basis: counting at the published scale") {
  GridHierarchy hier = GridHierarchy::with_fine(unit_square(), 16, 64);
  MediaField media = cemdc::testing::constant_media(hier, 1.0, 1.0, 1.0, 1.0);
  PartitionOfUnity pou(hier);
  AuxiliarySpace aux = build_auxiliary_space(hier, media, pou, 6, 1, 2);
  BasisOptions opts;
  opts.threads = 2;
  CoarseSpace space = assemble_coarse_space(hier, media, aux, 1, opts);
  CHECK(space.dim() == 1536);
}

TEST_CASE("basis: narrow constraint scope stays well posed") {
  DeskSetup d(4, 16, 100.0, 2);
  BasisOptions narrow;
  narrow.scope = ConstraintScope::selected_element_only;
  const int elem = d.hier.coarse_elem_id(1, 1);
  auto [psi, mu] = build_local_basis(d.hier, d.media, d.aux, elem, 0, 1, narrow);
  CHECK(mu.size() == 2);  // constraints only against the element's own functions
  const Eigen::VectorXd coeffs = d.aux.project(psi.values);
  CHECK(coeffs[d.aux.offset(elem) + 0] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("basis: invalid arguments are rejected") {
  DeskSetup d(2, 8, 10.0, 1);
  CHECK_THROWS_AS(build_local_basis(d.hier, d.media, d.aux, 0, 0, 0), ConfigError);
  CHECK_THROWS_AS(build_local_basis(d.hier, d.media, d.aux, 0, 5, 1), ConfigError);
  CHECK_THROWS_AS(measure_decay(d.hier, d.media, d.aux, 0, 0, {3, 1}), ConfigError);
}
