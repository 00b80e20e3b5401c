#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "cemdc/grid.hpp"
#include "helpers.hpp"

using namespace cemdc;

TEST_CASE("hierarchy: nesting arithmetic") {
  GridHierarchy h = build_hierarchy(unit_square(), 2, 4);
  CHECK(h.n_coarse() == 2);
  CHECK(h.n_fine() == 8);
  CHECK(h.Hx() == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(h.hx() == doctest::Approx(1.0 / 8).epsilon(1e-15));

  GridHierarchy e1 = build_hierarchy(unit_square(), 16, 16);
  CHECK(e1.Hx() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  CHECK(e1.hx() == doctest::Approx(1.0 / 256).epsilon(1e-15));

  GridHierarchy g32 = build_hierarchy(unit_square(), 3, 2);
  CHECK(g32.n_fine() == 6);
  CHECK(g32.n_nodes() == 49);
}

TEST_CASE("hierarchy: invalid configurations") {
  CHECK_THROWS_AS(build_hierarchy(unit_square(), 0, 4), ConfigError);
  CHECK_THROWS_AS(build_hierarchy(unit_square(), 2, 1), ConfigError);
  CHECK_THROWS_AS(build_hierarchy(Domain{0, 0, 0, 1}, 2, 2), ConfigError);
  CHECK_THROWS_AS(GridHierarchy::with_fine(unit_square(), 3, 8), ConfigError);
}

TEST_CASE("hierarchy: boundary flags mark exactly the wall nodes") {
  GridHierarchy h = build_hierarchy(unit_square(), 3, 3);
  int boundary_count = 0;
  for (int n = 0; n < h.n_nodes(); ++n) {
    auto [i, j] = h.node_ij(n);
    const bool expected = i == 0 || j == 0 || i == h.n_fine() || j == h.n_fine();
    CHECK(h.is_boundary_node(n) == expected);
    boundary_count += h.is_boundary_node(n);
  }
  CHECK(boundary_count == 4 * h.n_fine());
}

TEST_CASE("hierarchy: every fine cell belongs to one coarse element") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 3);
  std::vector<int> counts(h.n_coarse_elems(), 0);
  for (int c = 0; c < h.n_cells(); ++c) {
    auto [I, J] = h.coarse_of_cell(c);
    REQUIRE(I >= 0);
    REQUIRE(I < 4);
    counts[h.coarse_elem_id(I, J)]++;
  }
  for (int cnt : counts) CHECK(cnt == 9);
}

namespace {

// Set oracle: all coarse elements within Chebyshev distance m, then the
// union of their nodes/cells.
void oracle_patch(const GridHierarchy& h, int elem, int m, std::set<int>& nodes,
                  std::set<int>& cells) {
  auto [I, J] = h.coarse_elem_ij(elem);
  const int r = h.refinement();
  for (int e = 0; e < h.n_coarse_elems(); ++e) {
    auto [I2, J2] = h.coarse_elem_ij(e);
    if (std::max(std::abs(I2 - I), std::abs(J2 - J)) > m) continue;
    for (int dj = 0; dj <= r; ++dj)
      for (int di = 0; di <= r; ++di) nodes.insert(h.node_id(I2 * r + di, J2 * r + dj));
    for (int dj = 0; dj < r; ++dj)
      for (int di = 0; di < r; ++di) cells.insert(h.cell_id(I2 * r + di, J2 * r + dj));
  }
}

}  // namespace

TEST_CASE("oversample: corner element with one ring covers a 2x2 grid") {
  GridHierarchy h = build_hierarchy(unit_square(), 2, 4);
  Patch p = oversample(h, 0, 1);
  CHECK(p.is_whole_domain(h));
  CHECK(static_cast<int>(p.nodes.size()) == h.n_nodes());
}

TEST_CASE("oversample: interior element one ring is a 3x3 block") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 2);
  Patch p = oversample(h, h.coarse_elem_id(1, 1), 1);
  CHECK(p.I1 - p.I0 + 1 == 3);
  CHECK(p.J1 - p.J0 + 1 == 3);
}

TEST_CASE("oversample: clipped patches match the set oracle") {
  GridHierarchy h = build_hierarchy(unit_square(), 16, 2);
  for (int elem : {0, 37, h.coarse_elem_id(15, 15), h.coarse_elem_id(7, 2)}) {
    Patch p = oversample(h, elem, 6);
    std::set<int> nodes, cells;
    oracle_patch(h, elem, 6, nodes, cells);
    CHECK(std::set<int>(p.nodes.begin(), p.nodes.end()) == nodes);
    CHECK(std::set<int>(p.cells.begin(), p.cells.end()) == cells);
  }
}

TEST_CASE("oversample: monotone in m and saturates") {
  GridHierarchy h = build_hierarchy(unit_square(), 5, 2);
  for (int elem : {0, 7, 24}) {
    std::set<int> prev;
    bool saturated = false;
    for (int m = 0; m <= h.n_coarse(); ++m) {
      Patch p = oversample(h, elem, m);
      std::set<int> cur(p.nodes.begin(), p.nodes.end());
      CHECK(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()));
      prev = cur;
      if (p.is_whole_domain(h)) saturated = true;
    }
    CHECK(saturated);
  }
}

TEST_CASE("oversample: m=0 is the coarse element itself") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 4);
  Patch p = oversample(h, h.coarse_elem_id(2, 1), 0);
  CHECK(static_cast<int>(p.cells.size()) == 16);
  CHECK(static_cast<int>(p.nodes.size()) == 25);
  for (int c : p.cells) {
    auto [I, J] = h.coarse_of_cell(c);
    CHECK(I == 2);
    CHECK(J == 1);
  }
}

TEST_CASE("oversample: local dof maps are bijective") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 3);
  Patch p = oversample(h, 5, 1);
  std::set<int> locals;
  for (int node : p.nodes) {
    const int l = p.local_node(h, node);
    REQUIRE(l >= 0);
    REQUIRE(l < p.n_nodes());
    locals.insert(l);
  }
  CHECK(static_cast<int>(locals.size()) == p.n_nodes());
  CHECK(p.nodes.size() == p.interior_nodes.size() + p.boundary_nodes.size());
}

TEST_CASE("oversample: rejects bad arguments") {
  GridHierarchy h = build_hierarchy(unit_square(), 2, 2);
  CHECK_THROWS_AS(oversample(h, -1, 1), ConfigError);
  CHECK_THROWS_AS(oversample(h, 4, 1), ConfigError);
  CHECK_THROWS_AS(oversample(h, 0, -1), ConfigError);
}

TEST_CASE("pou: hats interpolate and sum to one") {
  GridHierarchy h = build_hierarchy(unit_square(), 2, 4);
  PartitionOfUnity pou(h);
  // the single interior coarse node peaks at the domain center
  const int center = 1 * 3 + 1;  // coarse node (1,1) on the 3x3 coarse-node grid
  CHECK(pou.chi(center, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pou.chi(center, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pou.chi(center, 1.0, 1.0) == doctest::Approx(0.0).epsilon(1e-15));

  auto rng = cemdc::testing::random_vector(5, 1234);
  for (int k = 0; k < 5; ++k) {
    const int node = static_cast<int>((rng[k] * 0.5 + 0.5) * (h.n_nodes() - 1));
    CHECK(pou.sum_at_node(node) == doctest::Approx(1.0).epsilon(1e-12));
  }
  for (int n = 0; n < h.n_nodes(); ++n)
    CHECK(pou.sum_at_node(n) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pou: hat support is limited to adjacent coarse elements") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 4);
  PartitionOfUnity pou(h);
  for (const auto& hat : pou.hats()) {
    const int P = hat.coarse_node % 5, Q = hat.coarse_node / 5;
    for (size_t k = 0; k < hat.nodes.size(); ++k) {
      CHECK(hat.values[k] >= 0.0);
      CHECK(hat.values[k] <= 1.0);
      auto [i, j] = h.node_ij(hat.nodes[k]);
      CHECK(std::abs(i - P * 4) <= 4);
      CHECK(std::abs(j - Q * 4) <= 4);
    }
  }
}

TEST_CASE("pou: gradient weight scales as H^-2") {
  GridHierarchy h = build_hierarchy(unit_square(), 4, 4);
  PartitionOfUnity pou(h);
  const double H = h.Hx();
  for (double g : pou.grad_sq_cell()) {
    CHECK(g >= 2.0 / (H * H) * (1.0 - 1e-12));
    CHECK(g <= 4.0 / (H * H) * (1.0 + 1e-12));
  }
  // refining the coarse grid by 2 on the same fine grid scales the weight by ~4
  GridHierarchy h2 = GridHierarchy::with_fine(unit_square(), 8, 16);
  PartitionOfUnity pou2(h2);
  const double mean1 =
      std::accumulate(pou.grad_sq_cell().begin(), pou.grad_sq_cell().end(), 0.0) / h.n_cells();
  const double mean2 =
      std::accumulate(pou2.grad_sq_cell().begin(), pou2.grad_sq_cell().end(), 0.0) / h2.n_cells();
  CHECK(mean2 / mean1 == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("pou: cell averages match a finite-difference quadrature oracle") {
  GridHierarchy h = build_hierarchy(unit_square(), 3, 4);
  PartitionOfUnity pou(h);
  // 3-point Gauss per direction integrates the quadratic integrand exactly;
  // gradients by central differences well inside the cell
  const double gp[3] = {-std::sqrt(3.0 / 5.0), 0.0, std::sqrt(3.0 / 5.0)};
  const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const double delta = 1e-7 * h.hx();
  for (int cell : {0, 17, 55, h.n_cells() - 1}) {
    auto [ci, cj] = h.cell_ij(cell);
    const double xc = h.node_x(ci) + 0.5 * h.hx(), yc = h.node_y(cj) + 0.5 * h.hy();
    double avg = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const double x = xc + 0.5 * h.hx() * gp[a], y = yc + 0.5 * h.hy() * gp[b];
        double sum = 0.0;
        for (const auto& hat : pou.hats()) {
          const double gx = (pou.chi(hat.coarse_node, x + delta, y) -
                             pou.chi(hat.coarse_node, x - delta, y)) /
                            (2 * delta);
          const double gy = (pou.chi(hat.coarse_node, x, y + delta) -
                             pou.chi(hat.coarse_node, x, y - delta)) /
                            (2 * delta);
          sum += gx * gx + gy * gy;
        }
        avg += 0.25 * gw[a] * gw[b] * sum;
      }
    CHECK(pou.grad_sq_cell()[cell] == doctest::Approx(avg).epsilon(1e-6));
  }
}
