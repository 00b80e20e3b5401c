#include "cemdc/grid.hpp"

#include <cmath>
#include <string>

namespace cemdc {

GridHierarchy::GridHierarchy(Domain domain, int n_coarse, int refinement_factor)
    : domain_(domain), n_coarse_(n_coarse), n_fine_(n_coarse * refinement_factor) {
  if (n_coarse < 2) throw ConfigError("grid: n_coarse must be >= 2, got " + std::to_string(n_coarse));
  if (refinement_factor < 2)
    throw ConfigError("grid: refinement factor must be >= 2, got " + std::to_string(refinement_factor));
  if (domain.width() <= 0.0 || domain.height() <= 0.0)
    throw ConfigError("grid: domain has non-positive extent");
  const int npa = nodes_per_axis();
  boundary_.assign(static_cast<size_t>(npa) * npa, 0);
  for (int j = 0; j < npa; ++j)
    for (int i = 0; i < npa; ++i)
      if (i == 0 || j == 0 || i == n_fine_ || j == n_fine_) boundary_[node_id(i, j)] = 1;
}

GridHierarchy GridHierarchy::with_fine(Domain domain, int n_coarse, int n_fine) {
  if (n_coarse <= 0 || n_fine <= 0)
    throw ConfigError("grid: sizes must be positive");
  if (n_fine % n_coarse != 0)
    throw ConfigError("grid: n_fine " + std::to_string(n_fine) + " is not a multiple of n_coarse " +
                      std::to_string(n_coarse));
  return GridHierarchy(domain, n_coarse, n_fine / n_coarse);
}

GridHierarchy build_hierarchy(Domain domain, int n_coarse, int refinement_factor) {
  return GridHierarchy(domain, n_coarse, refinement_factor);
}

Patch oversample(const GridHierarchy& hier, int coarse_elem, int layers) {
  if (coarse_elem < 0 || coarse_elem >= hier.n_coarse_elems())
    throw ConfigError("oversample: coarse element " + std::to_string(coarse_elem) + " out of range");
  if (layers < 0) throw ConfigError("oversample: negative layer count");

  auto [I, J] = hier.coarse_elem_ij(coarse_elem);
  Patch p;
  p.coarse_elem = coarse_elem;
  p.layers = layers;
  p.I0 = std::max(0, I - layers);
  p.I1 = std::min(hier.n_coarse() - 1, I + layers);
  p.J0 = std::max(0, J - layers);
  p.J1 = std::min(hier.n_coarse() - 1, J + layers);

  const int r = hier.refinement();
  p.i0 = p.I0 * r;
  p.i1 = (p.I1 + 1) * r;
  p.j0 = p.J0 * r;
  p.j1 = (p.J1 + 1) * r;

  p.nodes.reserve(static_cast<size_t>(p.n_nodes()));
  for (int j = p.j0; j <= p.j1; ++j)
    for (int i = p.i0; i <= p.i1; ++i) {
      const int id = hier.node_id(i, j);
      p.nodes.push_back(id);
      if (i > p.i0 && i < p.i1 && j > p.j0 && j < p.j1)
        p.interior_nodes.push_back(id);
      else
        p.boundary_nodes.push_back(id);
    }
  for (int j = p.j0; j < p.j1; ++j)
    for (int i = p.i0; i < p.i1; ++i) p.cells.push_back(hier.cell_id(i, j));
  return p;
}

namespace {

// Integral of (1-t)^2 + t^2 over [a, b].
double hat_sq_integral(double a, double b) {
  auto F = [](double t) { return (t * t * t - (1.0 - t) * (1.0 - t) * (1.0 - t)) / 3.0; };
  return F(b) - F(a);
}

}  // namespace

PartitionOfUnity::PartitionOfUnity(const GridHierarchy& hier) : hier_(&hier) {
  const int nc = hier.n_coarse();
  const int r = hier.refinement();
  const double Hx = hier.Hx(), Hy = hier.Hy();

  hats_.reserve(static_cast<size_t>(hier.n_coarse_nodes()));
  for (int Q = 0; Q <= nc; ++Q)
    for (int P = 0; P <= nc; ++P) {
      Hat hat;
      hat.coarse_node = Q * (nc + 1) + P;
      const int ilo = std::max(0, (P - 1) * r), ihi = std::min(hier.n_fine(), (P + 1) * r);
      const int jlo = std::max(0, (Q - 1) * r), jhi = std::min(hier.n_fine(), (Q + 1) * r);
      const double xP = hier.domain().x0 + P * Hx;
      const double yQ = hier.domain().y0 + Q * Hy;
      for (int j = jlo; j <= jhi; ++j)
        for (int i = ilo; i <= ihi; ++i) {
          const double vx = 1.0 - std::abs(hier.node_x(i) - xP) / Hx;
          const double vy = 1.0 - std::abs(hier.node_y(j) - yQ) / Hy;
          const double v = std::max(0.0, vx) * std::max(0.0, vy);
          if (v > 0.0) {
            hat.nodes.push_back(hier.node_id(i, j));
            hat.values.push_back(v);
          }
        }
      hats_.push_back(std::move(hat));
    }

  // Exact cell average of sum_k |grad chi_k|^2. Within one coarse element
  // with local coordinates (xi, eta) in [0,1]^2 the sum equals
  //   2[(1-xi)^2 + xi^2]/Hx^2 + 2[(1-eta)^2 + eta^2]/Hy^2,
  // a separable polynomial integrated exactly per fine cell.
  grad_sq_cell_.assign(static_cast<size_t>(hier.n_cells()), 0.0);
  for (int cell = 0; cell < hier.n_cells(); ++cell) {
    auto [i, j] = hier.cell_ij(cell);
    const double xa = static_cast<double>(i % r) / r, xb = static_cast<double>(i % r + 1) / r;
    const double ya = static_cast<double>(j % r) / r, yb = static_cast<double>(j % r + 1) / r;
    const double avg_x = hat_sq_integral(xa, xb) / (xb - xa);
    const double avg_y = hat_sq_integral(ya, yb) / (yb - ya);
    grad_sq_cell_[cell] = 2.0 * avg_x / (Hx * Hx) + 2.0 * avg_y / (Hy * Hy);
  }
}

double PartitionOfUnity::chi(int coarse_node, double x, double y) const {
  const int nc = hier_->n_coarse();
  const int P = coarse_node % (nc + 1), Q = coarse_node / (nc + 1);
  const double xP = hier_->domain().x0 + P * hier_->Hx();
  const double yQ = hier_->domain().y0 + Q * hier_->Hy();
  const double vx = 1.0 - std::abs(x - xP) / hier_->Hx();
  const double vy = 1.0 - std::abs(y - yQ) / hier_->Hy();
  return std::max(0.0, vx) * std::max(0.0, vy);
}

double PartitionOfUnity::sum_at_node(int fine_node) const {
  auto [i, j] = hier_->node_ij(fine_node);
  const double x = hier_->node_x(i), y = hier_->node_y(j);
  double s = 0.0;
  for (const auto& hat : hats_) s += chi(hat.coarse_node, x, y);
  return s;
}

double PartitionOfUnity::grad_sq_edge(int node_a, int node_b) const {
  auto [ia, ja] = hier_->node_ij(node_a);
  auto [ib, jb] = hier_->node_ij(node_b);
  if (std::abs(ia - ib) + std::abs(ja - jb) != 1)
    throw ConfigError("grad_sq_edge: nodes are not fine-grid neighbors");
  const int r = hier_->refinement();
  if (ja == jb) {
    // horizontal edge: tangential derivative in x, constant along the edge,
    // depends on the local eta of the gridline.
    const double eta = static_cast<double>(ja % r) / r;
    return 2.0 * ((1.0 - eta) * (1.0 - eta) + eta * eta) / (hier_->Hx() * hier_->Hx());
  }
  const double xi = static_cast<double>(ia % r) / r;
  return 2.0 * ((1.0 - xi) * (1.0 - xi) + xi * xi) / (hier_->Hy() * hier_->Hy());
}

PartitionOfUnity partition_of_unity(const GridHierarchy& hier) { return PartitionOfUnity(hier); }

}  // namespace cemdc
