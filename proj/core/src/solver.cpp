#include "cemdc/solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Sparse>
#include <Eigen/UmfPackSupport>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cemdc {

namespace {

// Jacobi-preconditioned CG with a recorded residual history.
Eigen::VectorXd pcg_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                          double tol, int max_iter) {
  const double bnorm = b.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  if (bnorm == 0.0) return x;
  Eigen::VectorXd inv_diag = A.diagonal().cwiseInverse();
  Eigen::VectorXd r = b;
  Eigen::VectorXd z = inv_diag.cwiseProduct(r);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  std::vector<double> history;
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXd Ap = A * p;
    const double alpha = rz / p.dot(Ap);
    x += alpha * p;
    r -= alpha * Ap;
    const double rel = r.norm() / bnorm;
    history.push_back(rel);
    if (rel <= tol) return x;
    z = inv_diag.cwiseProduct(r);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  std::ostringstream os;
  os << "cg: no convergence after " << max_iter << " iterations; residual history (last 5):";
  for (size_t k = history.size() >= 5 ? history.size() - 5 : 0; k < history.size(); ++k)
    os << ' ' << history[k];
  throw NumericalError(os.str());
}

Eigen::VectorXd direct_solve(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                             const char* what) {
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError(std::string(what) + ": sparse factorization failed");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw NumericalError(std::string(what) + ": sparse solve failed");
  // one step of iterative refinement; at high contrast the raw factorization
  // residual sits near the measurement floor
  x += lu.solve((b - A * x).eval());
  return x;
}

// normwise backward error ||r|| / (||A||_inf ||x|| + ||b||)
double backward_error(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& b) {
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(A.rows());
  for (int o = 0; o < A.outerSize(); ++o)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, o); it; ++it)
      row_sums[it.row()] += std::abs(it.value());
  const double scale = row_sums.maxCoeff() * x.norm() + b.norm();
  if (scale == 0.0) return 0.0;
  return (A * x - b).norm() / scale;
}

struct FineSystem {
  SparseOperator aq;                   // constrained
  BlockField rhs;                      // constrained
  std::vector<unsigned char> mask;
};

FineSystem assemble_fine(const SteadyProblem& prob) {
  prob.media->check_compatible(*prob.hier);
  FineSystem sys;
  sys.aq = assemble_a_q(*prob.hier, *prob.media);
  sys.rhs = assemble_load(*prob.hier, prob.f1, prob.f2, prob.media->rho());
  sys.mask = global_dirichlet_mask(*prob.hier);
  apply_dirichlet(sys.aq, sys.mask);
  apply_dirichlet(sys.rhs, sys.mask);
  return sys;
}

BlockField interpolate_nodal(const GridHierarchy& hier, const ScalarFunction& g1,
                             const ScalarFunction& g2) {
  BlockField f = BlockField::zero(hier.n_nodes());
  for (int n = 0; n < hier.n_nodes(); ++n) {
    auto [i, j] = hier.node_ij(n);
    const double x = hier.node_x(i), y = hier.node_y(j);
    f(0, n) = g1(x, y);
    f(1, n) = g2(x, y);
  }
  return f;
}

bool want_time(const std::vector<double>& output_times, double t, double T, double dt) {
  if (output_times.empty()) return true;
  if (std::abs(t - T) < 1e-12 * std::max(1.0, T)) return true;
  for (double w : output_times)
    if (std::abs(t - w) <= 0.5 * dt) return true;
  return false;
}

}  // namespace

BlockField solve_fine_steady(const SteadyProblem& prob, const SolverOptions& opts) {
  FineSystem sys = assemble_fine(prob);
  BlockField p = BlockField::zero(prob.hier->n_nodes());
  if (opts.mode == SolverOptions::Mode::cg)
    p.values = pcg_solve(sys.aq.matrix, sys.rhs.values, opts.tolerance, opts.max_iterations);
  else
    p.values = direct_solve(sys.aq.matrix, sys.rhs.values, "steady solve");
  const double eta = backward_error(sys.aq.matrix, p.values, sys.rhs.values);
  if (eta > 1e-10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", eta);
    throw NumericalError(std::string("steady solve: relative residual ") + buf + " above 1e-10");
  }
  return p;
}

CoarseSolution solve_ms_steady(const SteadyProblem& prob, const CoarseSpace& space,
                               const SolverOptions& opts) {
  prob.media->check_compatible(*prob.hier);
  SparseOperator aq = assemble_a_q(*prob.hier, *prob.media);
  BlockField b = assemble_load(*prob.hier, prob.f1, prob.f2, prob.media->rho());
  // basis functions vanish on the walls, so the unconstrained forms agree
  // with the constrained ones on the coarse space
  const Eigen::MatrixXd G = space.gram(aq, opts.threads);
  const Eigen::VectorXd rhs = space.restrict_to_coarse(b.values);

  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw NumericalError("coarse solve: Gram matrix is not positive definite "
                         "(coarse space is ill-conditioned)");
  CoarseSolution sol;
  sol.coeffs = llt.solve(rhs);
  sol.fine = space.prolongate(sol.coeffs);
  return sol;
}

Trajectory solve_fine_transient(const TransientProblem& prob,
                                [[maybe_unused]] const SolverOptions& opts,
                                const std::vector<double>& output_times) {
  // time stepping always factors the (time-independent) system once and
  // reuses it, so the iterative mode does not apply here
  const SteadyProblem& sp = prob.steady;
  if (prob.final_time <= 0.0 || prob.dt <= 0.0 || prob.dt > prob.final_time)
    throw ConfigError("transient: need 0 < dt <= T");
  sp.media->check_compatible(*sp.hier);

  SparseOperator aq = assemble_a_q(*sp.hier, *sp.media);
  SparseOperator cap = assemble_capacity(*sp.hier, *sp.media);
  BlockField load = assemble_load(*sp.hier, sp.f1, sp.f2, sp.media->rho());
  const auto mask = global_dirichlet_mask(*sp.hier);
  apply_dirichlet(load, mask);

  auto make_system = [&](double dt) {
    SparseOperator sys;
    sys.matrix = cap.matrix / dt + aq.matrix;
    sys.dofs = aq.dofs;
    apply_dirichlet(sys, mask);
    return sys;
  };

  BlockField p = interpolate_nodal(*sp.hier, prob.p0_1, prob.p0_2);
  apply_dirichlet(p, mask);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(p);

  SparseOperator sys = make_system(prob.dt);
  Eigen::UmfPackLU<Eigen::SparseMatrix<double>> lu(sys.matrix);
  if (lu.info() != Eigen::Success) throw NumericalError("transient: factorization failed");

  double t = 0.0;
  double dt = prob.dt;
  bool short_step = false;
  while (t < prob.final_time - 1e-12 * prob.final_time) {
    double step = dt;
    if (t + dt > prob.final_time + 1e-12 * prob.final_time) {
      step = prob.final_time - t;  // shortened last step
      if (!short_step) {
        sys = make_system(step);
        lu.compute(sys.matrix);
        if (lu.info() != Eigen::Success) throw NumericalError("transient: refactorization failed");
        short_step = true;
      }
    }
    Eigen::VectorXd rhs = cap.matrix * p.values / step + load.values;
    for (size_t d = 0; d < mask.size(); ++d)
      if (mask[d]) rhs[d] = 0.0;
    p.values = lu.solve(rhs);
    if (lu.info() != Eigen::Success || !p.values.allFinite())
      throw NumericalError("transient: step solve failed at t=" + std::to_string(t));
    t += step;
    traj.c_norms.push_back(std::sqrt(p.values.dot(cap.matrix * p.values)));
    if (want_time(output_times, t, prob.final_time, prob.dt)) {
      traj.times.push_back(t);
      traj.states.push_back(p);
    }
  }
  return traj;
}

Trajectory solve_ms_transient(const TransientProblem& prob, const CoarseSpace& space,
                              const SolverOptions& opts, const std::vector<double>& output_times) {
  const SteadyProblem& sp = prob.steady;
  if (prob.final_time <= 0.0 || prob.dt <= 0.0 || prob.dt > prob.final_time)
    throw ConfigError("transient: need 0 < dt <= T");
  sp.media->check_compatible(*sp.hier);

  SparseOperator aq = assemble_a_q(*sp.hier, *sp.media);
  SparseOperator cap = assemble_capacity(*sp.hier, *sp.media);
  BlockField load = assemble_load(*sp.hier, sp.f1, sp.f2, sp.media->rho());

  const Eigen::MatrixXd G = space.gram(aq, opts.threads);
  const Eigen::MatrixXd Cc = space.gram(cap, opts.threads);
  const Eigen::VectorXd bc = space.restrict_to_coarse(load.values);

  // L2-projection of the initial condition onto the coarse space in the
  // capacity inner product, the natural transient pairing
  BlockField p0 = interpolate_nodal(*sp.hier, prob.p0_1, prob.p0_2);
  apply_dirichlet(p0, global_dirichlet_mask(*sp.hier));
  Eigen::VectorXd c;
  {
    Eigen::LDLT<Eigen::MatrixXd> cc_ldlt(Cc);
    if (cc_ldlt.info() != Eigen::Success)
      throw NumericalError("coarse transient: capacity Gram factorization failed");
    c = cc_ldlt.solve(space.restrict_to_coarse(cap.matrix * p0.values));
  }

  auto factor = [&](double dt) {
    Eigen::LDLT<Eigen::MatrixXd> f(Cc / dt + G);
    if (f.info() != Eigen::Success)
      throw NumericalError("coarse transient: system factorization failed");
    return f;
  };

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(space.prolongate(c));

  Eigen::LDLT<Eigen::MatrixXd> ldlt = factor(prob.dt);
  double t = 0.0;
  bool short_step = false;
  while (t < prob.final_time - 1e-12 * prob.final_time) {
    double step = prob.dt;
    if (t + step > prob.final_time + 1e-12 * prob.final_time) {
      step = prob.final_time - t;
      if (!short_step) {
        ldlt = factor(step);
        short_step = true;
      }
    }
    c = ldlt.solve(Cc * c / step + bc).eval();
    t += step;
    traj.c_norms.push_back(std::sqrt(c.dot(Cc * c)));
    if (want_time(output_times, t, prob.final_time, prob.dt)) {
      traj.times.push_back(t);
      traj.states.push_back(space.prolongate(c));
    }
  }
  return traj;
}

}  // namespace cemdc
