#pragma once

#include <optional>
#include <vector>

#include "cemdc/assembly.hpp"
#include "cemdc/basis.hpp"

namespace cemdc {

struct SteadyProblem {
  const GridHierarchy* hier = nullptr;
  const MediaField* media = nullptr;
  ScalarFunction f1, f2;  // homogeneous Dirichlet walls
};

struct TransientProblem {
  SteadyProblem steady;
  ScalarFunction p0_1, p0_2;  // initial condition, interpolated at fine nodes
  double final_time = 1.0;
  double dt = 0.1;
};

struct SolverOptions {
  enum class Mode { direct, cg } mode = Mode::direct;
  double tolerance = 1e-10;
  int max_iterations = 20000;
  int threads = 1;
};

/// Fine-grid steady solve of a_Q(p, v) = (f, v); relative residual is
/// verified against the tolerance. The CG path is Jacobi-preconditioned and
/// reports its residual history on failure.
BlockField solve_fine_steady(const SteadyProblem& prob, const SolverOptions& opts = {});

struct CoarseSolution {
  Eigen::VectorXd coeffs;  // coordinates in the multiscale basis
  BlockField fine;         // prolongated field
};

/// Coarse Galerkin solve (Psi^T A_Q Psi) c = Psi^T b.
CoarseSolution solve_ms_steady(const SteadyProblem& prob, const CoarseSpace& space,
                               const SolverOptions& opts = {});

/// Backward-Euler trajectory. `times` and `states` include the initial state
/// and every stored step; `c_norms` records ||p^n||_c after every step
/// (dissipation monitoring). When dt does not divide the final time evenly
/// the last step is shortened to land exactly on T.
struct Trajectory {
  std::vector<double> times;
  std::vector<BlockField> states;
  std::vector<double> c_norms;  // one per step, aligned with times[1..]
};

/// Stores every step unless `output_times` is given (then the initial state,
/// the requested times snapped to step boundaries, and T are stored).
Trajectory solve_fine_transient(const TransientProblem& prob, const SolverOptions& opts = {},
                                const std::vector<double>& output_times = {});

Trajectory solve_ms_transient(const TransientProblem& prob, const CoarseSpace& space,
                              const SolverOptions& opts = {},
                              const std::vector<double>& output_times = {});

}  // namespace cemdc
