#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cemdc/assembly.hpp"
#include "cemdc/config.hpp"
#include "cemdc/solver.hpp"

namespace cemdc {

enum class NormKind { c, a, q, a_q, s, l2 };

/// Caches the assembled global forms for one (hierarchy, media, pou) triple
/// and evaluates norms and seminorms; subdomain variants sum the
/// element-local forms over a set of coarse elements.
class NormContext {
public:
  NormContext(const GridHierarchy& hier, const MediaField& media, const PartitionOfUnity& pou);

  const GridHierarchy& hier() const { return *hier_; }
  double norm(const BlockField& field, NormKind kind) const;
  double norm(const BlockField& field, NormKind kind, const std::vector<int>& coarse_elems) const;

  const SparseOperator& op(NormKind kind) const;

private:
  const GridHierarchy* hier_;
  const MediaField* media_;
  const PartitionOfUnity* pou_;
  SparseOperator a_, q_, aq_, c_, s_, m_;
};

struct RelativeErrors {
  double a_q_percent;
  double l2_percent;
};

/// 100 * ||p - p_ms||_X / ||p||_X for X in {a_Q, L2}; throws NumericalError
/// when a reference norm vanishes.
RelativeErrors relative_errors(const NormContext& norms, const BlockField& p_fine,
                               const BlockField& p_ms);

/// ||p(T) - p_ms(T)||_c^2 + trapezoidal-in-time integral of
/// ||p - p_ms||_{a_Q}^2 over the shared stored time grid.
double transient_error_metric(const NormContext& norms, const Trajectory& fine,
                              const Trajectory& ms);

/// log(e_coarse / e_fine) / log(H_coarse / H_fine).
double convergence_order(double err_coarse, double err_fine, double H_coarse, double H_fine);

struct StudyRow {
  double H = 0.0;
  int m = 0;
  int L = 0;
  double dt = 0.0;        // 0 for steady rows
  double contrast = 1.0;
  double aq_err_pct = 0.0;
  double l2_err_pct = 0.0;
  double aq_order = std::numeric_limits<double>::quiet_NaN();
  double l2_order = std::numeric_limits<double>::quiet_NaN();
  double combined_metric = 0.0;  // transient Theorem-style metric (not a CSV column)
  double wall_time_s = 0.0;
  int coarse_dim = 0;
  std::string error;  // nonempty when the row aborted
};

struct StudyReport {
  std::vector<StudyRow> rows;
  /// CSV with the pinned header
  /// H,m,L,dt,aQ_err_pct,aQ_order,L2_err_pct,L2_order,contrast,wall_time_s.
  std::string to_csv() const;
};

/// Runs the configured sweep: for each contrast the media is generated once
/// on the fixed fine grid and the fine reference is solved once; every
/// (H, L, m) combination then contributes one row. A failing combination
/// aborts only its own row, with the reason recorded. Orders are computed
/// between consecutive H levels within each (contrast, L, m-policy) group.
StudyReport run_convergence_study(const StudyConfig& cfg);

}  // namespace cemdc
