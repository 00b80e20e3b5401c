#include "cemdc/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cemdc {

NormContext::NormContext(const GridHierarchy& hier, const MediaField& media,
                         const PartitionOfUnity& pou)
    : hier_(&hier), media_(&media), pou_(&pou) {
  media.check_compatible(hier);
  a_ = assemble_stiffness(hier, media, 0) + assemble_stiffness(hier, media, 1);
  q_ = assemble_exchange(hier, media);
  aq_ = a_ + q_;
  c_ = assemble_capacity(hier, media);
  s_ = assemble_weighted_mass_s(hier, media, pou);
  m_ = assemble_mass(hier);
}

const SparseOperator& NormContext::op(NormKind kind) const {
  switch (kind) {
    case NormKind::a: return a_;
    case NormKind::q: return q_;
    case NormKind::a_q: return aq_;
    case NormKind::c: return c_;
    case NormKind::s: return s_;
    case NormKind::l2: return m_;
  }
  throw ConfigError("norm: unknown kind");
}

double NormContext::norm(const BlockField& field, NormKind kind) const {
  const double qf = op(kind).quadratic_form(field.values);
  return std::sqrt(std::max(0.0, qf));
}

double NormContext::norm(const BlockField& field, NormKind kind,
                         const std::vector<int>& coarse_elems) const {
  double total = 0.0;
  for (int j : coarse_elems) {
    Patch kp = oversample(*hier_, j, 0);
    SparseOperator local;
    switch (kind) {
      case NormKind::a:
        local = assemble_stiffness(*hier_, *media_, 0, &kp) +
                assemble_stiffness(*hier_, *media_, 1, &kp);
        break;
      case NormKind::q: local = assemble_exchange(*hier_, *media_, &kp); break;
      case NormKind::a_q: local = assemble_a_q(*hier_, *media_, &kp); break;
      case NormKind::c: local = assemble_capacity(*hier_, *media_, &kp); break;
      case NormKind::s: local = assemble_weighted_mass_s(*hier_, *media_, *pou_, &kp); break;
      case NormKind::l2: local = assemble_mass(*hier_, &kp); break;
    }
    const int n_loc = kp.n_nodes();
    Eigen::VectorXd v(2 * n_loc);
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) v[c * n_loc + l] = field(c, kp.nodes[l]);
    total += v.dot(local.matrix * v);
  }
  return std::sqrt(std::max(0.0, total));
}

RelativeErrors relative_errors(const NormContext& norms, const BlockField& p_fine,
                               const BlockField& p_ms) {
  if (p_fine.size() != p_ms.size()) throw ConfigError("relative_errors: dof layout mismatch");
  BlockField diff = p_fine;
  diff.values -= p_ms.values;
  const double ref_aq = norms.norm(p_fine, NormKind::a_q);
  const double ref_l2 = norms.norm(p_fine, NormKind::l2);
  if (ref_aq == 0.0 || ref_l2 == 0.0)
    throw NumericalError("relative_errors: reference norm is zero, relative error undefined");
  return {100.0 * norms.norm(diff, NormKind::a_q) / ref_aq,
          100.0 * norms.norm(diff, NormKind::l2) / ref_l2};
}

double transient_error_metric(const NormContext& norms, const Trajectory& fine,
                              const Trajectory& ms) {
  if (fine.times.size() != ms.times.size())
    throw ConfigError("transient_error_metric: trajectories do not share a time grid");
  for (size_t k = 0; k < fine.times.size(); ++k)
    if (std::abs(fine.times[k] - ms.times[k]) > 1e-10 * std::max(1.0, fine.times.back()))
      throw ConfigError("transient_error_metric: trajectories do not share a time grid");

  std::vector<double> sq(fine.times.size());
  for (size_t k = 0; k < fine.times.size(); ++k) {
    BlockField diff = fine.states[k];
    diff.values -= ms.states[k].values;
    const double naq = norms.norm(diff, NormKind::a_q);
    sq[k] = naq * naq;
  }
  double integral = 0.0;
  for (size_t k = 0; k + 1 < fine.times.size(); ++k)
    integral += 0.5 * (sq[k] + sq[k + 1]) * (fine.times[k + 1] - fine.times[k]);

  BlockField diff_T = fine.states.back();
  diff_T.values -= ms.states.back().values;
  const double cT = norms.norm(diff_T, NormKind::c);
  return cT * cT + integral;
}

double convergence_order(double err_coarse, double err_fine, double H_coarse, double H_fine) {
  return std::log(err_coarse / err_fine) / std::log(H_coarse / H_fine);
}

std::string StudyReport::to_csv() const {
  std::ostringstream os;
  os << "H,m,L,dt,aQ_err_pct,aQ_order,L2_err_pct,L2_order,contrast,wall_time_s\n";
  char buf[64];
  auto num = [&buf](double v, const char* fmt) {
    std::snprintf(buf, sizeof buf, fmt, v);
    return std::string(buf);
  };
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      os << num(r.H, "%.10g") << ',' << r.m << ',' << r.L << ',' << num(r.dt, "%.10g")
         << ",,,,," << num(r.contrast, "%.10g") << ",  # aborted: " << r.error << '\n';
      continue;
    }
    os << num(r.H, "%.10g") << ',' << r.m << ',' << r.L << ',' << num(r.dt, "%.10g") << ','
       << num(r.aq_err_pct, "%.6f") << ',';
    if (std::isfinite(r.aq_order)) os << num(r.aq_order, "%.4f");
    os << ',' << num(r.l2_err_pct, "%.6f") << ',';
    if (std::isfinite(r.l2_order)) os << num(r.l2_order, "%.4f");
    os << ',' << num(r.contrast, "%.10g") << ',' << num(r.wall_time_s, "%.3f") << '\n';
  }
  return os.str();
}

}  // namespace cemdc
