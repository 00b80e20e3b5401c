#include <chrono>
#include <map>

#include "cemdc/analysis.hpp"
#include "cemdc/basis.hpp"

namespace cemdc {

namespace {

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

StudyReport run_convergence_study(const StudyConfig& cfg) {
  StudyReport report;
  SolverOptions sopts;
  sopts.mode = cfg.solver_direct ? SolverOptions::Mode::direct : SolverOptions::Mode::cg;
  sopts.tolerance = cfg.solver_tolerance;
  sopts.threads = cfg.threads;
  BasisOptions bopts;
  bopts.scope = cfg.constraint_scope_patch ? ConstraintScope::all_patch_elements
                                           : ConstraintScope::selected_element_only;
  bopts.threads = cfg.threads;

  const int maxL =
      *std::max_element(cfg.basis_per_element_list.begin(), cfg.basis_per_element_list.end());

  for (double contrast : cfg.contrast_list) {
    const GridHierarchy hier0 =
        GridHierarchy::with_fine(unit_square(), cfg.n_coarse_list.front(), cfg.n_fine);
    const MediaField media = make_media(cfg, hier0, contrast);

    SteadyProblem steady{&hier0, &media, cfg.f1.make(), cfg.f2.make()};
    // fine references are computed lazily inside the row guards so that a
    // breakdown aborts rows, not the study
    std::optional<BlockField> fine_steady;
    std::map<double, Trajectory> fine_trajectories;  // keyed by dt

    for (size_t iH = 0; iH < cfg.n_coarse_list.size(); ++iH) {
      const int n_coarse = cfg.n_coarse_list[iH];
      const GridHierarchy hier = GridHierarchy::with_fine(unit_square(), n_coarse, cfg.n_fine);
      const double H = hier.Hx();
      const double dt = cfg.transient_enabled
                            ? (cfg.dt_list.size() == 1 ? cfg.dt_list[0] : cfg.dt_list[iH])
                            : 0.0;
      const PartitionOfUnity pou(hier);
      const NormContext norms(hier, media, pou);

      std::optional<AuxiliarySpace> aux_max;
      for (int L : cfg.basis_per_element_list) {
        std::vector<int> m_values =
            cfg.layers_from_formula ? std::vector<int>{oversampling_layers(H)} : cfg.layers_list;
        for (int m : m_values) {
          StudyRow row;
          row.H = H;
          row.m = m;
          row.L = L;
          row.dt = dt;
          row.contrast = contrast;
          const auto t0 = std::chrono::steady_clock::now();
          try {
            if (!aux_max)
              aux_max = build_auxiliary_space(hier, media, pou, maxL, cfg.extra_eigenvalues,
                                              cfg.threads);
            const AuxiliarySpace aux = (L == maxL) ? *aux_max : aux_max->with_count(L);
            const CoarseSpace space = assemble_coarse_space(hier, media, aux, m, bopts);
            row.coarse_dim = space.dim();

            SteadyProblem prob{&hier, &media, cfg.f1.make(), cfg.f2.make()};
            if (!cfg.transient_enabled) {
              if (!fine_steady) fine_steady = solve_fine_steady(steady, sopts);
              const CoarseSolution ms = solve_ms_steady(prob, space, sopts);
              const RelativeErrors errs = relative_errors(norms, *fine_steady, ms.fine);
              row.aq_err_pct = errs.a_q_percent;
              row.l2_err_pct = errs.l2_percent;
            } else {
              TransientProblem tp{prob, cfg.initial1.make(), cfg.initial2.make(), cfg.final_time,
                                  dt};
              auto it = fine_trajectories.find(dt);
              if (it == fine_trajectories.end())
                it = fine_trajectories.emplace(dt, solve_fine_transient(tp, sopts)).first;
              const Trajectory& fine_traj = it->second;
              const Trajectory ms_traj = solve_ms_transient(tp, space, sopts);
              const RelativeErrors errs =
                  relative_errors(norms, fine_traj.states.back(), ms_traj.states.back());
              row.aq_err_pct = errs.a_q_percent;
              row.l2_err_pct = errs.l2_percent;
              row.combined_metric = transient_error_metric(norms, fine_traj, ms_traj);
            }
          } catch (const std::exception& ex) {
            row.error = ex.what();
          }
          row.wall_time_s = elapsed_s(t0);
          report.rows.push_back(std::move(row));
        }
      }
    }
  }

  // orders between consecutive H levels within a group; with the layer
  // formula m varies with H and is not part of the group key
  for (size_t r = 0; r < report.rows.size(); ++r) {
    StudyRow& row = report.rows[r];
    if (!row.error.empty()) continue;
    for (size_t p = r; p-- > 0;) {
      const StudyRow& prev = report.rows[p];
      if (!prev.error.empty()) continue;
      if (prev.contrast != row.contrast || prev.L != row.L) continue;
      if (!cfg.layers_from_formula && prev.m != row.m) continue;
      if (prev.H <= row.H) continue;
      row.aq_order = convergence_order(prev.aq_err_pct, row.aq_err_pct, prev.H, row.H);
      row.l2_order = convergence_order(prev.l2_err_pct, row.l2_err_pct, prev.H, row.H);
      break;
    }
  }
  return report;
}

}  // namespace cemdc
