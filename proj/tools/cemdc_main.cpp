// Command-line front end: configuration-driven solves, studies, and
// diagnostics. Every run writes its outputs plus a manifest (resolved
// configuration, versions, stage timings) into the output directory.
#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "cemdc/analysis.hpp"
#include "cemdc/basis.hpp"
#include "cemdc/io.hpp"
#include "cemdc/solver.hpp"
#include "cemdc/version.hpp"

namespace fs = std::filesystem;
using namespace cemdc;

namespace {

struct RunContext {
  std::string config_path;
  std::string output_dir;
  StudyConfig cfg;
  bool seedless = false;
  int verbosity = 1;  // 0 quiet, 1 normal, 2 debug
  std::vector<std::pair<std::string, double>> timings;
  std::string subcommand;

  void log(int level, const std::string& msg) const {
    if (verbosity >= level) std::cout << msg << '\n';
  }
};

class StageTimer {
public:
  StageTimer(RunContext& ctx, std::string name)
      : ctx_(ctx), name_(std::move(name)), t0_(std::chrono::steady_clock::now()) {}
  ~StageTimer() {
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    ctx_.timings.emplace_back(name_, s);
    ctx_.log(2, "  [" + name_ + "] " + std::to_string(s) + " s");
  }

private:
  RunContext& ctx_;
  std::string name_;
  std::chrono::steady_clock::time_point t0_;
};

void write_manifest(const RunContext& ctx) {
  std::ostringstream os;
  char buf[64];
  os << "cemdc " << version_string << '\n';
  os << "subcommand: " << ctx.subcommand << '\n';
  os << "config: " << ctx.config_path << '\n';
  os << "seedless: " << (ctx.seedless ? "asserted (the pipeline draws no random numbers)" : "not requested")
     << '\n';
  os << "threads: " << ctx.cfg.threads << '\n';
  for (const auto& w : ctx.cfg.warnings) os << "warning: " << w << '\n';
  os << "--- resolved configuration ---\n";
  os << ctx.cfg.echo();
  os << "--- stage timings (s) ---\n";
  for (const auto& [name, secs] : ctx.timings) {
    std::snprintf(buf, sizeof buf, "%.3f", secs);
    os << name << ": " << buf << '\n';
  }
  write_text_file((fs::path(ctx.output_dir) / "manifest.txt").string(), os.str());
}

GridHierarchy first_hierarchy(const StudyConfig& cfg) {
  return GridHierarchy::with_fine(unit_square(), cfg.n_coarse_list.front(), cfg.n_fine);
}

int first_layers(const StudyConfig& cfg, double H) {
  return cfg.layers_from_formula ? oversampling_layers(H) : cfg.layers_list.front();
}

SolverOptions solver_options(const StudyConfig& cfg) {
  SolverOptions o;
  o.mode = cfg.solver_direct ? SolverOptions::Mode::direct : SolverOptions::Mode::cg;
  o.tolerance = cfg.solver_tolerance;
  o.threads = cfg.threads;
  return o;
}

BasisOptions basis_options(const StudyConfig& cfg) {
  BasisOptions o;
  o.scope = cfg.constraint_scope_patch ? ConstraintScope::all_patch_elements
                                       : ConstraintScope::selected_element_only;
  o.threads = cfg.threads;
  return o;
}

// A one-row error report for the single-solve subcommands.
void write_single_row_csv(const RunContext& ctx, const StudyRow& row) {
  StudyReport report;
  report.rows.push_back(row);
  write_text_file((fs::path(ctx.output_dir) / "errors.csv").string(), report.to_csv());
}

void run_solve_steady(RunContext& ctx) {
  const StudyConfig& cfg = ctx.cfg;
  GridHierarchy hier = first_hierarchy(cfg);
  const double contrast = cfg.contrast_list.front();
  MediaField media = make_media(cfg, hier, contrast);
  PartitionOfUnity pou(hier);
  SteadyProblem prob{&hier, &media, cfg.f1.make(), cfg.f2.make()};

  StudyRow row;
  row.H = hier.Hx();
  row.L = cfg.basis_per_element_list.front();
  row.m = first_layers(cfg, hier.Hx());
  row.contrast = contrast;
  const auto t0 = std::chrono::steady_clock::now();

  BlockField fine;
  {
    StageTimer t(ctx, "fine solve");
    fine = solve_fine_steady(prob, solver_options(cfg));
  }
  CoarseSolution ms;
  {
    StageTimer t(ctx, "auxiliary space + basis + coarse solve");
    AuxiliarySpace aux =
        build_auxiliary_space(hier, media, pou, row.L, cfg.extra_eigenvalues, cfg.threads);
    CoarseSpace space = assemble_coarse_space(hier, media, aux, row.m, basis_options(cfg));
    row.coarse_dim = space.dim();
    ms = solve_ms_steady(prob, space, solver_options(cfg));
  }
  {
    StageTimer t(ctx, "errors + output");
    NormContext norms(hier, media, pou);
    const RelativeErrors errs = relative_errors(norms, fine, ms.fine);
    row.aq_err_pct = errs.a_q_percent;
    row.l2_err_pct = errs.l2_percent;
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_single_row_csv(ctx, row);
    if (cfg.write_vtk) {
      write_vtk_field(hier, fine, (fs::path(ctx.output_dir) / "p_fine.vtk").string());
      write_vtk_field(hier, ms.fine, (fs::path(ctx.output_dir) / "p_ms.vtk").string());
    }
  }
  ctx.log(1, "steady solve: a_Q error " + std::to_string(row.aq_err_pct) + "%, L2 error " +
                  std::to_string(row.l2_err_pct) + "%");
}

void run_solve_transient(RunContext& ctx) {
  const StudyConfig& cfg = ctx.cfg;
  if (!cfg.transient_enabled)
    throw ConfigError("solve-transient: the configuration has transient.enabled = false");
  GridHierarchy hier = first_hierarchy(cfg);
  const double contrast = cfg.contrast_list.front();
  MediaField media = make_media(cfg, hier, contrast);
  PartitionOfUnity pou(hier);
  const double dt = cfg.dt_list.front();

  StudyRow row;
  row.H = hier.Hx();
  row.L = cfg.basis_per_element_list.front();
  row.m = first_layers(cfg, hier.Hx());
  row.dt = dt;
  row.contrast = contrast;
  const auto t0 = std::chrono::steady_clock::now();

  TransientProblem tp{{&hier, &media, cfg.f1.make(), cfg.f2.make()},
                      cfg.initial1.make(),
                      cfg.initial2.make(),
                      cfg.final_time,
                      dt};
  Trajectory fine, ms;
  {
    StageTimer t(ctx, "fine trajectory");
    fine = solve_fine_transient(tp, solver_options(cfg), cfg.output_times);
  }
  {
    StageTimer t(ctx, "auxiliary space + basis + coarse trajectory");
    AuxiliarySpace aux =
        build_auxiliary_space(hier, media, pou, row.L, cfg.extra_eigenvalues, cfg.threads);
    CoarseSpace space = assemble_coarse_space(hier, media, aux, row.m, basis_options(cfg));
    row.coarse_dim = space.dim();
    ms = solve_ms_transient(tp, space, solver_options(cfg), cfg.output_times);
  }
  {
    StageTimer t(ctx, "errors + output");
    NormContext norms(hier, media, pou);
    const RelativeErrors errs = relative_errors(norms, fine.states.back(), ms.states.back());
    row.aq_err_pct = errs.a_q_percent;
    row.l2_err_pct = errs.l2_percent;
    row.combined_metric = transient_error_metric(norms, fine, ms);
    row.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_single_row_csv(ctx, row);

    // norm time series over the stored grid
    std::ostringstream os;
    os << "time,fine_c_norm,ms_c_norm,diff_aq_norm\n";
    char buf[160];
    for (size_t k = 0; k < fine.times.size(); ++k) {
      BlockField diff = fine.states[k];
      diff.values -= ms.states[k].values;
      std::snprintf(buf, sizeof buf, "%.10g,%.17g,%.17g,%.17g\n", fine.times[k],
                    norms.norm(fine.states[k], NormKind::c), norms.norm(ms.states[k], NormKind::c),
                    norms.norm(diff, NormKind::a_q));
      os << buf;
    }
    write_text_file((fs::path(ctx.output_dir) / "norms.csv").string(), os.str());

    if (cfg.write_vtk)
      for (size_t k = 0; k < ms.times.size(); ++k) {
        std::snprintf(buf, sizeof buf, "p_ms_%04zu.vtk", k);
        write_vtk_field(hier, ms.states[k], (fs::path(ctx.output_dir) / buf).string());
      }
  }
  ctx.log(1, "transient solve: a_Q error at T " + std::to_string(row.aq_err_pct) +
                  "%, combined metric " + std::to_string(row.combined_metric));
}

void run_study(RunContext& ctx) {
  StudyReport report;
  {
    StageTimer t(ctx, "convergence study");
    report = run_convergence_study(ctx.cfg);
  }
  write_text_file((fs::path(ctx.output_dir) / "study.csv").string(), report.to_csv());
  int failed = 0;
  for (const auto& row : report.rows) failed += !row.error.empty();
  ctx.log(1, "study: " + std::to_string(report.rows.size()) + " rows, " + std::to_string(failed) +
                  " aborted; table written to study.csv");
  if (failed > 0)
    for (const auto& row : report.rows)
      if (!row.error.empty()) ctx.log(1, "  aborted row H=" + std::to_string(row.H) + ": " + row.error);
}

void run_spectrum(RunContext& ctx) {
  const StudyConfig& cfg = ctx.cfg;
  GridHierarchy hier = first_hierarchy(cfg);
  MediaField media = make_media(cfg, hier, cfg.contrast_list.front());
  PartitionOfUnity pou(hier);
  std::optional<AuxiliarySpace> aux;
  {
    StageTimer t(ctx, "local eigensolves");
    aux = build_auxiliary_space(hier, media, pou, cfg.basis_per_element_list.front(),
                                cfg.extra_eigenvalues, cfg.threads);
  }
  write_spectrum_csv(*aux, (fs::path(ctx.output_dir) / "spectrum.csv").string());
  ctx.log(1, "spectrum: Lambda = " + std::to_string(aux->lambda_min_discarded()) +
                  ", lambda_max = " + std::to_string(aux->lambda_max_kept()));
}

void run_basis(RunContext& ctx, int element, int layers_override) {
  const StudyConfig& cfg = ctx.cfg;
  GridHierarchy hier = first_hierarchy(cfg);
  MediaField media = make_media(cfg, hier, cfg.contrast_list.front());
  PartitionOfUnity pou(hier);
  if (element < 0) element = hier.coarse_elem_id(hier.n_coarse() / 2, hier.n_coarse() / 2);
  const int m = layers_override > 0 ? layers_override : first_layers(cfg, hier.Hx());
  const int L = cfg.basis_per_element_list.front();

  StageTimer t(ctx, "basis construction");
  AuxiliarySpace aux = build_auxiliary_space(hier, media, pou, L, cfg.extra_eigenvalues, cfg.threads);
  ElementBasis eb = build_element_basis(hier, media, aux, element, m, basis_options(cfg));
  char buf[96];
  for (int k = 0; k < eb.count(); ++k) {
    BlockField col = BlockField::zero(hier.n_nodes());
    const int n_loc = eb.patch.n_nodes();
    for (int c = 0; c < 2; ++c)
      for (int l = 0; l < n_loc; ++l) col(c, eb.patch.nodes[l]) = eb.values(c * n_loc + l, k);
    std::snprintf(buf, sizeof buf, "psi_elem%03d_k%d_m%d.vtk", element, k + 1, m);
    write_vtk_field(hier, col, (fs::path(ctx.output_dir) / buf).string(), "psi1", "psi2");
  }
  ctx.log(1, "basis: wrote " + std::to_string(eb.count()) + " functions for element " +
                  std::to_string(element) + " at m=" + std::to_string(m));
}

void run_decay(RunContext& ctx, int element, int k_index) {
  const StudyConfig& cfg = ctx.cfg;
  GridHierarchy hier = first_hierarchy(cfg);
  MediaField media = make_media(cfg, hier, cfg.contrast_list.front());
  PartitionOfUnity pou(hier);
  if (element < 0) element = hier.coarse_elem_id(hier.n_coarse() / 2, hier.n_coarse() / 2);
  std::vector<int> m_list = cfg.layers_from_formula ? std::vector<int>{} : cfg.layers_list;
  if (m_list.empty())
    for (int m = 1; m <= std::max(2, oversampling_layers(hier.Hx())); ++m) m_list.push_back(m);

  StageTimer t(ctx, "decay measurement");
  AuxiliarySpace aux = build_auxiliary_space(hier, media, pou, cfg.basis_per_element_list.front(),
                                             cfg.extra_eigenvalues, cfg.threads);
  auto rows = measure_decay(hier, media, aux, element, k_index, m_list, basis_options(cfg));
  write_decay_csv(rows, (fs::path(ctx.output_dir) / "decay.csv").string());
  ctx.log(1, "decay: wrote " + std::to_string(rows.size()) + " rows for element " +
                  std::to_string(element) + ", k=" + std::to_string(k_index + 1));
}

}  // namespace

int main(int argc, char** argv) {
  // avoid BLAS-internal oversubscription; worker parallelism is explicit
  setenv("OPENBLAS_NUM_THREADS", "1", /*overwrite=*/0);

  CLI::App app{"Constraint-energy-minimizing multiscale solver for the dual-continuum model"};
  app.require_subcommand(1);

  std::string config_path, output_dir;
  int threads = 0;
  bool seedless = false, strict = true;
  int verbosity = 1;
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--output", output_dir, "output directory (default: from the configuration)");
  app.add_option("--threads", threads, "worker threads (overrides the configuration)");
  app.add_flag("--seedless", seedless, "assert that the run uses no randomness");
  app.add_flag("!--no-strict", strict, "tolerate unknown configuration keys");
  app.add_option("-v,--verbosity", verbosity, "0 = quiet, 1 = normal, 2 = debug");

  auto* solve_steady_cmd = app.add_subcommand("solve-steady", "one steady solve, fine vs coarse");
  auto* solve_transient_cmd =
      app.add_subcommand("solve-transient", "one transient solve, fine vs coarse");
  auto* study_cmd = app.add_subcommand("study", "convergence study over the configured sweep");
  auto* spectrum_cmd = app.add_subcommand("spectrum", "local eigenvalue report");
  auto* basis_cmd = app.add_subcommand("basis", "export multiscale basis functions");
  auto* decay_cmd = app.add_subcommand("decay", "basis localization decay table");
  for (auto* sub : {solve_steady_cmd, solve_transient_cmd, study_cmd, spectrum_cmd, basis_cmd,
                    decay_cmd})
    sub->fallthrough();

  int element = -1, k_index = 1, layers_override = 0;
  basis_cmd->add_option("--element", element, "coarse element id (default: center)");
  basis_cmd->add_option("--layers", layers_override, "oversampling layers (default: formula)");
  decay_cmd->add_option("--element", element, "coarse element id (default: center)");
  decay_cmd->add_option("--k", k_index, "eigenfunction index, 1-based (default: 1)");

  CLI11_PARSE(app, argc, argv);

  RunContext ctx;
  ctx.config_path = config_path;
  ctx.seedless = seedless;
  ctx.verbosity = verbosity;
  try {
    ctx.cfg = validate_config(config_path, strict);
    if (threads > 0) ctx.cfg.threads = threads;
    ctx.output_dir = output_dir.empty() ? ctx.cfg.output_directory : output_dir;
    fs::create_directories(ctx.output_dir);
    for (const auto& w : ctx.cfg.warnings) std::cerr << "warning: " << w << '\n';
    ctx.log(2, "resolved configuration:\n" + ctx.cfg.echo());

    if (solve_steady_cmd->parsed()) {
      ctx.subcommand = "solve-steady";
      run_solve_steady(ctx);
    } else if (solve_transient_cmd->parsed()) {
      ctx.subcommand = "solve-transient";
      run_solve_transient(ctx);
    } else if (study_cmd->parsed()) {
      ctx.subcommand = "study";
      run_study(ctx);
    } else if (spectrum_cmd->parsed()) {
      ctx.subcommand = "spectrum";
      run_spectrum(ctx);
    } else if (basis_cmd->parsed()) {
      ctx.subcommand = "basis";
      run_basis(ctx, element, layers_override);
    } else if (decay_cmd->parsed()) {
      ctx.subcommand = "decay";
      run_decay(ctx, element, k_index - 1);
    }
    write_manifest(ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return static_cast<int>(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
