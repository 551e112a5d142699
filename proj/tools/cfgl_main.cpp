#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "cfgl/config.hpp"

namespace fs = std::filesystem;
using namespace cfgl;

namespace {

harness::ReferenceSnapshot snapshot_of(const config::RunConfig& cfg,
                                       const scheme::ProblemSpec& spec,
                                       const scheme::FieldPair& state, size_t level,
                                       size_t M) {
  harness::ReferenceSnapshot snap;
  snap.alpha = spec.alpha;
  snap.a = spec.a;
  snap.b = spec.b;
  snap.T = spec.T;
  snap.M = M;
  snap.N = level;
  snap.scheme_order = cfg.scheme_order;
  snap.config_hash = config::config_hash(cfg);
  snap.final = state;
  return snap;
}

int run_solve(const config::RunConfig& cfg, const fs::path& out_dir) {
  const scheme::ProblemSpec spec = config::make_problem(cfg.problem);
  const scheme::Mesh mesh{cfg.mesh.M, cfg.mesh.N};
  scheme::TrajectoryResult result = scheme::run(spec, mesh, cfg.scheme_order, cfg.solver,
                                                cfg.output.snapshot_levels);

  harness::save_reference(snapshot_of(cfg, spec, result.final, result.final.level, mesh.M),
                          out_dir / "final_state.bin");
  for (const scheme::FieldPair& snap : result.snapshots) {
    harness::save_reference(snapshot_of(cfg, spec, snap, snap.level, mesh.M),
                            out_dir / ("state_" + std::to_string(snap.level) + ".bin"));
  }

  std::ofstream summary(out_dir / "run.json");
  summary << "{\n  \"config_hash\": \"" << config::config_hash(cfg) << "\",\n"
          << "  \"levels\": " << result.max_u_history.size() - 1 << ",\n"
          << "  \"final_max_u\": " << result.max_u_history.back() << ",\n"
          << "  \"final_max_v\": " << result.max_v_history.back() << ",\n"
          << "  \"solver_iterations\": " << result.solver_iterations << ",\n"
          << "  \"warnings\": " << result.solver_warnings.size() << "\n}\n";

  std::cout << "solve: " << mesh.M << "x" << mesh.N << " order " << cfg.scheme_order
            << ", final max |u| = " << result.max_u_history.back() << ", |v| = "
            << result.max_v_history.back() << "\n";
  for (const std::string& w : result.solver_warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "wrote " << (out_dir / "final_state.bin").string() << "\n";
  return 0;
}

int run_study_cmd(const config::RunConfig& cfg, const fs::path& out_dir) {
  harness::StudyPlan plan;
  plan.kind = cfg.problem.kind;
  if (plan.kind == harness::CaseKind::Custom)
    plan.custom = config::make_problem(cfg.problem);
  plan.scheme_order = cfg.scheme_order;
  plan.alphas = cfg.study->alphas;
  plan.resolutions = cfg.study->resolutions;
  plan.reference = cfg.study->reference;
  plan.solver = cfg.solver;
  plan.workers = cfg.workers;
  plan.extra_norms = cfg.study->extra_norms;

  harness::ConvergenceReport report = harness::run_study(plan);
  report.config_hash = config::config_hash(cfg);
  const fs::path csv = out_dir / "report.csv";
  harness::write_csv(report, csv, plan.extra_norms);
  std::cout << harness::report_to_csv(report, plan.extra_norms);
  std::cout << "wrote " << csv.string() << "\n";
  return 0;
}

int run_reference_cmd(const config::RunConfig& cfg, const fs::path& out_dir) {
  const auto [M_ref, N_ref] = *cfg.reference_mesh;
  harness::ReferenceSnapshot snap = harness::build_reference(
      cfg.problem.kind, cfg.problem.alpha, M_ref, N_ref, cfg.scheme_order, cfg.solver);
  const fs::path bin = out_dir / "reference.bin";
  harness::save_reference(snap, bin);
  std::cout << "reference: alpha " << snap.alpha << ", " << snap.M << "x" << snap.N
            << ", scheme order " << snap.scheme_order << "\n"
            << "wrote " << bin.string() << "\n";
  return 0;
}

int run_sweep_cmd(const config::RunConfig& cfg, const fs::path& out_dir) {
  const scheme::ProblemSpec spec = config::make_problem(cfg.problem);
  const std::vector<harness::SweepRow> rows = harness::fixed_tau_sweep(
      spec, cfg.sweep->tau, cfg.sweep->M_list, cfg.scheme_order, cfg.solver);
  const fs::path csv = out_dir / "sweep.csv";
  std::ofstream out(csv, std::ios::binary);
  out << "h,err_u_inf,err_v_inf\n";
  char buf[96];
  for (const harness::SweepRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%.5e,%.5e,%.5e\n", r.h, r.err_u_inf, r.err_v_inf);
    out << buf;
  }
  std::cout << "wrote " << csv.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solver for coupled fractional Ginzburg-Landau equations on an interval"};
  app.footer(
      "Configuration is a JSON file; see README.md for the schema.\n"
      "Exit codes: 0 success, 1 invalid configuration, 2 solver failure.");

  std::string config_path;
  std::string out_override;
  std::string solver_override;
  int workers_override = 0;
  double tol_override = 0.0;
  app.add_option("--config", config_path, "Path to the JSON configuration")->required();
  app.add_option("--out", out_override, "Output directory (overrides output.directory)");
  app.add_option("--workers", workers_override, "Concurrent study cells (overrides workers)");
  app.add_option("--solver", solver_override, "Solver mode: dense, krylov, or auto");
  app.add_option("--tol", tol_override, "Iterative solver tolerance (overrides solver.tol)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      std::cout << app.help();
      return 0;
    }
    std::cerr << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    config::RunConfig cfg = config::load_config(config_path);
    if (!out_override.empty()) cfg.output.directory = out_override;
    if (workers_override > 0) cfg.workers = workers_override;
    if (!solver_override.empty()) {
      if (solver_override == "dense")
        cfg.solver.mode = linalg::SolveMode::Dense;
      else if (solver_override == "krylov")
        cfg.solver.mode = linalg::SolveMode::Krylov;
      else if (solver_override == "auto")
        cfg.solver.mode = linalg::SolveMode::Auto;
      else
        throw ValidationError("--solver must be dense, krylov, or auto; got \"" +
                              solver_override + "\"");
    }
    if (tol_override > 0.0) cfg.solver.tol = tol_override;

    const fs::path out_dir(cfg.output.directory);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec)
      throw ValidationError("cannot create output directory " + out_dir.string() + ": " +
                            ec.message());

    switch (cfg.command) {
      case config::Command::Solve:
        return run_solve(cfg, out_dir);
      case config::Command::Study:
        return run_study_cmd(cfg, out_dir);
      case config::Command::Reference:
        return run_reference_cmd(cfg, out_dir);
      case config::Command::Sweep:
        return run_sweep_cmd(cfg, out_dir);
    }
    return 1;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n"
              << "best relative residual: " << e.best_residual
              << " after " << e.iterations << " iterations\n";
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
