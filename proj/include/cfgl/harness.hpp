#pragma once

#include <filesystem>
#include <optional>

#include "cfgl/scheme.hpp"

namespace cfgl::harness {

enum class CaseKind { Example1, Example2, Custom };

// Reference for error measurement: the closed-form solution (Example 1) or
// a fine-mesh run whose nodes contain the study nodes.
struct ReferenceSpec {
  bool exact = true;
  size_t M_ref = 0;
  size_t N_ref = 0;
  int scheme_order = 2;  // scheme used to build the fine-mesh reference
};

struct StudyPlan {
  CaseKind kind = CaseKind::Example1;
  std::optional<scheme::ProblemSpec> custom;  // required when kind == Custom
  int scheme_order = 2;                       // 4 implies Richardson extrapolation
  RVector alphas;
  std::vector<std::pair<size_t, size_t>> resolutions;  // (M, N), ascending
  ReferenceSpec reference;
  linalg::SolverConfig solver;
  int workers = 1;
  bool extra_norms = false;  // append discrete L2 and quadratic-seminorm columns

  void validate() const;
};

struct StudyRow {
  double alpha = 0.0;
  double tau = 0.0;
  double h = 0.0;
  double err_u_inf = 0.0;
  std::optional<double> order_u;
  double err_v_inf = 0.0;
  std::optional<double> order_v;
  double wall_ms = 0.0;
  long long solver_iters = 0;
  std::optional<double> err_u_l2, err_v_l2, err_u_semi, err_v_semi;
};

struct ConvergenceReport {
  std::vector<StudyRow> rows;
  // Metadata echoed into the CSV as comment lines: configuration hash,
  // scheme order, reference description, solver mode.
  std::string config_hash;
  int scheme_order = 2;
  std::string reference_description;
  std::string solver_mode;
};

// Runs every (alpha, resolution) cell, measures final-time errors against
// the reference restricted to shared nodes (study nodes must be a subset of
// reference nodes; no interpolation), and fills consecutive-halving orders
// log2(err_coarse / err_fine).
ConvergenceReport run_study(const StudyPlan& plan);

// Fine-mesh reference trajectory, persisted as one JSON metadata line
// followed by little-endian doubles: interleaved (re, im) for U interior
// values, then V. Rebuilding with the same inputs is bit-for-bit identical.
struct ReferenceSnapshot {
  double alpha, a, b, T;
  size_t M, N;
  int scheme_order;
  std::string config_hash;
  scheme::FieldPair final;
};

ReferenceSnapshot build_reference(CaseKind kind, double alpha, size_t M_ref, size_t N_ref,
                                  int scheme_order, const linalg::SolverConfig& solver);
void save_reference(const ReferenceSnapshot& snap, const std::filesystem::path& path);
ReferenceSnapshot load_reference(const std::filesystem::path& path);

// Error of a trajectory's final level against a reference snapshot on the
// shared nodes. The study mesh spacing must evenly divide the reference's.
std::pair<double, double> error_vs_reference(const scheme::ProblemSpec& spec,
                                             const scheme::Mesh& mesh,
                                             const scheme::FieldPair& final,
                                             const ReferenceSnapshot& ref);

// Spatial-refinement sweep at fixed time step (error-vs-h profile).
struct SweepRow {
  double h = 0.0;
  double err_u_inf = 0.0;
  double err_v_inf = 0.0;
};
std::vector<SweepRow> fixed_tau_sweep(const scheme::ProblemSpec& spec, double tau_fixed,
                                      const std::vector<size_t>& M_list, int scheme_order,
                                      const linalg::SolverConfig& solver);

// CSV with pinned header
//   alpha,tau,h,err_u_inf,order_u,err_v_inf,order_v,wall_ms,solver_iters
// floating-point values in scientific notation with 6 significant digits;
// order cells empty on each alpha's first row. Metadata rows are prefixed
// with '#'. extra_norms appends err_u_l2,err_v_l2,err_u_semi,err_v_semi.
std::string report_to_csv(const ConvergenceReport& report, bool extra_norms = false);
void write_csv(const ConvergenceReport& report, const std::filesystem::path& path,
               bool extra_norms = false);

double order_between(double err_coarse, double err_fine);

}  // namespace cfgl::harness
