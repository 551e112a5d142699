#pragma once

#include <functional>
#include <optional>

#include "cfgl/common.hpp"
#include "cfgl/fracops.hpp"
#include "cfgl/linalg.hpp"

namespace cfgl::scheme {

// Coefficient septet of one equation of the coupled system
//   w_t + (upsilon + i eta) (-Delta)^{alpha/2} w
//       + [(kappa + i zeta) |primary|^2 + (delta + i beta) |secondary|^2] w
//       - gamma w = source,
// where `primary` is the u-field for both equations (the kappa/zeta pair
// always multiplies |u|^2, delta/beta multiplies |v|^2).
struct CoefficientSeptet {
  double upsilon = 0.0;
  double eta = 0.0;
  double kappa = 0.0;
  double zeta = 0.0;
  double delta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  Complex diffusion() const { return {upsilon, eta}; }
  Complex on_u_sq() const { return {kappa, zeta}; }
  Complex on_v_sq() const { return {delta, beta}; }
};

using SpaceTimeFn = std::function<Complex(double x, double t)>;
using SpaceFn = std::function<Complex(double x)>;

struct ProblemSpec {
  double alpha = 1.5;
  CoefficientSeptet u_coeffs;
  CoefficientSeptet v_coeffs;
  double a = 0.0;
  double b = 1.0;
  double T = 1.0;
  SpaceFn initial_u;
  SpaceFn initial_v;
  // Optional forcing; absent means the homogeneous system.
  std::optional<SpaceTimeFn> source_u;
  std::optional<SpaceTimeFn> source_v;

  void validate() const;  // alpha in (1,2], b > a, T > 0, upsilon > 0 both
};

struct Mesh {
  size_t M = 2;  // number of subintervals; M >= 2
  size_t N = 2;  // number of time steps; N >= 2

  double h(const ProblemSpec& p) const { return (p.b - p.a) / static_cast<double>(M); }
  double tau(const ProblemSpec& p) const { return p.T / static_cast<double>(N); }
  double node_x(const ProblemSpec& p, size_t j) const {
    return p.a + static_cast<double>(j) * h(p);
  }
  void validate() const;
};

// Interior values (length M-1) of both fields at one time level.
struct FieldPair {
  CVector u;
  CVector v;
  size_t level = 0;
};

struct TrajectoryResult {
  FieldPair final;
  std::vector<FieldPair> snapshots;       // at requested levels, ascending
  RVector max_u_history;                  // length N+1, levels 0..N
  RVector max_v_history;
  std::vector<std::string> solver_warnings;
  long long solver_iterations = 0;        // total Krylov inner iterations
};

// Interior samples of the initial data.
FieldPair sample_initial(const ProblemSpec& spec, const Mesh& mesh);

// First step by explicit Euler on the stiff form:
//   U^1 = U^0 - tau [ (upsilon+i eta) Delta_h^alpha U^0 + w^0 U^0 - gamma U^0 ]
//         + tau f(x, 0),
// both fields. Second-order accurate locally, which suffices for the
// two-step marching schemes of either spatial order.
FieldPair bootstrap(const ProblemSpec& spec, const Mesh& mesh,
                    const fracops::FracOperator& op);

// Pieces of one field's linear step; `field_is_u` selects the septet and
// the source. curr supplies the frozen nonlinear weights.
linalg::StepSystem build_step_system(const ProblemSpec& spec, const Mesh& mesh,
                                     const FieldPair& curr, bool field_is_u,
                                     bool fourth_order);
CVector build_step_rhs(const ProblemSpec& spec, const Mesh& mesh,
                       const fracops::FracOperator& op,
                       const linalg::StepSystem& sys, const FieldPair& curr,
                       const CVector& prev_field, bool field_is_u);

// One step of the three-level linearized scheme (second order in space):
// given levels n-1 and n, returns level n+1. curr.level identifies n.
FieldPair step(const ProblemSpec& spec, const Mesh& mesh,
               const fracops::FracOperator& op, const FieldPair& prev,
               const FieldPair& curr, const linalg::SolverConfig& config,
               TrajectoryResult* log = nullptr);

// Same marching with the compact-average spatial discretization
// (fourth order in space).
FieldPair step_fourth(const ProblemSpec& spec, const Mesh& mesh,
                      const fracops::FracOperator& op, const FieldPair& prev,
                      const FieldPair& curr, const linalg::SolverConfig& config,
                      TrajectoryResult* log = nullptr);

// Full trajectory over mesh.N steps. scheme_order is 2 or 4.
// snapshot_levels requests copies of the fields at those time levels.
TrajectoryResult run(const ProblemSpec& spec, const Mesh& mesh, int scheme_order,
                     const linalg::SolverConfig& config,
                     const std::vector<size_t>& snapshot_levels = {});

// Final-level extrapolation (4 * fine - coarse) / 3 for a coarse run at
// twice the time step on the same spatial mesh. Mismatched spatial sizes
// are an error.
FieldPair richardson(const FieldPair& final_fine, const FieldPair& final_coarse);

// Preset problems.
ProblemSpec make_example1(double alpha);  // forced polynomial benchmark on (0,1)
ProblemSpec make_example2(double alpha);  // sech-modulated wave on (-15,15)

// Nonlinear coupling coefficient used by make_example2:
// -(upsilon (3 sqrt(1+4 upsilon^2) - 1)) / (2 (2 + 9 upsilon^2)).
double example2_kappa(double upsilon);

}  // namespace cfgl::scheme
