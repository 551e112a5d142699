#include "cfgl/scheme.hpp"

#include <cmath>

#include "cfgl/manufactured.hpp"

namespace cfgl::scheme {

void ProblemSpec::validate() const {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ValidationError("alpha must lie in (1, 2], got " + std::to_string(alpha));
  if (!(b > a)) throw ValidationError("domain requires b > a");
  if (!(T > 0.0)) throw ValidationError("horizon T must be positive");
  if (!(u_coeffs.upsilon > 0.0))
    throw ValidationError("upsilon must be positive in the u-equation, got " +
                          std::to_string(u_coeffs.upsilon));
  if (!(v_coeffs.upsilon > 0.0))
    throw ValidationError("upsilon must be positive in the v-equation, got " +
                          std::to_string(v_coeffs.upsilon));
  if (!initial_u || !initial_v) throw ValidationError("initial data not set");
}

void Mesh::validate() const {
  if (M < 2) throw ValidationError("mesh requires M >= 2 subintervals");
  if (N < 2) throw ValidationError("mesh requires N >= 2 time steps");
}

FieldPair sample_initial(const ProblemSpec& spec, const Mesh& mesh) {
  spec.validate();
  mesh.validate();
  const size_t m = mesh.M - 1;
  FieldPair fp;
  fp.u.resize(m);
  fp.v.resize(m);
  fp.level = 0;
  for (size_t j = 1; j <= m; ++j) {
    const double x = mesh.node_x(spec, j);
    fp.u[j - 1] = spec.initial_u(x);
    fp.v[j - 1] = spec.initial_v(x);
  }
  return fp;
}

namespace {

// Frozen nonlinear weights at one level: (kappa+i zeta)|U|^2 + (delta+i beta)|V|^2.
CVector nonlinear_weights(const CoefficientSeptet& c, const FieldPair& state) {
  const size_t m = state.u.size();
  CVector w(m);
  for (size_t j = 0; j < m; ++j)
    w[j] = c.on_u_sq() * std::norm(state.u[j]) + c.on_v_sq() * std::norm(state.v[j]);
  return w;
}

CVector sample_source(const std::optional<SpaceTimeFn>& src, const ProblemSpec& spec,
                      const Mesh& mesh, double t) {
  const size_t m = mesh.M - 1;
  CVector f(m, Complex(0.0, 0.0));
  if (src)
    for (size_t j = 1; j <= m; ++j) f[j - 1] = (*src)(mesh.node_x(spec, j), t);
  return f;
}

// Compact average of the source including the boundary columns: interior
// fields vanish at the endpoints but the forcing does not, so the j = 1 and
// j = m rows pick up (alpha/24) f(a, t) and (alpha/24) f(b, t).
CVector averaged_source(const std::optional<SpaceTimeFn>& src, const ProblemSpec& spec,
                        const Mesh& mesh, double t) {
  const size_t m = mesh.M - 1;
  CVector out(m, Complex(0.0, 0.0));
  if (!src) return out;
  const double side = spec.alpha / 24.0;
  const double mid = 1.0 - spec.alpha / 12.0;
  CVector ext(m + 2);
  for (size_t j = 0; j <= m + 1; ++j) ext[j] = (*src)(mesh.node_x(spec, j), t);
  for (size_t j = 1; j <= m; ++j)
    out[j - 1] = side * ext[j - 1] + mid * ext[j] + side * ext[j + 1];
  return out;
}

struct FieldView {
  const CoefficientSeptet& coeffs;
  const std::optional<SpaceTimeFn>& source;
  bool is_u;
};

FieldView field_view(const ProblemSpec& spec, bool field_is_u) {
  return field_is_u ? FieldView{spec.u_coeffs, spec.source_u, true}
                    : FieldView{spec.v_coeffs, spec.source_v, false};
}

void note_solvability(const ProblemSpec& spec, double tau, const FieldPair& curr,
                      TrajectoryResult* log, bool* already_warned) {
  if (!log || *already_warned) return;
  double cmax = 0.0;
  for (const Complex& z : curr.u) cmax = std::max(cmax, std::abs(z));
  for (const Complex& z : curr.v) cmax = std::max(cmax, std::abs(z));
  const double c2 = cmax * cmax;
  for (const CoefficientSeptet* c : {&spec.u_coeffs, &spec.v_coeffs}) {
    const double denom = std::abs(c->gamma) + (std::abs(c->kappa) + std::abs(c->delta)) * c2;
    if (denom > 0.0 && tau >= 1.0 / denom) {
      log->solver_warnings.push_back(
          "time step " + std::to_string(tau) + " exceeds the solvability bound " +
          std::to_string(1.0 / denom) + " at level " + std::to_string(curr.level) +
          " (max magnitude " + std::to_string(cmax) + ")");
      *already_warned = true;
      return;
    }
  }
}

}  // namespace

FieldPair bootstrap(const ProblemSpec& spec, const Mesh& mesh,
                    const fracops::FracOperator& op) {
  spec.validate();
  mesh.validate();
  if (op.m_interior() != mesh.M - 1)
    throw ValidationError("bootstrap: operator dimension does not match mesh");
  const double tau = mesh.tau(spec);
  const FieldPair init = sample_initial(spec, mesh);
  const size_t m = init.u.size();

  FieldPair next;
  next.level = 1;
  next.u.resize(m);
  next.v.resize(m);

  for (bool is_u : {true, false}) {
    const FieldView fv = field_view(spec, is_u);
    const CVector& w0 = is_u ? init.u : init.v;
    const CVector weights = nonlinear_weights(fv.coeffs, init);
    const CVector lap = fracops::apply_fft(op, w0);
    const CVector f0 = sample_source(fv.source, spec, mesh, 0.0);
    CVector& out = is_u ? next.u : next.v;
    for (size_t j = 0; j < m; ++j)
      out[j] = w0[j] - tau * (fv.coeffs.diffusion() * lap[j] + weights[j] * w0[j] -
                              fv.coeffs.gamma * w0[j]) +
               tau * f0[j];
  }
  return next;
}

linalg::StepSystem build_step_system(const ProblemSpec& spec, const Mesh& mesh,
                                     const FieldPair& curr, bool field_is_u,
                                     bool fourth_order) {
  const double tau = mesh.tau(spec);
  const FieldView fv = field_view(spec, field_is_u);
  linalg::StepSystem sys;
  sys.scalar_shift = Complex(1.0 / (2.0 * tau) - fv.coeffs.gamma / 2.0, 0.0);
  sys.toeplitz_scale = fv.coeffs.diffusion() / 2.0;
  sys.diag_weights = nonlinear_weights(fv.coeffs, curr);
  for (Complex& w : sys.diag_weights) w *= 0.5;
  sys.uses_average = fourth_order;
  return sys;
}

CVector build_step_rhs(const ProblemSpec& spec, const Mesh& mesh,
                       const fracops::FracOperator& op, const linalg::StepSystem& sys,
                       const FieldPair& curr, const CVector& prev_field,
                       bool field_is_u) {
  const double tau = mesh.tau(spec);
  const double t_n = static_cast<double>(curr.level) * tau;
  const FieldView fv = field_view(spec, field_is_u);
  const size_t m = prev_field.size();

  CVector rhs(m);
  if (!sys.uses_average) {
    for (size_t j = 0; j < m; ++j) rhs[j] = prev_field[j] / tau;
  } else {
    CVector scaled(m);
    for (size_t j = 0; j < m; ++j) scaled[j] = prev_field[j] / tau;
    rhs = fracops::apply_average(spec.alpha, scaled);
  }

  const CVector lhs_prev = linalg::apply_system(sys, op, prev_field);
  for (size_t j = 0; j < m; ++j) rhs[j] -= lhs_prev[j];

  const CVector f = sys.uses_average ? averaged_source(fv.source, spec, mesh, t_n)
                                     : sample_source(fv.source, spec, mesh, t_n);
  for (size_t j = 0; j < m; ++j) rhs[j] += f[j];
  return rhs;
}

namespace {

FieldPair advance(const ProblemSpec& spec, const Mesh& mesh,
                  const fracops::FracOperator& op, const FieldPair& prev,
                  const FieldPair& curr, const linalg::SolverConfig& config,
                  bool fourth_order, TrajectoryResult* log) {
  if (prev.u.size() != curr.u.size() || prev.level + 1 != curr.level)
    throw ValidationError("step: levels must be consecutive with matching sizes");
  const size_t m = curr.u.size();

  FieldPair next;
  next.level = curr.level + 1;
  next.u.resize(m);
  next.v.resize(m);

  for (bool is_u : {true, false}) {
    const CVector& prev_field = is_u ? prev.u : prev.v;
    const CVector& curr_field = is_u ? curr.u : curr.v;
    const linalg::StepSystem sys = build_step_system(spec, mesh, curr, is_u, fourth_order);
    const CVector rhs = build_step_rhs(spec, mesh, op, sys, curr, prev_field, is_u);

    linalg::SolveStats stats;
    CVector x = linalg::solve_system(sys, op, rhs, config, &stats, &curr_field);
    if (log) {
      log->solver_iterations += stats.iterations;
      if (stats.residual > 1e-8)
        log->solver_warnings.push_back(
            "solver-quality: relative residual " + std::to_string(stats.residual) +
            " at level " + std::to_string(next.level) + (is_u ? " (u)" : " (v)"));
    }
    (is_u ? next.u : next.v) = std::move(x);
  }
  return next;
}

}  // namespace

FieldPair step(const ProblemSpec& spec, const Mesh& mesh, const fracops::FracOperator& op,
               const FieldPair& prev, const FieldPair& curr,
               const linalg::SolverConfig& config, TrajectoryResult* log) {
  return advance(spec, mesh, op, prev, curr, config, false, log);
}

FieldPair step_fourth(const ProblemSpec& spec, const Mesh& mesh,
                      const fracops::FracOperator& op, const FieldPair& prev,
                      const FieldPair& curr, const linalg::SolverConfig& config,
                      TrajectoryResult* log) {
  return advance(spec, mesh, op, prev, curr, config, true, log);
}

TrajectoryResult run(const ProblemSpec& spec, const Mesh& mesh, int scheme_order,
                     const linalg::SolverConfig& config,
                     const std::vector<size_t>& snapshot_levels) {
  if (scheme_order != 2 && scheme_order != 4)
    throw ValidationError("scheme_order must be 2 or 4");
  spec.validate();
  mesh.validate();

  const fracops::FracOperator op(spec.alpha, mesh.M - 1, mesh.h(spec));
  const double tau = mesh.tau(spec);
  const bool fourth = scheme_order == 4;

  TrajectoryResult result;
  result.max_u_history.reserve(mesh.N + 1);
  result.max_v_history.reserve(mesh.N + 1);

  auto record = [&](const FieldPair& fp) {
    result.max_u_history.push_back(inf_norm(fp.u));
    result.max_v_history.push_back(inf_norm(fp.v));
    for (size_t lvl : snapshot_levels)
      if (lvl == fp.level) result.snapshots.push_back(fp);
  };

  FieldPair prev = sample_initial(spec, mesh);
  record(prev);
  FieldPair curr = bootstrap(spec, mesh, op);
  record(curr);

  bool warned_solvability = false;
  note_solvability(spec, tau, prev, &result, &warned_solvability);

  for (size_t n = 1; n < mesh.N; ++n) {
    note_solvability(spec, tau, curr, &result, &warned_solvability);
    FieldPair next = fourth ? step_fourth(spec, mesh, op, prev, curr, config, &result)
                            : step(spec, mesh, op, prev, curr, config, &result);
    record(next);
    prev = std::move(curr);
    curr = std::move(next);
  }

  result.final = std::move(curr);
  return result;
}

FieldPair richardson(const FieldPair& final_fine, const FieldPair& final_coarse) {
  if (final_fine.u.size() != final_coarse.u.size() ||
      final_fine.v.size() != final_coarse.v.size())
    throw ValidationError("richardson: spatial sizes must match");
  const size_t m = final_fine.u.size();
  FieldPair out;
  out.level = final_fine.level;
  out.u.resize(m);
  out.v.resize(m);
  for (size_t j = 0; j < m; ++j) {
    out.u[j] = (4.0 * final_fine.u[j] - final_coarse.u[j]) / 3.0;
    out.v[j] = (4.0 * final_fine.v[j] - final_coarse.v[j]) / 3.0;
  }
  return out;
}

ProblemSpec make_example1(double alpha) {
  ProblemSpec p;
  p.alpha = alpha;
  p.a = 0.0;
  p.b = 1.0;
  p.T = 1.0;
  p.u_coeffs = {1.0, 1.0, -1.0, -1.0, 1.0, 1.0, 1.0};
  p.v_coeffs = {1.0, -1.0, 1.0, 1.0, 1.0, -1.0, -1.0};
  p.initial_u = [](double x) { return manufactured::PolySolution::u(x, 0.0); };
  p.initial_v = [](double x) { return manufactured::PolySolution::v(x, 0.0); };
  p.source_u = [alpha](double x, double t) {
    return manufactured::example1_sources(alpha, x, t).first;
  };
  p.source_v = [alpha](double x, double t) {
    return manufactured::example1_sources(alpha, x, t).second;
  };
  return p;
}

double example2_kappa(double upsilon) {
  return -(upsilon * (3.0 * std::sqrt(1.0 + 4.0 * upsilon * upsilon) - 1.0)) /
         (2.0 * (2.0 + 9.0 * upsilon * upsilon));
}

ProblemSpec make_example2(double alpha) {
  ProblemSpec p;
  p.alpha = alpha;
  p.a = -15.0;
  p.b = 15.0;
  p.T = 1.0;
  const double k1 = example2_kappa(0.3);
  p.u_coeffs = {0.3, 0.5, k1, -1.0, k1, -1.0, 0.0};
  p.v_coeffs = {0.3, 0.6, k1, -1.0, k1, -1.0, 0.0};
  auto sech_wave = [](double x) {
    return (1.0 / std::cosh(x)) * std::exp(Complex(0.0, 2.0 * x));
  };
  p.initial_u = sech_wave;
  p.initial_v = sech_wave;
  return p;
}

}  // namespace cfgl::scheme
