#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "cfgl/manufactured.hpp"
#include "cfgl/scheme.hpp"

using namespace cfgl;
using fracops::FracOperator;
using manufactured::PolySolution;
using scheme::FieldPair;
using scheme::Mesh;
using scheme::ProblemSpec;
using scheme::TrajectoryResult;

namespace {

const linalg::SolverConfig kDense{linalg::SolveMode::Dense, 1e-12, 400, 1024};

ProblemSpec constant_linear_problem(double alpha, Complex c0u, Complex c0v) {
  ProblemSpec p;
  p.alpha = alpha;
  p.a = 0.0;
  p.b = 1.0;
  p.T = 1.0;
  p.u_coeffs = {1.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.v_coeffs = {1.0, -0.2, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.initial_u = [c0u](double) { return c0u; };
  p.initial_v = [c0v](double) { return c0v; };
  return p;
}

double scaled_l2(const CVector& f, double h) { return std::sqrt(h) * l2_norm(f); }

double error_vs_exact(const ProblemSpec& spec, const Mesh& mesh, const FieldPair& fp,
                      bool is_u) {
  double err = 0.0;
  for (size_t j = 1; j < mesh.M; ++j) {
    const double x = mesh.node_x(spec, j);
    const Complex exact = is_u ? PolySolution::u(x, spec.T) : PolySolution::v(x, spec.T);
    err = std::max(err, std::abs((is_u ? fp.u : fp.v)[j - 1] - exact));
  }
  return err;
}

}  // namespace

TEST_CASE("problem validation") {
  ProblemSpec p = scheme::make_example1(1.5);
  CHECK_NOTHROW(p.validate());

  ProblemSpec bad = p;
  bad.alpha = 1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.alpha = 2.2;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.b = bad.a;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.T = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.u_coeffs.upsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.v_coeffs.upsilon = -1.0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = p;
  bad.initial_u = nullptr;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  Mesh m;
  m.M = 1;
  m.N = 4;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m.M = 4;
  m.N = 1;
  CHECK_THROWS_AS(m.validate(), ValidationError);
  m.N = 2;
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("initial sampling hits the interior nodes") {
  const ProblemSpec spec = scheme::make_example1(1.5);
  const Mesh mesh{8, 4};
  const FieldPair fp = scheme::sample_initial(spec, mesh);
  REQUIRE(fp.u.size() == 7);
  REQUIRE(fp.v.size() == 7);
  CHECK(fp.level == 0);
  for (size_t j = 1; j <= 7; ++j) {
    const double x = static_cast<double>(j) / 8.0;
    CHECK(std::abs(fp.u[j - 1] - Complex(PolySolution::profile(x), 0.0)) <= 1e-16);
    CHECK(std::abs(fp.v[j - 1] - Complex(PolySolution::profile(x), 0.0)) <= 1e-16);
  }
}

TEST_CASE("bootstrap matches an explicit Euler oracle") {
  const double alpha = 1.6;
  const ProblemSpec spec = scheme::make_example1(alpha);
  const Mesh mesh{8, 10};
  const FracOperator op(alpha, 7, mesh.h(spec));
  const FieldPair start = scheme::sample_initial(spec, mesh);
  const FieldPair got = scheme::bootstrap(spec, mesh, op);
  REQUIRE(got.level == 1);

  const double tau = mesh.tau(spec);
  const CVector tu = fracops::apply_dense(op, start.u);
  const CVector tv = fracops::apply_dense(op, start.v);
  for (size_t j = 0; j < 7; ++j) {
    const double x = mesh.node_x(spec, j + 1);
    const Complex wu = spec.u_coeffs.on_u_sq() * std::norm(start.u[j]) +
                       spec.u_coeffs.on_v_sq() * std::norm(start.v[j]);
    const Complex wv = spec.v_coeffs.on_u_sq() * std::norm(start.u[j]) +
                       spec.v_coeffs.on_v_sq() * std::norm(start.v[j]);
    const Complex fu = (*spec.source_u)(x, 0.0);
    const Complex fv = (*spec.source_v)(x, 0.0);
    const Complex eu = start.u[j] -
                       tau * (spec.u_coeffs.diffusion() * tu[j] + wu * start.u[j] -
                              spec.u_coeffs.gamma * start.u[j]) +
                       tau * fu;
    const Complex ev = start.v[j] -
                       tau * (spec.v_coeffs.diffusion() * tv[j] + wv * start.v[j] -
                              spec.v_coeffs.gamma * start.v[j]) +
                       tau * fv;
    CHECK(std::abs(got.u[j] - eu) <= 1e-15);
    CHECK(std::abs(got.v[j] - ev) <= 1e-15);
  }
}

TEST_CASE("single-interior-node march has a closed form") {
  const double alpha = 1.5;
  const Complex cu(0.7, -0.2), cv(-0.4, 0.9);
  const ProblemSpec spec = constant_linear_problem(alpha, cu, cv);
  const Mesh mesh{2, 100};
  const double tau = mesh.tau(spec);
  const double h = mesh.h(spec);

  const double c0 = fracops::build_coefficients(alpha, 1).stencil[0];
  const Complex zu = spec.u_coeffs.diffusion() * c0 / (2.0 * std::pow(h, alpha));
  const Complex zv = spec.v_coeffs.diffusion() * c0 / (2.0 * std::pow(h, alpha));
  const Complex rho_u = (1.0 / (2.0 * tau) - zu) / (1.0 / (2.0 * tau) + zu);
  const Complex rho_v = (1.0 / (2.0 * tau) - zv) / (1.0 / (2.0 * tau) + zv);

  const TrajectoryResult res = scheme::run(spec, mesh, 2, kDense);
  REQUIRE(res.final.u.size() == 1);
  // Level 100 is even: U^100 = rho^50 U^0.
  const Complex expect_u = std::pow(rho_u, 50) * cu;
  const Complex expect_v = std::pow(rho_v, 50) * cv;
  CHECK(std::abs(res.final.u[0] - expect_u) <= 1e-12 * std::abs(expect_u));
  CHECK(std::abs(res.final.v[0] - expect_v) <= 1e-12 * std::abs(expect_v));
}

TEST_CASE("forced benchmark keeps the mirror symmetry of its data") {
  for (int order : {2, 4}) {
    const ProblemSpec spec = scheme::make_example1(1.4);
    const Mesh mesh{16, 10};
    const TrajectoryResult res = scheme::run(spec, mesh, order, kDense);
    const size_t m = mesh.M - 1;
    double scale = std::max(inf_norm(res.final.u), inf_norm(res.final.v));
    for (size_t j = 0; j < m; ++j) {
      CHECK(std::abs(res.final.u[j] - res.final.u[m - 1 - j]) <= 1e-12 * scale);
      CHECK(std::abs(res.final.v[j] - res.final.v[m - 1 - j]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("second-order scheme converges at second order") {
  const double alpha = 1.5;
  const ProblemSpec spec = scheme::make_example1(alpha);
  RVector eu, ev;
  for (size_t M : {16u, 32u, 64u}) {
    const Mesh mesh{M, M};
    const TrajectoryResult res = scheme::run(spec, mesh, 2, kDense);
    eu.push_back(error_vs_exact(spec, mesh, res.final, true));
    ev.push_back(error_vs_exact(spec, mesh, res.final, false));
  }
  for (size_t i = 0; i + 1 < eu.size(); ++i) {
    CHECK(std::log2(eu[i] / eu[i + 1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(ev[i] / ev[i + 1]) == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("compact-average scheme converges at fourth order in space") {
  // tau ~ h^2 keeps the second-order temporal error at the spatial level.
  const double alpha = 1.5;
  const ProblemSpec spec = scheme::make_example1(alpha);
  const size_t Ms[] = {8, 16, 32};
  const size_t Ns[] = {16, 64, 256};
  RVector eu, ev;
  for (int i = 0; i < 3; ++i) {
    const Mesh mesh{Ms[i], Ns[i]};
    const TrajectoryResult res = scheme::run(spec, mesh, 4, kDense);
    eu.push_back(error_vs_exact(spec, mesh, res.final, true));
    ev.push_back(error_vs_exact(spec, mesh, res.final, false));
  }
  for (size_t i = 0; i + 1 < eu.size(); ++i) {
    CHECK(std::log2(eu[i] / eu[i + 1]) == doctest::Approx(4.0).epsilon(0.075));
    CHECK(std::log2(ev[i] / ev[i + 1]) == doctest::Approx(4.0).epsilon(0.075));
  }
}

TEST_CASE("linear undriven march is nonexpansive in the scaled norm") {
  // Real diffusion, no gain, no coupling; tau * lambda_max = 1/2 keeps the
  // interleaved three-level sequence monotone.
  ProblemSpec p;
  p.alpha = 2.0;
  p.a = 0.0;
  p.b = 1.0;
  p.T = 1.0;
  p.u_coeffs = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.v_coeffs = {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.initial_u = [](double x) { return Complex(std::sin(kPi * x), 0.25 * x); };
  p.initial_v = [](double x) { return Complex(x * (1.0 - x), -0.5 * x * x); };

  const Mesh mesh{8, 512};
  std::vector<size_t> all_levels(mesh.N + 1);
  std::iota(all_levels.begin(), all_levels.end(), 0u);
  const TrajectoryResult res = scheme::run(p, mesh, 2, kDense, all_levels);
  REQUIRE(res.snapshots.size() == mesh.N + 1);

  const double h = mesh.h(p);
  double prev_u = scaled_l2(res.snapshots[0].u, h);
  double prev_v = scaled_l2(res.snapshots[0].v, h);
  for (size_t n = 1; n <= mesh.N; ++n) {
    const double nu = scaled_l2(res.snapshots[n].u, h);
    const double nv = scaled_l2(res.snapshots[n].v, h);
    CHECK(nu <= prev_u * (1.0 + 1e-12));
    CHECK(nv <= prev_v * (1.0 + 1e-12));
    prev_u = nu;
    prev_v = nv;
  }
}

TEST_CASE("trajectory bookkeeping") {
  const ProblemSpec spec = scheme::make_example1(1.7);
  const Mesh mesh{16, 8};
  const TrajectoryResult res = scheme::run(spec, mesh, 2, kDense, {0, 4, 8});
  CHECK(res.final.level == 8);
  REQUIRE(res.max_u_history.size() == 9);
  REQUIRE(res.max_v_history.size() == 9);
  REQUIRE(res.snapshots.size() == 3);
  CHECK(res.snapshots[0].level == 0);
  CHECK(res.snapshots[1].level == 4);
  CHECK(res.snapshots[2].level == 8);
  CHECK(res.max_u_history[0] == doctest::Approx(inf_norm(res.snapshots[0].u)).epsilon(1e-15));
  CHECK(res.max_u_history[4] == doctest::Approx(inf_norm(res.snapshots[1].u)).epsilon(1e-15));
  CHECK(res.max_u_history[8] == doctest::Approx(inf_norm(res.final.u)).epsilon(1e-15));
  CHECK(res.solver_warnings.empty());

  // A coarse time step against a strong linear gain trips the solvability note.
  ProblemSpec hot = constant_linear_problem(1.5, Complex(1.0, 0.0), Complex(1.0, 0.0));
  hot.u_coeffs.gamma = 3.0;
  hot.v_coeffs.gamma = 3.0;
  const TrajectoryResult warned = scheme::run(hot, Mesh{4, 2}, 2, kDense);
  REQUIRE_FALSE(warned.solver_warnings.empty());
  CHECK(warned.solver_warnings[0].find("solvability bound") != std::string::npos);
}

TEST_CASE("stepping requires consecutive levels") {
  const ProblemSpec spec = scheme::make_example1(1.5);
  const Mesh mesh{8, 4};
  const FracOperator op(spec.alpha, 7, mesh.h(spec));
  FieldPair a = scheme::sample_initial(spec, mesh);
  FieldPair b = scheme::bootstrap(spec, mesh, op);
  b.level = 2;
  CHECK_THROWS_AS(scheme::step(spec, mesh, op, a, b, kDense), ValidationError);
}

TEST_CASE("final-level extrapolation algebra") {
  FieldPair fine, coarse;
  fine.level = coarse.level = 10;
  fine.u = {Complex(1.0, 2.0)};
  fine.v = {Complex(-3.0, 0.5)};
  coarse.u = {Complex(0.4, 0.8)};
  coarse.v = {Complex(-1.2, 0.2)};
  const FieldPair out = scheme::richardson(fine, coarse);
  CHECK(out.level == 10);
  CHECK(std::abs(out.u[0] - (4.0 * fine.u[0] - coarse.u[0]) / 3.0) <= 1e-16);
  CHECK(std::abs(out.v[0] - (4.0 * fine.v[0] - coarse.v[0]) / 3.0) <= 1e-16);

  coarse.u.push_back(Complex(0.0, 0.0));
  CHECK_THROWS_AS(scheme::richardson(fine, coarse), ValidationError);
}

TEST_CASE("preset problems carry the published data") {
  const ProblemSpec e1 = scheme::make_example1(1.8);
  CHECK(e1.u_coeffs.upsilon == 1.0);
  CHECK(e1.u_coeffs.eta == 1.0);
  CHECK(e1.u_coeffs.kappa == -1.0);
  CHECK(e1.u_coeffs.gamma == 1.0);
  CHECK(e1.v_coeffs.eta == -1.0);
  CHECK(e1.v_coeffs.gamma == -1.0);
  CHECK(e1.source_u.has_value());
  CHECK(e1.source_v.has_value());

  {
    // Recompute -(u (3 sqrt(1+4u^2) - 1)) / (2 (2 + 9u^2)) in extended
    // precision as an independent numerical cross-check.
    const long double u = 0.3L;
    const long double expect =
        -(u * (3.0L * std::sqrt(1.0L + 4.0L * u * u) - 1.0L)) /
        (2.0L * (2.0L + 9.0L * u * u));
    CHECK(scheme::example2_kappa(0.3) ==
          doctest::Approx(static_cast<double>(expect)).epsilon(2e-15));
    CHECK(scheme::example2_kappa(0.3) == doctest::Approx(-0.133375683465).epsilon(1e-11));
  }

  const ProblemSpec e2 = scheme::make_example2(1.5);
  CHECK(e2.a == -15.0);
  CHECK(e2.b == 15.0);
  CHECK(e2.u_coeffs.upsilon == 0.3);
  CHECK(e2.u_coeffs.eta == 0.5);
  CHECK(e2.v_coeffs.eta == 0.6);
  CHECK(e2.u_coeffs.kappa == doctest::Approx(scheme::example2_kappa(0.3)).epsilon(1e-15));
  CHECK(e2.u_coeffs.zeta == -1.0);
  CHECK(e2.u_coeffs.gamma == 0.0);
  CHECK_FALSE(e2.source_u.has_value());

  const Complex w0 = e2.initial_u(0.5);
  const Complex expect = (1.0 / std::cosh(0.5)) * std::exp(Complex(0.0, 1.0));
  CHECK(std::abs(w0 - expect) <= 1e-15);
}
