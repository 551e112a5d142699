#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cfgl/harness.hpp"
#include "cfgl/manufactured.hpp"

using namespace cfgl;
using harness::CaseKind;
using harness::ConvergenceReport;
using harness::ReferenceSnapshot;
using harness::StudyPlan;
using manufactured::PolySolution;
using scheme::Mesh;
using scheme::ProblemSpec;

namespace {

const linalg::SolverConfig kDense{linalg::SolveMode::Dense, 1e-12, 400, 1024};

StudyPlan small_plan(int order) {
  StudyPlan plan;
  plan.kind = CaseKind::Example1;
  plan.scheme_order = order;
  plan.alphas = {1.5};
  plan.resolutions = {{16, 16}, {32, 32}};
  plan.reference.exact = true;
  plan.solver = kDense;
  return plan;
}

double exact_error(const ProblemSpec& spec, const Mesh& mesh,
                   const scheme::FieldPair& fp, bool is_u) {
  double err = 0.0;
  for (size_t j = 1; j < mesh.M; ++j) {
    const double x = mesh.node_x(spec, j);
    const Complex exact = is_u ? PolySolution::u(x, spec.T) : PolySolution::v(x, spec.T);
    err = std::max(err, std::abs((is_u ? fp.u : fp.v)[j - 1] - exact));
  }
  return err;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST_CASE("plan validation") {
  StudyPlan plan = small_plan(2);
  CHECK_NOTHROW(plan.validate());

  StudyPlan bad = plan;
  bad.resolutions = {{32, 32}, {16, 16}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = plan;
  bad.scheme_order = 3;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = plan;
  bad.scheme_order = 4;
  bad.resolutions = {{16, 10}, {32, 20}};
  CHECK_NOTHROW(bad.validate());
  bad.resolutions = {{16, 9}, {32, 18}};
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = plan;
  bad.kind = CaseKind::Example2;
  bad.reference.exact = true;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = plan;
  bad.kind = CaseKind::Custom;
  CHECK_THROWS_AS(bad.validate(), ValidationError);

  bad = plan;
  bad.alphas = {};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("order helper") {
  CHECK(harness::order_between(4.0e-3, 1.0e-3) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(harness::order_between(1.6e-2, 1.0e-3) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("study rows carry per-cell errors and halving orders") {
  StudyPlan plan = small_plan(2);
  plan.alphas = {1.5, 2.0};
  plan.resolutions = {{16, 16}, {32, 32}, {64, 64}};
  const ConvergenceReport report = harness::run_study(plan);

  REQUIRE(report.rows.size() == 6);
  CHECK(report.scheme_order == 2);
  CHECK(report.reference_description == "exact");
  CHECK(report.solver_mode == "dense");
  CHECK_FALSE(report.config_hash.empty());

  for (size_t i = 0; i < 6; ++i) {
    const auto& row = report.rows[i];
    CHECK(row.alpha == (i < 3 ? 1.5 : 2.0));
    CHECK(row.err_u_inf > 0.0);
    CHECK(row.wall_ms >= 0.0);
    if (i % 3 == 0) {
      CHECK_FALSE(row.order_u.has_value());
    } else {
      REQUIRE(row.order_u.has_value());
      REQUIRE(row.order_v.has_value());
      CHECK(*row.order_u == doctest::Approx(2.0).epsilon(0.12));
      CHECK(*row.order_v == doctest::Approx(2.0).epsilon(0.12));
    }
  }

  // Row values are exactly what a direct run of the scheme produces.
  const ProblemSpec spec = scheme::make_example1(1.5);
  const Mesh mesh{32, 32};
  const auto res = scheme::run(spec, mesh, 2, kDense);
  CHECK(report.rows[1].err_u_inf ==
        doctest::Approx(exact_error(spec, mesh, res.final, true)).epsilon(1e-12));
  CHECK(report.rows[1].err_v_inf ==
        doctest::Approx(exact_error(spec, mesh, res.final, false)).epsilon(1e-12));
}

TEST_CASE("fourth-order study rows use the extrapolated final level") {
  StudyPlan plan = small_plan(4);
  plan.resolutions = {{8, 8}, {16, 16}};
  const ConvergenceReport report = harness::run_study(plan);
  REQUIRE(report.rows.size() == 2);

  const ProblemSpec spec = scheme::make_example1(1.5);
  const Mesh fine{16, 16}, coarse{16, 8};
  const auto rf = scheme::run(spec, fine, 4, kDense);
  const auto rc = scheme::run(spec, coarse, 4, kDense);
  const auto extrap = scheme::richardson(rf.final, rc.final);
  CHECK(report.rows[1].err_u_inf ==
        doctest::Approx(exact_error(spec, fine, extrap, true)).epsilon(1e-12));
  CHECK(report.rows[1].err_v_inf ==
        doctest::Approx(exact_error(spec, fine, extrap, false)).epsilon(1e-12));
}

TEST_CASE("worker count does not change the numbers") {
  StudyPlan plan = small_plan(2);
  plan.alphas = {1.3, 1.9};
  const ConvergenceReport serial = harness::run_study(plan);
  plan.workers = 2;
  const ConvergenceReport parallel = harness::run_study(plan);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].err_u_inf == parallel.rows[i].err_u_inf);
    CHECK(serial.rows[i].err_v_inf == parallel.rows[i].err_v_inf);
    CHECK(serial.rows[i].alpha == parallel.rows[i].alpha);
  }
}

TEST_CASE("extra norm columns are populated on request") {
  StudyPlan plan = small_plan(2);
  plan.extra_norms = true;
  const ConvergenceReport report = harness::run_study(plan);
  for (const auto& row : report.rows) {
    REQUIRE(row.err_u_l2.has_value());
    REQUIRE(row.err_v_l2.has_value());
    REQUIRE(row.err_u_semi.has_value());
    REQUIRE(row.err_v_semi.has_value());
    CHECK(*row.err_u_l2 > 0.0);
    // Discrete L2 of the error is bounded by the inf error on (0,1).
    CHECK(*row.err_u_l2 <= row.err_u_inf * 1.0000001);
    CHECK(*row.err_u_semi > 0.0);
  }
}

TEST_CASE("reference snapshots save, load, and rebuild bit for bit") {
  const auto snap =
      harness::build_reference(CaseKind::Example1, 1.5, 32, 8, 2, kDense);
  CHECK(snap.M == 32);
  CHECK(snap.N == 8);
  CHECK(snap.alpha == 1.5);
  CHECK(snap.final.u.size() == 31);

  const auto path = temp_file("cfgl_test_reference.bin");
  harness::save_reference(snap, path);
  const auto loaded = harness::load_reference(path);
  CHECK(loaded.alpha == snap.alpha);
  CHECK(loaded.a == snap.a);
  CHECK(loaded.b == snap.b);
  CHECK(loaded.T == snap.T);
  CHECK(loaded.M == snap.M);
  CHECK(loaded.N == snap.N);
  CHECK(loaded.scheme_order == snap.scheme_order);
  CHECK(loaded.config_hash == snap.config_hash);
  REQUIRE(loaded.final.u.size() == snap.final.u.size());
  for (size_t j = 0; j < snap.final.u.size(); ++j) {
    CHECK(loaded.final.u[j] == snap.final.u[j]);
    CHECK(loaded.final.v[j] == snap.final.v[j]);
  }

  const auto again =
      harness::build_reference(CaseKind::Example1, 1.5, 32, 8, 2, kDense);
  for (size_t j = 0; j < snap.final.u.size(); ++j) {
    CHECK(again.final.u[j] == snap.final.u[j]);
    CHECK(again.final.v[j] == snap.final.v[j]);
  }
  std::filesystem::remove(path);
}

TEST_CASE("reference comparison restricts to shared nodes") {
  const auto ref = harness::build_reference(CaseKind::Example1, 1.5, 32, 16, 2, kDense);
  const ProblemSpec spec = scheme::make_example1(1.5);
  const Mesh mesh{16, 8};
  const auto res = scheme::run(spec, mesh, 2, kDense);
  const auto [eu, ev] = harness::error_vs_reference(spec, mesh, res.final, ref);

  double expect_u = 0.0, expect_v = 0.0;
  for (size_t j = 1; j < mesh.M; ++j) {
    expect_u = std::max(expect_u, std::abs(res.final.u[j - 1] - ref.final.u[2 * j - 1]));
    expect_v = std::max(expect_v, std::abs(res.final.v[j - 1] - ref.final.v[2 * j - 1]));
  }
  CHECK(eu == doctest::Approx(expect_u).epsilon(1e-15));
  CHECK(ev == doctest::Approx(expect_v).epsilon(1e-15));

  // Non-nested meshes and mismatched problems are rejected.
  scheme::FieldPair junk;
  junk.u = CVector(11, Complex(0.0, 0.0));
  junk.v = CVector(11, Complex(0.0, 0.0));
  CHECK_THROWS_AS(harness::error_vs_reference(spec, Mesh{12, 8}, junk, ref),
                  ValidationError);
  ProblemSpec other = spec;
  other.T = 2.0;
  CHECK_THROWS_AS(harness::error_vs_reference(other, mesh, res.final, ref),
                  ValidationError);
  other = spec;
  other.alpha = 1.6;
  CHECK_THROWS_AS(harness::error_vs_reference(other, mesh, res.final, ref),
                  ValidationError);
}

TEST_CASE("fixed time step sweep") {
  const ProblemSpec spec = scheme::make_example1(2.0);
  const auto rows = harness::fixed_tau_sweep(spec, 0.125, {16, 32, 64}, 2, kDense);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].h == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(rows[2].h == doctest::Approx(1.0 / 64.0).epsilon(1e-15));
  for (const auto& r : rows) {
    CHECK(r.err_u_inf > 0.0);
    CHECK(r.err_v_inf > 0.0);
  }
  // With tau fixed the error cannot keep halving once the temporal part
  // dominates; it must still never grow much under spatial refinement here.
  CHECK(rows[2].err_u_inf <= rows[0].err_u_inf * 1.5);
  CHECK(rows[2].err_u_inf >= rows[0].err_u_inf / 100.0);

  CHECK_THROWS_AS(harness::fixed_tau_sweep(spec, 0.3, {16}, 2, kDense), ValidationError);
  CHECK_THROWS_AS(harness::fixed_tau_sweep(spec, 1.0, {16}, 2, kDense), ValidationError);
}

TEST_CASE("csv shape and formatting") {
  StudyPlan plan = small_plan(2);
  const ConvergenceReport report = harness::run_study(plan);
  const std::string csv = harness::report_to_csv(report);

  std::istringstream is(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(is, line)) lines.push_back(line);
  REQUIRE(lines.size() == 7);  // 4 metadata + header + 2 rows
  CHECK(lines[0].rfind("# config_hash=", 0) == 0);
  CHECK(lines[1] == "# scheme_order=2");
  CHECK(lines[2] == "# reference=exact");
  CHECK(lines[3] == "# solver=dense");
  CHECK(lines[4] == "alpha,tau,h,err_u_inf,order_u,err_v_inf,order_v,wall_ms,solver_iters");

  const auto first = split_csv_line(lines[5]);
  REQUIRE(first.size() == 9);
  CHECK(first[4].empty());  // no order on the first row of a group
  CHECK(first[6].empty());
  const auto second = split_csv_line(lines[6]);
  CHECK_FALSE(second[4].empty());
  CHECK(second[3].find('e') != std::string::npos);  // scientific notation

  const auto path = temp_file("cfgl_test_report.csv");
  harness::write_csv(report, path);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == csv);
  std::filesystem::remove(path);

  StudyPlan w = small_plan(2);
  w.extra_norms = true;
  const std::string wide = harness::report_to_csv(harness::run_study(w), true);
  CHECK(wide.find("err_u_l2,err_v_l2,err_u_semi,err_v_semi") != std::string::npos);
}
