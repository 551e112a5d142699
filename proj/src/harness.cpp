#include "cfgl/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "cfgl/manufactured.hpp"

namespace cfgl::harness {

using nlohmann::json;

void StudyPlan::validate() const {
  if (alphas.empty()) throw ValidationError("study: alphas must be nonempty");
  for (double a : alphas)
    if (!(a > 1.0 && a <= 2.0))
      throw ValidationError("study: alpha must lie in (1, 2], got " + std::to_string(a));
  if (resolutions.empty()) throw ValidationError("study: resolutions must be nonempty");
  for (size_t i = 1; i < resolutions.size(); ++i)
    if (resolutions[i].first < resolutions[i - 1].first ||
        resolutions[i].second < resolutions[i - 1].second)
      throw ValidationError("study: resolutions must be ascending");
  if (scheme_order != 2 && scheme_order != 4)
    throw ValidationError("study: scheme_order must be 2 or 4");
  if (scheme_order == 4)
    for (const auto& [M, N] : resolutions)
      if (N % 2 != 0)
        throw ValidationError("study: extrapolation requires even N, got " +
                              std::to_string(N));
  if (kind == CaseKind::Custom && !custom)
    throw ValidationError("study: custom case requires a problem definition");
  if (!reference.exact) {
    if (reference.M_ref == 0 || reference.N_ref == 0)
      throw ValidationError("study: fine-mesh reference requires M_ref and N_ref");
    if (reference.scheme_order != 2 && reference.scheme_order != 4)
      throw ValidationError("study: reference scheme_order must be 2 or 4");
  } else if (kind != CaseKind::Example1) {
    throw ValidationError(
        "study: the closed-form reference is only available for the forced "
        "polynomial benchmark");
  }
  if (workers < 1) throw ValidationError("study: workers must be >= 1");
}

namespace {

scheme::ProblemSpec problem_for(CaseKind kind,
                                const std::optional<scheme::ProblemSpec>& custom,
                                double alpha) {
  switch (kind) {
    case CaseKind::Example1:
      return scheme::make_example1(alpha);
    case CaseKind::Example2:
      return scheme::make_example2(alpha);
    case CaseKind::Custom: {
      scheme::ProblemSpec p = *custom;
      p.alpha = alpha;
      return p;
    }
  }
  throw ValidationError("unknown case kind");
}

// Trajectory final level, with Richardson extrapolation for the
// fourth-order scheme (coarse companion at twice the time step).
scheme::FieldPair final_state(const scheme::ProblemSpec& spec, const scheme::Mesh& mesh,
                              int scheme_order, const linalg::SolverConfig& solver,
                              long long* iters, std::vector<std::string>* warnings) {
  scheme::TrajectoryResult fine = scheme::run(spec, mesh, scheme_order, solver);
  if (iters) *iters += fine.solver_iterations;
  if (warnings)
    warnings->insert(warnings->end(), fine.solver_warnings.begin(),
                     fine.solver_warnings.end());
  if (scheme_order != 4) return std::move(fine.final);

  scheme::Mesh coarse_mesh{mesh.M, mesh.N / 2};
  scheme::TrajectoryResult coarse = scheme::run(spec, coarse_mesh, scheme_order, solver);
  if (iters) *iters += coarse.solver_iterations;
  if (warnings)
    warnings->insert(warnings->end(), coarse.solver_warnings.begin(),
                     coarse.solver_warnings.end());
  return scheme::richardson(fine.final, coarse.final);
}

std::pair<double, double> exact_errors(const scheme::ProblemSpec& spec,
                                       const scheme::Mesh& mesh,
                                       const scheme::FieldPair& final) {
  double eu = 0.0, ev = 0.0;
  for (size_t j = 1; j < mesh.M; ++j) {
    const double x = mesh.node_x(spec, j);
    eu = std::max(eu, std::abs(final.u[j - 1] - manufactured::PolySolution::u(x, spec.T)));
    ev = std::max(ev, std::abs(final.v[j - 1] - manufactured::PolySolution::v(x, spec.T)));
  }
  return {eu, ev};
}

std::string hex_hash(const std::string& payload) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(payload)));
  return std::string(buf);
}

std::string plan_fingerprint(const StudyPlan& plan) {
  std::ostringstream os;
  os << "kind=" << static_cast<int>(plan.kind) << ";order=" << plan.scheme_order
     << ";alphas=";
  for (double a : plan.alphas) os << a << ",";
  os << ";res=";
  for (const auto& [M, N] : plan.resolutions) os << M << "x" << N << ",";
  os << ";ref=" << (plan.reference.exact ? "exact" : "fine") << ":"
     << plan.reference.M_ref << "x" << plan.reference.N_ref << ":o"
     << plan.reference.scheme_order;
  if (plan.custom)
    os << ";custom=" << plan.custom->a << ":" << plan.custom->b << ":" << plan.custom->T;
  return hex_hash(os.str());
}

std::string solver_mode_name(const linalg::SolverConfig& s) {
  switch (s.mode) {
    case linalg::SolveMode::Auto:
      return "auto";
    case linalg::SolveMode::Dense:
      return "dense";
    case linalg::SolveMode::Krylov:
      return "krylov";
  }
  return "?";
}

}  // namespace

double order_between(double err_coarse, double err_fine) {
  if (!(err_coarse > 0.0) || !(err_fine > 0.0))
    throw ValidationError("order_between: errors must be positive");
  return std::log2(err_coarse / err_fine);
}

ReferenceSnapshot build_reference(CaseKind kind, double alpha, size_t M_ref, size_t N_ref,
                                  int scheme_order, const linalg::SolverConfig& solver) {
  if (kind == CaseKind::Custom)
    throw ValidationError("build_reference: custom cases must pass their own problem");
  const scheme::ProblemSpec spec = problem_for(kind, std::nullopt, alpha);
  const scheme::Mesh mesh{M_ref, N_ref};

  ReferenceSnapshot snap;
  snap.alpha = alpha;
  snap.a = spec.a;
  snap.b = spec.b;
  snap.T = spec.T;
  snap.M = M_ref;
  snap.N = N_ref;
  snap.scheme_order = scheme_order;
  std::ostringstream os;
  os << "ref;kind=" << static_cast<int>(kind) << ";alpha=" << alpha << ";M=" << M_ref
     << ";N=" << N_ref << ";order=" << scheme_order;
  snap.config_hash = hex_hash(os.str());
  snap.final = final_state(spec, mesh, scheme_order, solver, nullptr, nullptr);
  return snap;
}

void save_reference(const ReferenceSnapshot& snap, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("save_reference: cannot open " + path.string());
  json meta = {{"alpha", snap.alpha},
               {"a", snap.a},
               {"b", snap.b},
               {"T", snap.T},
               {"M", snap.M},
               {"N", snap.N},
               {"scheme_order", snap.scheme_order},
               {"config_hash", snap.config_hash}};
  out << meta.dump() << "\n";
  auto write_field = [&](const CVector& f) {
    for (const Complex& z : f) {
      const double re = z.real(), im = z.imag();
      out.write(reinterpret_cast<const char*>(&re), sizeof re);
      out.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  };
  write_field(snap.final.u);
  write_field(snap.final.v);
  if (!out) throw ValidationError("save_reference: write failed for " + path.string());
}

ReferenceSnapshot load_reference(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("load_reference: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("load_reference: missing metadata line");
  json meta;
  try {
    meta = json::parse(line);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("load_reference: bad metadata: ") + e.what());
  }
  ReferenceSnapshot snap;
  try {
    snap.alpha = meta.at("alpha").get<double>();
    snap.a = meta.at("a").get<double>();
    snap.b = meta.at("b").get<double>();
    snap.T = meta.at("T").get<double>();
    snap.M = meta.at("M").get<size_t>();
    snap.N = meta.at("N").get<size_t>();
    snap.scheme_order = meta.at("scheme_order").get<int>();
    snap.config_hash = meta.at("config_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("load_reference: incomplete metadata: ") + e.what());
  }
  const size_t m = snap.M - 1;
  auto read_field = [&](CVector& f) {
    f.resize(m);
    for (Complex& z : f) {
      double re = 0.0, im = 0.0;
      in.read(reinterpret_cast<char*>(&re), sizeof re);
      in.read(reinterpret_cast<char*>(&im), sizeof im);
      z = Complex(re, im);
    }
  };
  read_field(snap.final.u);
  read_field(snap.final.v);
  if (!in) throw ValidationError("load_reference: truncated field data in " + path.string());
  snap.final.level = snap.N;
  return snap;
}

std::pair<double, double> error_vs_reference(const scheme::ProblemSpec& spec,
                                             const scheme::Mesh& mesh,
                                             const scheme::FieldPair& final,
                                             const ReferenceSnapshot& ref) {
  if (std::abs(spec.alpha - ref.alpha) > 1e-12 || std::abs(spec.a - ref.a) > 1e-12 ||
      std::abs(spec.b - ref.b) > 1e-12 || std::abs(spec.T - ref.T) > 1e-12)
    throw ValidationError("error_vs_reference: reference was built for a different problem");
  if (ref.M % mesh.M != 0)
    throw ValidationError("error_vs_reference: study nodes are not a subset of the "
                          "reference nodes (M_ref = " +
                          std::to_string(ref.M) + ", M = " + std::to_string(mesh.M) + ")");
  const size_t ratio = ref.M / mesh.M;
  double eu = 0.0, ev = 0.0;
  for (size_t j = 1; j < mesh.M; ++j) {
    const size_t jr = j * ratio;
    eu = std::max(eu, std::abs(final.u[j - 1] - ref.final.u[jr - 1]));
    ev = std::max(ev, std::abs(final.v[j - 1] - ref.final.v[jr - 1]));
  }
  return {eu, ev};
}

ConvergenceReport run_study(const StudyPlan& plan) {
  plan.validate();

  // Fine-mesh references, one per alpha, built up front.
  std::map<size_t, ReferenceSnapshot> refs;
  if (!plan.reference.exact)
    for (size_t ai = 0; ai < plan.alphas.size(); ++ai)
      refs.emplace(ai, build_reference(plan.kind, plan.alphas[ai], plan.reference.M_ref,
                                       plan.reference.N_ref, plan.reference.scheme_order,
                                       plan.solver));

  const size_t n_cells = plan.alphas.size() * plan.resolutions.size();
  std::vector<StudyRow> rows(n_cells);
  std::atomic<size_t> next_cell{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto run_cell = [&](size_t cell) {
    const size_t ai = cell / plan.resolutions.size();
    const size_t ri = cell % plan.resolutions.size();
    const double alpha = plan.alphas[ai];
    const auto [M, N] = plan.resolutions[ri];
    const scheme::ProblemSpec spec = problem_for(plan.kind, plan.custom, alpha);
    const scheme::Mesh mesh{M, N};

    StudyRow row;
    row.alpha = alpha;
    row.tau = mesh.tau(spec);
    row.h = mesh.h(spec);

    const auto t0 = std::chrono::steady_clock::now();
    long long iters = 0;
    std::vector<std::string> warnings;
    const scheme::FieldPair final =
        final_state(spec, mesh, plan.scheme_order, plan.solver, &iters, &warnings);
    const auto [eu, ev] = plan.reference.exact
                              ? exact_errors(spec, mesh, final)
                              : error_vs_reference(spec, mesh, final, refs.at(ai));
    row.err_u_inf = eu;
    row.err_v_inf = ev;
    row.solver_iters = iters;

    if (plan.extra_norms) {
      const size_t m = mesh.M - 1;
      CVector du(m), dv(m);
      for (size_t j = 1; j <= m; ++j) {
        const double x = mesh.node_x(spec, j);
        Complex ru, rv;
        if (plan.reference.exact) {
          ru = manufactured::PolySolution::u(x, spec.T);
          rv = manufactured::PolySolution::v(x, spec.T);
        } else {
          const size_t jr = j * (refs.at(ai).M / mesh.M);
          ru = refs.at(ai).final.u[jr - 1];
          rv = refs.at(ai).final.v[jr - 1];
        }
        du[j - 1] = final.u[j - 1] - ru;
        dv[j - 1] = final.v[j - 1] - rv;
      }
      const double h = mesh.h(spec);
      row.err_u_l2 = std::sqrt(h) * l2_norm(du);
      row.err_v_l2 = std::sqrt(h) * l2_norm(dv);
      const fracops::FracOperator op(alpha, m, h);
      row.err_u_semi = fracops::seminorm_quadratic(op, du);
      row.err_v_semi = fracops::seminorm_quadratic(op, dv);
    }

    row.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    rows[cell] = std::move(row);
  };

  auto worker = [&]() {
    for (;;) {
      const size_t cell = next_cell.fetch_add(1);
      if (cell >= n_cells) return;
      try {
        run_cell(cell);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  if (plan.workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const size_t n_workers = std::min<size_t>(static_cast<size_t>(plan.workers), n_cells);
    pool.reserve(n_workers);
    for (size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Orders across consecutive halvings within each alpha block.
  for (size_t ai = 0; ai < plan.alphas.size(); ++ai)
    for (size_t ri = 1; ri < plan.resolutions.size(); ++ri) {
      const auto& [Mp, Np] = plan.resolutions[ri - 1];
      const auto& [Mc, Nc] = plan.resolutions[ri];
      if (Mc != 2 * Mp || Nc != 2 * Np) continue;
      StudyRow& cur = rows[ai * plan.resolutions.size() + ri];
      const StudyRow& prev = rows[ai * plan.resolutions.size() + ri - 1];
      if (prev.err_u_inf > 0.0 && cur.err_u_inf > 0.0)
        cur.order_u = order_between(prev.err_u_inf, cur.err_u_inf);
      if (prev.err_v_inf > 0.0 && cur.err_v_inf > 0.0)
        cur.order_v = order_between(prev.err_v_inf, cur.err_v_inf);
    }

  ConvergenceReport report;
  report.rows = std::move(rows);
  report.config_hash = plan_fingerprint(plan);
  report.scheme_order = plan.scheme_order;
  if (plan.reference.exact) {
    report.reference_description = "exact";
  } else {
    std::ostringstream os;
    os << "fine-mesh M=" << plan.reference.M_ref << " N=" << plan.reference.N_ref
       << " scheme_order=" << plan.reference.scheme_order;
    report.reference_description = os.str();
  }
  report.solver_mode = solver_mode_name(plan.solver);
  return report;
}

std::vector<SweepRow> fixed_tau_sweep(const scheme::ProblemSpec& spec, double tau_fixed,
                                      const std::vector<size_t>& M_list, int scheme_order,
                                      const linalg::SolverConfig& solver) {
  if (!(tau_fixed > 0.0)) throw ValidationError("sweep: tau must be positive");
  const double steps = spec.T / tau_fixed;
  const auto N = static_cast<size_t>(std::llround(steps));
  if (N < 2 || std::abs(steps - static_cast<double>(N)) > 1e-9)
    throw ValidationError("sweep: T must be an integer multiple (>= 2) of tau");
  if (scheme_order == 4 && N % 2 != 0)
    throw ValidationError("sweep: extrapolation requires an even step count");

  std::vector<SweepRow> out;
  out.reserve(M_list.size());
  for (size_t M : M_list) {
    const scheme::Mesh mesh{M, N};
    const scheme::FieldPair final =
        final_state(spec, mesh, scheme_order, solver, nullptr, nullptr);
    const auto [eu, ev] = exact_errors(spec, mesh, final);
    out.push_back({mesh.h(spec), eu, ev});
  }
  return out;
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", v);
  return std::string(buf);
}

std::string opt_sci(const std::optional<double>& v) { return v ? sci(*v) : std::string(); }

}  // namespace

std::string report_to_csv(const ConvergenceReport& report, bool extra_norms) {
  std::ostringstream os;
  os << "# config_hash=" << report.config_hash << "\n";
  os << "# scheme_order=" << report.scheme_order << "\n";
  os << "# reference=" << report.reference_description << "\n";
  os << "# solver=" << report.solver_mode << "\n";
  os << "alpha,tau,h,err_u_inf,order_u,err_v_inf,order_v,wall_ms,solver_iters";
  if (extra_norms) os << ",err_u_l2,err_v_l2,err_u_semi,err_v_semi";
  os << "\n";
  for (const StudyRow& r : report.rows) {
    os << sci(r.alpha) << "," << sci(r.tau) << "," << sci(r.h) << "," << sci(r.err_u_inf)
       << "," << opt_sci(r.order_u) << "," << sci(r.err_v_inf) << ","
       << opt_sci(r.order_v) << "," << sci(r.wall_ms) << "," << r.solver_iters;
    if (extra_norms)
      os << "," << opt_sci(r.err_u_l2) << "," << opt_sci(r.err_v_l2) << ","
         << opt_sci(r.err_u_semi) << "," << opt_sci(r.err_v_semi);
    os << "\n";
  }
  return os.str();
}

void write_csv(const ConvergenceReport& report, const std::filesystem::path& path,
               bool extra_norms) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("write_csv: cannot open " + path.string());
  out << report_to_csv(report, extra_norms);
  if (!out) throw ValidationError("write_csv: write failed for " + path.string());
}

}  // namespace cfgl::harness
