#include "cfgl/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace cfgl::config {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ValidationError("unknown key \"" + it.key() + "\" in " + context);
}

const json& require(const json& obj, const std::string& key, const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ValidationError("missing required key \"" + key + "\" in " + context);
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ValidationError(where + " must be a number");
  return v.get<double>();
}

size_t as_count(const json& v, const std::string& where) {
  if (!v.is_number_unsigned())
    throw ValidationError(where + " must be a nonnegative integer");
  return v.get<size_t>();
}

scheme::CoefficientSeptet parse_septet(const json& obj, const std::string& context) {
  if (!obj.is_object()) throw ValidationError(context + " must be an object");
  static const std::set<std::string> keys = {"upsilon", "eta",  "kappa", "zeta",
                                             "delta",   "beta", "gamma"};
  reject_unknown_keys(obj, keys, context);
  scheme::CoefficientSeptet c;
  c.upsilon = as_number(require(obj, "upsilon", context), context + ".upsilon");
  c.eta = as_number(require(obj, "eta", context), context + ".eta");
  c.kappa = as_number(require(obj, "kappa", context), context + ".kappa");
  c.zeta = as_number(require(obj, "zeta", context), context + ".zeta");
  c.delta = as_number(require(obj, "delta", context), context + ".delta");
  c.beta = as_number(require(obj, "beta", context), context + ".beta");
  c.gamma = as_number(require(obj, "gamma", context), context + ".gamma");
  if (!(c.upsilon > 0.0))
    throw ValidationError("upsilon must be positive in " + context + ", got " +
                          std::to_string(c.upsilon));
  return c;
}

json septet_to_json(const scheme::CoefficientSeptet& c) {
  return {{"upsilon", c.upsilon}, {"eta", c.eta},   {"kappa", c.kappa},
          {"zeta", c.zeta},       {"delta", c.delta}, {"beta", c.beta},
          {"gamma", c.gamma}};
}

ProblemConfig parse_problem(const json& obj) {
  if (!obj.is_object()) throw ValidationError("\"problem\" must be an object");
  ProblemConfig pc;
  const json& kind_j = require(obj, "case", "problem");
  if (!kind_j.is_string()) throw ValidationError("problem.case must be a string");
  const std::string kind = kind_j.get<std::string>();
  if (kind == "example1") {
    pc.kind = harness::CaseKind::Example1;
  } else if (kind == "example2") {
    pc.kind = harness::CaseKind::Example2;
  } else if (kind == "custom") {
    pc.kind = harness::CaseKind::Custom;
  } else {
    throw ValidationError("problem.case must be example1, example2, or custom; got \"" +
                          kind + "\"");
  }
  pc.alpha = as_number(require(obj, "alpha", "problem"), "problem.alpha");
  if (!(pc.alpha > 1.0 && pc.alpha <= 2.0))
    throw ValidationError("problem.alpha must lie in (1, 2], got " +
                          std::to_string(pc.alpha));

  if (pc.kind == harness::CaseKind::Custom) {
    static const std::set<std::string> keys = {"case", "alpha", "a", "b", "T",
                                               "u_coefficients", "v_coefficients",
                                               "initial_profile"};
    reject_unknown_keys(obj, keys, "problem");
    pc.a = as_number(require(obj, "a", "problem"), "problem.a");
    pc.b = as_number(require(obj, "b", "problem"), "problem.b");
    pc.T = as_number(require(obj, "T", "problem"), "problem.T");
    if (!(pc.b > pc.a)) throw ValidationError("problem requires b > a");
    if (!(pc.T > 0.0)) throw ValidationError("problem.T must be positive");
    pc.u_coeffs = parse_septet(require(obj, "u_coefficients", "problem"),
                               "problem.u_coefficients");
    pc.v_coeffs = parse_septet(require(obj, "v_coefficients", "problem"),
                               "problem.v_coefficients");
    const json& prof = require(obj, "initial_profile", "problem");
    if (!prof.is_string())
      throw ValidationError("problem.initial_profile must be a string");
    pc.initial_profile = prof.get<std::string>();
    if (pc.initial_profile != "zero" && pc.initial_profile != "sech_modulated" &&
        pc.initial_profile != "poly_bump")
      throw ValidationError(
          "problem.initial_profile must be zero, sech_modulated, or poly_bump; got \"" +
          pc.initial_profile + "\"");
  } else {
    static const std::set<std::string> keys = {"case", "alpha"};
    reject_unknown_keys(obj, keys, "problem");
    // Presets own their domain and coefficients.
    const scheme::ProblemSpec p = pc.kind == harness::CaseKind::Example1
                                      ? scheme::make_example1(pc.alpha)
                                      : scheme::make_example2(pc.alpha);
    pc.a = p.a;
    pc.b = p.b;
    pc.T = p.T;
    pc.u_coeffs = p.u_coeffs;
    pc.v_coeffs = p.v_coeffs;
  }
  return pc;
}

linalg::SolverConfig parse_solver(const json& obj) {
  if (!obj.is_object()) throw ValidationError("\"solver\" must be an object");
  static const std::set<std::string> keys = {"mode", "tol", "max_iter", "dense_cutoff"};
  reject_unknown_keys(obj, keys, "solver");
  linalg::SolverConfig s;
  if (obj.contains("mode")) {
    const json& m = obj.at("mode");
    if (!m.is_string()) throw ValidationError("solver.mode must be a string");
    const std::string mode = m.get<std::string>();
    if (mode == "auto")
      s.mode = linalg::SolveMode::Auto;
    else if (mode == "dense")
      s.mode = linalg::SolveMode::Dense;
    else if (mode == "krylov")
      s.mode = linalg::SolveMode::Krylov;
    else
      throw ValidationError("solver.mode must be auto, dense, or krylov; got \"" + mode +
                            "\"");
  }
  if (obj.contains("tol")) {
    s.tol = as_number(obj.at("tol"), "solver.tol");
    if (!(s.tol > 0.0)) throw ValidationError("solver.tol must be positive");
  }
  if (obj.contains("max_iter")) {
    s.max_iter = static_cast<int>(as_count(obj.at("max_iter"), "solver.max_iter"));
    if (s.max_iter < 1) throw ValidationError("solver.max_iter must be >= 1");
  }
  if (obj.contains("dense_cutoff"))
    s.dense_cutoff = as_count(obj.at("dense_cutoff"), "solver.dense_cutoff");
  return s;
}

harness::ReferenceSpec parse_reference_spec(const json& obj) {
  if (!obj.is_object()) throw ValidationError("study.reference must be an object");
  harness::ReferenceSpec r;
  const json& type = require(obj, "type", "study.reference");
  if (!type.is_string()) throw ValidationError("study.reference.type must be a string");
  const std::string t = type.get<std::string>();
  if (t == "exact") {
    static const std::set<std::string> keys = {"type"};
    reject_unknown_keys(obj, keys, "study.reference");
    r.exact = true;
  } else if (t == "fine") {
    static const std::set<std::string> keys = {"type", "M_ref", "N_ref", "scheme_order"};
    reject_unknown_keys(obj, keys, "study.reference");
    r.exact = false;
    r.M_ref = as_count(require(obj, "M_ref", "study.reference"), "study.reference.M_ref");
    r.N_ref = as_count(require(obj, "N_ref", "study.reference"), "study.reference.N_ref");
    if (obj.contains("scheme_order"))
      r.scheme_order = static_cast<int>(
          as_count(obj.at("scheme_order"), "study.reference.scheme_order"));
  } else {
    throw ValidationError("study.reference.type must be exact or fine; got \"" + t + "\"");
  }
  return r;
}

StudyConfig parse_study(const json& obj) {
  if (!obj.is_object()) throw ValidationError("\"study\" must be an object");
  static const std::set<std::string> keys = {"alphas", "resolutions", "reference",
                                             "extra_norms"};
  reject_unknown_keys(obj, keys, "study");
  StudyConfig sc;
  const json& alphas = require(obj, "alphas", "study");
  if (!alphas.is_array() || alphas.empty())
    throw ValidationError("study.alphas must be a nonempty array");
  for (const json& a : alphas) sc.alphas.push_back(as_number(a, "study.alphas entry"));
  const json& res = require(obj, "resolutions", "study");
  if (!res.is_array() || res.empty())
    throw ValidationError("study.resolutions must be a nonempty array");
  for (const json& r : res) {
    if (!r.is_array() || r.size() != 2)
      throw ValidationError("study.resolutions entries must be [M, N] pairs");
    sc.resolutions.emplace_back(as_count(r[0], "study resolution M"),
                                as_count(r[1], "study resolution N"));
  }
  sc.reference = parse_reference_spec(require(obj, "reference", "study"));
  if (obj.contains("extra_norms")) {
    if (!obj.at("extra_norms").is_boolean())
      throw ValidationError("study.extra_norms must be a boolean");
    sc.extra_norms = obj.at("extra_norms").get<bool>();
  }
  return sc;
}

SweepConfig parse_sweep(const json& obj) {
  if (!obj.is_object()) throw ValidationError("\"sweep\" must be an object");
  static const std::set<std::string> keys = {"tau", "M_list"};
  reject_unknown_keys(obj, keys, "sweep");
  SweepConfig sw;
  sw.tau = as_number(require(obj, "tau", "sweep"), "sweep.tau");
  if (!(sw.tau > 0.0)) throw ValidationError("sweep.tau must be positive");
  const json& ms = require(obj, "M_list", "sweep");
  if (!ms.is_array() || ms.empty())
    throw ValidationError("sweep.M_list must be a nonempty array");
  for (const json& m : ms) sw.M_list.push_back(as_count(m, "sweep.M_list entry"));
  return sw;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("configuration is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("configuration must be a JSON object");

  RunConfig cfg;
  const json& cmd = require(root, "command", "configuration");
  if (!cmd.is_string()) throw ValidationError("command must be a string");
  const std::string command = cmd.get<std::string>();
  std::set<std::string> allowed = {"command", "problem", "scheme_order",
                                   "solver",  "output",  "workers"};
  if (command == "solve") {
    cfg.command = Command::Solve;
    allowed.insert("mesh");
  } else if (command == "study") {
    cfg.command = Command::Study;
    allowed.insert("study");
  } else if (command == "reference") {
    cfg.command = Command::Reference;
    allowed.insert("reference");
  } else if (command == "sweep") {
    cfg.command = Command::Sweep;
    allowed.insert("sweep");
  } else {
    throw ValidationError("command must be solve, study, reference, or sweep; got \"" +
                          command + "\"");
  }
  reject_unknown_keys(root, allowed, "configuration");

  cfg.problem = parse_problem(require(root, "problem", "configuration"));

  if (root.contains("scheme_order")) {
    cfg.scheme_order =
        static_cast<int>(as_count(root.at("scheme_order"), "scheme_order"));
    if (cfg.scheme_order != 2 && cfg.scheme_order != 4)
      throw ValidationError("scheme_order must be 2 or 4, got " +
                            std::to_string(cfg.scheme_order));
  }
  if (root.contains("solver")) cfg.solver = parse_solver(root.at("solver"));
  if (root.contains("workers")) {
    cfg.workers = static_cast<int>(as_count(root.at("workers"), "workers"));
    if (cfg.workers < 1) throw ValidationError("workers must be >= 1");
  }
  if (root.contains("output")) {
    const json& out = root.at("output");
    if (!out.is_object()) throw ValidationError("\"output\" must be an object");
    static const std::set<std::string> keys = {"directory", "snapshot_levels"};
    reject_unknown_keys(out, keys, "output");
    if (out.contains("directory")) {
      if (!out.at("directory").is_string())
        throw ValidationError("output.directory must be a string");
      cfg.output.directory = out.at("directory").get<std::string>();
    }
    if (out.contains("snapshot_levels")) {
      const json& lv = out.at("snapshot_levels");
      if (!lv.is_array())
        throw ValidationError("output.snapshot_levels must be an array");
      for (const json& l : lv)
        cfg.output.snapshot_levels.push_back(as_count(l, "output.snapshot_levels entry"));
    }
  }

  if (cfg.command == Command::Solve && root.contains("mesh")) {
    const json& mesh = root.at("mesh");
    if (!mesh.is_object()) throw ValidationError("\"mesh\" must be an object");
    static const std::set<std::string> keys = {"M", "N"};
    reject_unknown_keys(mesh, keys, "mesh");
    cfg.mesh.M = as_count(require(mesh, "M", "mesh"), "mesh.M");
    cfg.mesh.N = as_count(require(mesh, "N", "mesh"), "mesh.N");
    if (cfg.mesh.M < 2) throw ValidationError("mesh.M must be >= 2");
    if (cfg.mesh.N < 2) throw ValidationError("mesh.N must be >= 2");
  }
  if (cfg.command == Command::Study)
    cfg.study = parse_study(require(root, "study", "configuration"));
  if (cfg.command == Command::Sweep)
    cfg.sweep = parse_sweep(require(root, "sweep", "configuration"));
  if (cfg.command == Command::Reference) {
    const json& ref = require(root, "reference", "configuration");
    if (!ref.is_object()) throw ValidationError("\"reference\" must be an object");
    static const std::set<std::string> keys = {"M_ref", "N_ref"};
    reject_unknown_keys(ref, keys, "reference");
    cfg.reference_mesh = {as_count(require(ref, "M_ref", "reference"), "reference.M_ref"),
                          as_count(require(ref, "N_ref", "reference"), "reference.N_ref")};
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open configuration file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& cfg) {
  json root;
  switch (cfg.command) {
    case Command::Solve:
      root["command"] = "solve";
      break;
    case Command::Study:
      root["command"] = "study";
      break;
    case Command::Reference:
      root["command"] = "reference";
      break;
    case Command::Sweep:
      root["command"] = "sweep";
      break;
  }

  json problem;
  switch (cfg.problem.kind) {
    case harness::CaseKind::Example1:
      problem["case"] = "example1";
      break;
    case harness::CaseKind::Example2:
      problem["case"] = "example2";
      break;
    case harness::CaseKind::Custom:
      problem["case"] = "custom";
      break;
  }
  problem["alpha"] = cfg.problem.alpha;
  if (cfg.problem.kind == harness::CaseKind::Custom) {
    problem["a"] = cfg.problem.a;
    problem["b"] = cfg.problem.b;
    problem["T"] = cfg.problem.T;
    problem["u_coefficients"] = septet_to_json(cfg.problem.u_coeffs);
    problem["v_coefficients"] = septet_to_json(cfg.problem.v_coeffs);
    problem["initial_profile"] = cfg.problem.initial_profile;
  }
  root["problem"] = problem;

  root["scheme_order"] = cfg.scheme_order;
  json solver;
  switch (cfg.solver.mode) {
    case linalg::SolveMode::Auto:
      solver["mode"] = "auto";
      break;
    case linalg::SolveMode::Dense:
      solver["mode"] = "dense";
      break;
    case linalg::SolveMode::Krylov:
      solver["mode"] = "krylov";
      break;
  }
  solver["tol"] = cfg.solver.tol;
  solver["max_iter"] = cfg.solver.max_iter;
  solver["dense_cutoff"] = cfg.solver.dense_cutoff;
  root["solver"] = solver;
  root["workers"] = cfg.workers;

  json output;
  output["directory"] = cfg.output.directory;
  if (!cfg.output.snapshot_levels.empty())
    output["snapshot_levels"] = cfg.output.snapshot_levels;
  root["output"] = output;

  if (cfg.command == Command::Solve) {
    root["mesh"] = {{"M", cfg.mesh.M}, {"N", cfg.mesh.N}};
  }
  if (cfg.command == Command::Study && cfg.study) {
    json study;
    study["alphas"] = cfg.study->alphas;
    json res = json::array();
    for (const auto& [M, N] : cfg.study->resolutions) res.push_back({M, N});
    study["resolutions"] = res;
    if (cfg.study->reference.exact) {
      study["reference"] = {{"type", "exact"}};
    } else {
      study["reference"] = {{"type", "fine"},
                            {"M_ref", cfg.study->reference.M_ref},
                            {"N_ref", cfg.study->reference.N_ref},
                            {"scheme_order", cfg.study->reference.scheme_order}};
    }
    study["extra_norms"] = cfg.study->extra_norms;
    root["study"] = study;
  }
  if (cfg.command == Command::Sweep && cfg.sweep) {
    root["sweep"] = {{"tau", cfg.sweep->tau}, {"M_list", cfg.sweep->M_list}};
  }
  if (cfg.command == Command::Reference && cfg.reference_mesh) {
    root["reference"] = {{"M_ref", cfg.reference_mesh->first},
                         {"N_ref", cfg.reference_mesh->second}};
  }
  return root.dump(2);
}

scheme::ProblemSpec make_problem(const ProblemConfig& pc) {
  switch (pc.kind) {
    case harness::CaseKind::Example1:
      return scheme::make_example1(pc.alpha);
    case harness::CaseKind::Example2:
      return scheme::make_example2(pc.alpha);
    case harness::CaseKind::Custom:
      break;
  }
  scheme::ProblemSpec p;
  p.alpha = pc.alpha;
  p.a = pc.a;
  p.b = pc.b;
  p.T = pc.T;
  p.u_coeffs = pc.u_coeffs;
  p.v_coeffs = pc.v_coeffs;
  const double a = pc.a, width = pc.b - pc.a;
  scheme::SpaceFn profile;
  if (pc.initial_profile == "zero") {
    profile = [](double) { return Complex(0.0, 0.0); };
  } else if (pc.initial_profile == "sech_modulated") {
    profile = [](double x) {
      return (1.0 / std::cosh(x)) * std::exp(Complex(0.0, 2.0 * x));
    };
  } else if (pc.initial_profile == "poly_bump") {
    profile = [a, width](double x) {
      const double s = (x - a) / width;
      const double y = s * (1.0 - s);
      return Complex(y * y * y * y, 0.0);
    };
  } else {
    throw ValidationError("unknown initial_profile \"" + pc.initial_profile + "\"");
  }
  p.initial_u = profile;
  p.initial_v = profile;
  return p;
}

std::string config_hash(const RunConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a(serialize_config(cfg))));
  return std::string(buf);
}

}  // namespace cfgl::config
