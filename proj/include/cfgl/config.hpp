#pragma once

#include <filesystem>
#include <optional>

#include "cfgl/harness.hpp"

namespace cfgl::config {

enum class Command { Solve, Study, Reference, Sweep };

struct MeshConfig {
  size_t M = 64;
  size_t N = 64;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<size_t> snapshot_levels;
};

struct ProblemConfig {
  harness::CaseKind kind = harness::CaseKind::Example1;
  double alpha = 1.5;
  // Custom-case fields; presets fill them from the case definition.
  double a = 0.0, b = 1.0, T = 1.0;
  scheme::CoefficientSeptet u_coeffs, v_coeffs;
  std::string initial_profile;  // custom only: "zero" | "sech_modulated" | "poly_bump"
};

struct StudyConfig {
  RVector alphas;
  std::vector<std::pair<size_t, size_t>> resolutions;
  harness::ReferenceSpec reference;
  bool extra_norms = false;
};

struct SweepConfig {
  double tau = 0.01;
  std::vector<size_t> M_list;
};

struct RunConfig {
  Command command = Command::Solve;
  ProblemConfig problem;
  MeshConfig mesh;
  int scheme_order = 2;
  linalg::SolverConfig solver;
  OutputConfig output;
  std::optional<StudyConfig> study;
  std::optional<SweepConfig> sweep;
  std::optional<std::pair<size_t, size_t>> reference_mesh;  // reference command
  int workers = 1;
};

// Parses and validates a JSON configuration. Unknown keys anywhere are
// rejected by name; invalid coefficient ranges (e.g. non-positive upsilon)
// are rejected with the field named. Throws ValidationError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

// Canonical JSON serialization; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

// Materialize the ProblemSpec the configuration describes.
scheme::ProblemSpec make_problem(const ProblemConfig& pc);

// Stable fingerprint of the configuration (FNV-1a over the canonical
// serialization), quoted in report and snapshot metadata.
std::string config_hash(const RunConfig& cfg);

}  // namespace cfgl::config
