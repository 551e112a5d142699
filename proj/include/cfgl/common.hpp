#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfgl {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;
using RVector = std::vector<double>;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Thrown for invalid configuration, parameters, or mesh/domain violations.
// The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown when an iterative or direct solve cannot reach the requested
// quality. Carries the best relative residual achieved and the iteration
// count at failure. The CLI maps this to exit code 2.
class SolverError : public std::runtime_error {
public:
  SolverError(const std::string& msg, double residual, int iterations)
      : std::runtime_error(msg), best_residual(residual), iterations(iterations) {}
  double best_residual;
  int iterations;
};

inline double inf_norm(const CVector& v) {
  double m = 0.0;
  for (const Complex& z : v) m = std::max(m, std::abs(z));
  return m;
}

inline double inf_diff(const CVector& a, const CVector& b) {
  if (a.size() != b.size())
    throw ValidationError("inf_diff: length mismatch (" + std::to_string(a.size()) +
                          " vs " + std::to_string(b.size()) + ")");
  double m = 0.0;
  for (size_t j = 0; j < a.size(); ++j) m = std::max(m, std::abs(a[j] - b[j]));
  return m;
}

inline double l2_norm(const CVector& v) {
  double s = 0.0;
  for (const Complex& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// FNV-1a over a byte string; used to fingerprint configurations in report
// and snapshot metadata.
inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace cfgl
