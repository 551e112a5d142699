#pragma once

#include "cfgl/common.hpp"

namespace cfgl::manufactured {

// Closed-form benchmark solution on [0, 1]:
//   u(x, t) = exp(-t) * phi(x),  v(x, t) = (t+1)^3 * phi(x),
//   phi(x)  = x^4 (1-x)^4.
// phi vanishes to fourth order at both endpoints, so the zero extension
// used by the discrete operator is smooth enough for second-order spatial
// accuracy.
struct PolySolution {
  // phi expanded in monomials x^4..x^8.
  static constexpr double spatial_coeffs[5] = {1.0, -4.0, 6.0, -4.0, 1.0};
  static constexpr int min_degree = 4;

  static double profile(double x);             // phi(x)
  static double profile_dd(double x);          // phi''(x)
  static Complex u(double x, double t);        // exp(-t) phi
  static Complex v(double x, double t);        // (t+1)^3 phi
  static Complex u_t(double x, double t);      // -exp(-t) phi
  static Complex v_t(double x, double t);      // 3 (t+1)^2 phi
};

// Left Riemann-Liouville derivative of x^p on x in [0, 1]:
//   Gamma(p+1) / Gamma(p+1-alpha) * x^{p-alpha}.
// Valid for p >= 4 and 1 < alpha <= 2 (the formula also holds at the
// endpoints by continuity).
double riesz_monomial_left(int p, double alpha, double x);

// (-Delta)^{alpha/2} phi at x in [0, 1]:
//   (1 / (2 cos(pi alpha / 2))) * (g(x) + g(1-x)),
// where g is the left derivative of phi term by term. At alpha = 2 the
// prefactor is singular and the value is computed as -phi''(x); both
// branches agree in the limit.
double riesz_derivative_poly(double alpha, double x);

// Forcing terms that make (u, v) above solve the coupled system with
// coefficients
//   u-equation: upsilon+i eta = 1+i,  kappa+i zeta = -1-i,
//               delta+i beta  = 1+i,  gamma = 1,
//   v-equation: upsilon+i eta = 1-i,  kappa+i zeta = 1+i,
//               delta+i beta  = 1-i,  gamma = -1.
// Returned as (f, g) for the u- and v-equations. Evaluated analytically
// (continuous Riesz derivative), not through the discrete operator.
std::pair<Complex, Complex> example1_sources(double alpha, double x, double t);

}  // namespace cfgl::manufactured
