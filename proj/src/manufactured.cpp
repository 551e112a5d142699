#include "cfgl/manufactured.hpp"

#include <cmath>

namespace cfgl::manufactured {

constexpr double PolySolution::spatial_coeffs[5];

double PolySolution::profile(double x) {
  const double y = x * (1.0 - x);
  return y * y * y * y;
}

double PolySolution::profile_dd(double x) {
  // phi'' from the monomial expansion sum a_p p (p-1) x^{p-2}.
  double acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    const int p = min_degree + i;
    acc += spatial_coeffs[i] * p * (p - 1) * std::pow(x, p - 2);
  }
  return acc;
}

Complex PolySolution::u(double x, double t) { return std::exp(-t) * profile(x); }

Complex PolySolution::v(double x, double t) {
  const double s = t + 1.0;
  return s * s * s * profile(x);
}

Complex PolySolution::u_t(double x, double t) { return -std::exp(-t) * profile(x); }

Complex PolySolution::v_t(double x, double t) {
  const double s = t + 1.0;
  return 3.0 * s * s * profile(x);
}

double riesz_monomial_left(int p, double alpha, double x) {
  if (p < 4) throw ValidationError("riesz_monomial_left: degree must be >= 4");
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ValidationError("riesz_monomial_left: alpha must lie in (1, 2]");
  if (x < 0.0 || x > 1.0)
    throw ValidationError("riesz_monomial_left: x must lie in [0, 1]");
  const double ratio =
      std::exp(std::lgamma(p + 1.0) - std::lgamma(p + 1.0 - alpha));
  return ratio * std::pow(x, p - alpha);
}

namespace {
// g(x) = left derivative of phi, term by term over the monomial expansion.
double left_of_profile(double alpha, double x) {
  double acc = 0.0;
  for (int i = 0; i < 5; ++i)
    acc += PolySolution::spatial_coeffs[i] *
           riesz_monomial_left(PolySolution::min_degree + i, alpha, x);
  return acc;
}
}  // namespace

double riesz_derivative_poly(double alpha, double x) {
  if (x < 0.0 || x > 1.0)
    throw ValidationError("riesz_derivative_poly: x must lie in [0, 1]");
  if (alpha == 2.0) return -PolySolution::profile_dd(x);
  const double pref = 1.0 / (2.0 * std::cos(kPi * alpha / 2.0));
  return pref * (left_of_profile(alpha, x) + left_of_profile(alpha, 1.0 - x));
}

std::pair<Complex, Complex> example1_sources(double alpha, double x, double t) {
  const Complex i1(0.0, 1.0);
  const Complex u = PolySolution::u(x, t);
  const Complex v = PolySolution::v(x, t);
  const double riesz_phi = riesz_derivative_poly(alpha, x);
  const double u_sq = std::norm(u);
  const double v_sq = std::norm(v);

  const Complex f = PolySolution::u_t(x, t) + (1.0 + i1) * std::exp(-t) * riesz_phi +
                    ((-1.0 - i1) * u_sq + (1.0 + i1) * v_sq) * u - u;
  const double s = t + 1.0;
  const Complex g = PolySolution::v_t(x, t) + (1.0 - i1) * s * s * s * riesz_phi +
                    ((1.0 + i1) * u_sq + (1.0 - i1) * v_sq) * v + v;
  return {f, g};
}

}  // namespace cfgl::manufactured
