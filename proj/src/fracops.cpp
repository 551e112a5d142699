#include "cfgl/fracops.hpp"

#include <cmath>

namespace cfgl::fracops {

FracCoefficients build_coefficients(double alpha, size_t K) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ValidationError("build_coefficients: alpha must lie in (1, 2], got " +
                          std::to_string(alpha));
  if (K < 1) throw ValidationError("build_coefficients: K must be >= 1");

  FracCoefficients out;
  out.alpha = alpha;
  out.stencil.resize(K + 1);
  // c_0 = Gamma(alpha+1) / Gamma(alpha/2+1)^2, via lgamma for stability.
  out.stencil[0] = std::exp(std::lgamma(alpha + 1.0) - 2.0 * std::lgamma(alpha / 2.0 + 1.0));
  for (size_t k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    out.stencil[k] = (1.0 - (alpha + 1.0) / (alpha / 2.0 + kk)) * out.stencil[k - 1];
  }
  out.h_pow_alpha = 1.0;
  return out;
}

FracOperator::FracOperator(double alpha, size_t m_interior, double h)
    : m_(m_interior), h_(h) {
  if (m_interior < 1)
    throw ValidationError("FracOperator: need at least one interior node");
  if (!(h > 0.0)) throw ValidationError("FracOperator: h must be positive");
  // Reach never exceeds the interval (K = m-1 couples node 1 to node m),
  // but K >= 1 is required even for the single-node mesh.
  const size_t K = std::max<size_t>(1, m_interior - 1);
  coeffs_ = build_coefficients(alpha, K);
  coeffs_.h_pow_alpha = std::pow(h, alpha);
}

const fft::ToeplitzConvolver& FracOperator::convolver() const {
  if (!conv_) {
    // First column of the m-by-m Toeplitz matrix; the stencil may carry one
    // extra entry on the single-node mesh.
    RVector col(coeffs_.stencil.begin(),
                coeffs_.stencil.begin() + static_cast<long>(std::min(m_, coeffs_.stencil.size())));
    conv_ = std::make_shared<fft::ToeplitzConvolver>(col);
  }
  return *conv_;
}

const fft::DftPlan& FracOperator::node_plan() const {
  if (!node_plan_) node_plan_ = std::make_shared<fft::DftPlan>(m_);
  return *node_plan_;
}

CVector apply_dense(const FracOperator& op, const CVector& field) {
  const size_t m = op.m_interior();
  if (field.size() != m)
    throw ValidationError("apply_dense: field length " + std::to_string(field.size()) +
                          " does not match operator dimension " + std::to_string(m));
  const RVector& c = op.coeffs().stencil;
  const double scale = 1.0 / op.coeffs().h_pow_alpha;
  CVector out(m);
  for (size_t j = 0; j < m; ++j) {
    Complex acc(0.0, 0.0);
    for (size_t i = 0; i < m; ++i) {
      const size_t k = j >= i ? j - i : i - j;
      if (k < c.size()) acc += c[k] * field[i];
    }
    out[j] = acc * scale;
  }
  return out;
}

CVector apply_fft(const FracOperator& op, const CVector& field) {
  const size_t m = op.m_interior();
  if (field.size() != m)
    throw ValidationError("apply_fft: field length " + std::to_string(field.size()) +
                          " does not match operator dimension " + std::to_string(m));
  CVector out = op.convolver().apply(field);
  const double scale = 1.0 / op.coeffs().h_pow_alpha;
  for (Complex& z : out) z *= scale;
  return out;
}

CVector apply_average(double alpha, const CVector& field) {
  if (!(alpha > 1.0 && alpha <= 2.0))
    throw ValidationError("apply_average: alpha must lie in (1, 2], got " +
                          std::to_string(alpha));
  const size_t m = field.size();
  const double side = alpha / 24.0;
  const double mid = 1.0 - alpha / 12.0;
  CVector out(m);
  for (size_t j = 0; j < m; ++j) {
    Complex acc = mid * field[j];
    if (j > 0) acc += side * field[j - 1];
    if (j + 1 < m) acc += side * field[j + 1];
    out[j] = acc;
  }
  return out;
}

double seminorm_quadratic(const FracOperator& op, const CVector& field) {
  const CVector tf = apply_fft(op, field);
  Complex q(0.0, 0.0);
  for (size_t j = 0; j < field.size(); ++j) q += tf[j] * std::conj(field[j]);
  q *= op.h();
  if (std::abs(q.imag()) > 1e-12 * std::max(1.0, std::abs(q.real())))
    throw SolverError("seminorm_quadratic: quadratic form has spurious imaginary part " +
                          std::to_string(q.imag()),
                      std::abs(q.imag()), 0);
  return std::sqrt(std::max(0.0, q.real()));
}

}  // namespace cfgl::fracops
