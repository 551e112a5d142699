#pragma once

#include <memory>
#include <optional>

#include "cfgl/common.hpp"
#include "cfgl/fft_plan.hpp"

namespace cfgl::fracops {

// Centered-difference stencil weights for the fractional Laplacian of
// order alpha in (1, 2]. stencil[k] holds c_k for k = 0..K; the full
// stencil is symmetric (c_{-k} = c_k). h_pow_alpha caches h^alpha for the
// mesh the stencil is used on (1.0 until attached to an operator).
struct FracCoefficients {
  double alpha = 0.0;
  RVector stencil;
  double h_pow_alpha = 1.0;
};

// c_0 = Gamma(alpha+1) / Gamma(alpha/2+1)^2, then the ratio recurrence
// c_k = (1 - (alpha+1)/(alpha/2+k)) * c_{k-1}. Requires 1 < alpha <= 2 and
// K >= 1.
FracCoefficients build_coefficients(double alpha, size_t K);

// Discrete fractional Laplacian on the interior nodes of a uniform mesh,
// with fields extended by zero outside the interval. For a mesh with M
// subintervals there are m_interior = M-1 interior nodes and the stencil
// reach is K = M-2 (K = 1 when M = 2, where the stencil never leaves the
// single node).
class FracOperator {
public:
  FracOperator(double alpha, size_t m_interior, double h);

  const FracCoefficients& coeffs() const { return coeffs_; }
  size_t m_interior() const { return m_; }
  double h() const { return h_; }
  double alpha() const { return coeffs_.alpha; }

  const fft::ToeplitzConvolver& convolver() const;
  // DFT of length m_interior, used by circulant preconditioners.
  const fft::DftPlan& node_plan() const;

private:
  FracCoefficients coeffs_;
  size_t m_;
  double h_;
  mutable std::shared_ptr<fft::ToeplitzConvolver> conv_;
  mutable std::shared_ptr<fft::DftPlan> node_plan_;
};

// Direct O(m^2) evaluation of (Delta_h^alpha u)_j = h^{-alpha} sum_k c_k u_{j-k}.
// Reference implementation; apply_fft must match it.
CVector apply_dense(const FracOperator& op, const CVector& field);

// Same operator via circulant-embedded FFT convolution.
CVector apply_fft(const FracOperator& op, const CVector& field);

// Three-point average (alpha/24, 1 - alpha/12, alpha/24) with zero
// out-of-range neighbors. At alpha = 2 this is the classical (1/12, 5/6, 1/12)
// compact average.
CVector apply_average(double alpha, const CVector& field);

// sqrt(Re(h * sum_j (Delta_h^alpha u)_j * conj(u_j))). The quadratic form is
// real nonnegative in exact arithmetic; an imaginary part above 1e-12
// relative to the real part is reported as an error.
double seminorm_quadratic(const FracOperator& op, const CVector& field);

}  // namespace cfgl::fracops
