#pragma once

#include <memory>

#include "cfgl/common.hpp"

namespace cfgl::fft {

// Fixed-size complex DFT pair backed by FFTW. Plans are created with
// FFTW_ESTIMATE | FFTW_UNALIGNED under a global planning lock (FFTW's
// planner is not thread-safe); execution uses the new-array interface on
// caller-provided buffers, so a single plan can be shared by concurrent
// workers.
class DftPlan {
public:
  explicit DftPlan(size_t n);
  ~DftPlan();

  DftPlan(const DftPlan&) = delete;
  DftPlan& operator=(const DftPlan&) = delete;
  DftPlan(DftPlan&&) noexcept;
  DftPlan& operator=(DftPlan&&) noexcept;

  size_t size() const { return n_; }

  // out = DFT(in), unnormalized. Buffers must have length size() and may
  // alias each other.
  void forward(const Complex* in, Complex* out) const;
  // out = IDFT(in) scaled by 1/size().
  void backward(const Complex* in, Complex* out) const;

private:
  size_t n_ = 0;
  void* fwd_ = nullptr;  // fftw_plan
  void* bwd_ = nullptr;  // fftw_plan
};

inline size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Multiplication by an m-by-m symmetric Toeplitz matrix with first column
// `col`, via embedding into a circulant of power-of-two length >= 2(m-1)+1.
class ToeplitzConvolver {
public:
  ToeplitzConvolver(const RVector& first_column);

  size_t dim() const { return m_; }
  const RVector& first_column() const { return col_; }

  // y = T x for x of length dim().
  void apply(const Complex* x, Complex* y) const;
  CVector apply(const CVector& x) const;

private:
  size_t m_;
  size_t len_;  // circulant length, power of two
  RVector col_;
  CVector symbol_;  // DFT of the embedded first circulant column
  std::shared_ptr<DftPlan> plan_;
};

}  // namespace cfgl::fft
