#include "cfgl/fft_plan.hpp"

#include <fftw3.h>

#include <mutex>

namespace cfgl::fft {

namespace {
// FFTW's planner mutates global state; serialize plan creation/destruction.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

DftPlan::DftPlan(size_t n) : n_(n) {
  if (n == 0) throw ValidationError("DftPlan: size must be positive");
  std::lock_guard<std::mutex> lock(planner_mutex());
  // Plan on throwaway buffers; execution always goes through the new-array
  // interface with distinct in/out arrays, and FFTW requires the execution
  // layout to match the planned one (an in-place plan run on distinct
  // arrays is undefined, and the n = 1 plan really does drop the output).
  // UNALIGNED keeps the plan valid for any buffer.
  fftw_complex* buf_in = fftw_alloc_complex(n);
  fftw_complex* buf_out = fftw_alloc_complex(n);
  fwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_FORWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  bwd_ = fftw_plan_dft_1d(static_cast<int>(n), buf_in, buf_out, FFTW_BACKWARD,
                          FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(buf_in);
  fftw_free(buf_out);
  if (!fwd_ || !bwd_) throw std::runtime_error("DftPlan: fftw planning failed");
}

DftPlan::~DftPlan() {
  if (fwd_ || bwd_) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  }
}

DftPlan::DftPlan(DftPlan&& other) noexcept
    : n_(other.n_), fwd_(other.fwd_), bwd_(other.bwd_) {
  other.fwd_ = other.bwd_ = nullptr;
  other.n_ = 0;
}

DftPlan& DftPlan::operator=(DftPlan&& other) noexcept {
  if (this != &other) {
    this->~DftPlan();
    n_ = other.n_;
    fwd_ = other.fwd_;
    bwd_ = other.bwd_;
    other.fwd_ = other.bwd_ = nullptr;
    other.n_ = 0;
  }
  return *this;
}

void DftPlan::forward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(fwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

void DftPlan::backward(const Complex* in, Complex* out) const {
  fftw_execute_dft(static_cast<fftw_plan>(bwd_),
                   reinterpret_cast<fftw_complex*>(const_cast<Complex*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
  const double scale = 1.0 / static_cast<double>(n_);
  for (size_t i = 0; i < n_; ++i) out[i] *= scale;
}

ToeplitzConvolver::ToeplitzConvolver(const RVector& first_column)
    : m_(first_column.size()), col_(first_column) {
  if (m_ == 0) throw ValidationError("ToeplitzConvolver: empty first column");
  len_ = next_pow2(std::max<size_t>(2 * m_ - 1, 1));
  plan_ = std::make_shared<DftPlan>(len_);

  // First column of the circulant embedding: c_0..c_{m-1}, zeros, then the
  // mirrored tail c_{m-1}..c_1 wrapped to the end.
  CVector circ(len_, Complex(0.0, 0.0));
  for (size_t k = 0; k < m_; ++k) circ[k] = Complex(col_[k], 0.0);
  for (size_t k = 1; k < m_; ++k) circ[len_ - k] = Complex(col_[k], 0.0);

  symbol_.resize(len_);
  plan_->forward(circ.data(), symbol_.data());
}

void ToeplitzConvolver::apply(const Complex* x, Complex* y) const {
  CVector work(len_, Complex(0.0, 0.0));
  std::copy(x, x + m_, work.begin());
  CVector spec(len_);
  plan_->forward(work.data(), spec.data());
  for (size_t i = 0; i < len_; ++i) spec[i] *= symbol_[i];
  plan_->backward(spec.data(), work.data());
  std::copy(work.begin(), work.begin() + m_, y);
}

CVector ToeplitzConvolver::apply(const CVector& x) const {
  if (x.size() != m_)
    throw ValidationError("ToeplitzConvolver: input length " + std::to_string(x.size()) +
                          " does not match dimension " + std::to_string(m_));
  CVector y(m_);
  apply(x.data(), y.data());
  return y;
}

}  // namespace cfgl::fft
