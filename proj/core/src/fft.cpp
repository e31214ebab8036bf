#include "pcgkit/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "pcgkit/error.hpp"

namespace pcgkit {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spectrum = nullptr;
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;

  ~Impl() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
    fftw_free(real);
    fftw_free(spectrum);
  }
};

RealFft::RealFft(std::size_t size) : size_(size), impl_(std::make_unique<Impl>()) {
  if (size < 2) throw ValidationError("FFT size must be at least 2");
  const int n = static_cast<int>(size);
  std::lock_guard lock(planner_mutex());
  impl_->real = fftw_alloc_real(size);
  impl_->spectrum = fftw_alloc_complex(size / 2 + 1);
  impl_->forward = fftw_plan_dft_r2c_1d(n, impl_->real, impl_->spectrum, FFTW_ESTIMATE);
  impl_->inverse = fftw_plan_dft_c2r_1d(n, impl_->spectrum, impl_->real, FFTW_ESTIMATE);
  if (!impl_->forward || !impl_->inverse) throw Error("FFTW plan creation failed");
}

RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::forward(std::span<const double> input, std::span<std::complex<double>> out) {
  std::copy(input.begin(), input.end(), impl_->real);
  fftw_execute(impl_->forward);
  for (std::size_t k = 0; k < bins(); ++k) out[k] = {impl_->spectrum[k][0], impl_->spectrum[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> spectrum, std::span<double> out) {
  for (std::size_t k = 0; k < bins(); ++k) {
    impl_->spectrum[k][0] = spectrum[k].real();
    impl_->spectrum[k][1] = spectrum[k].imag();
  }
  // c2r destroys its input, which is fine since the buffer is ours.
  fftw_execute(impl_->inverse);
  const double scale = 1.0 / static_cast<double>(size_);
  for (std::size_t i = 0; i < size_; ++i) out[i] = impl_->real[i] * scale;
}

std::vector<double> hann_window(std::size_t size) {
  std::vector<double> w(size);
  for (std::size_t i = 0; i < size; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(size));
  }
  return w;
}

}  // namespace pcgkit
