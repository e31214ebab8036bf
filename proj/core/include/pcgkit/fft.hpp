#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pcgkit {

// Real-input FFT of a fixed size backed by FFTW. Plans are created under a
// global lock (the FFTW planner is not thread safe); execution is
// reentrant per instance. Instances are not shareable across threads.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // input.size() == size(); out receives bins() values (unnormalized).
  void forward(std::span<const double> input, std::span<std::complex<double>> out);
  // spectrum.size() == bins(); out receives size() values scaled by 1/size().
  void inverse(std::span<const std::complex<double>> spectrum, std::span<double> out);

 private:
  struct Impl;
  std::size_t size_;
  std::unique_ptr<Impl> impl_;
};

// Periodic Hann window, w[n] = 0.5 - 0.5 cos(2 pi n / size).
std::vector<double> hann_window(std::size_t size);

}  // namespace pcgkit
