#include "pcgkit/resample.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcgkit/error.hpp"

namespace pcgkit {

namespace {

constexpr int kZeroCrossings = 32;
constexpr int kTableResolution = 512;  // entries per zero crossing
constexpr double kKaiserBeta = 8.6;
constexpr double kRolloff = 0.95;

// sinc(u) * kaiser(u / kZeroCrossings) sampled on [0, kZeroCrossings].
const std::vector<double>& kernel_table() {
  static const std::vector<double> table = [] {
    const std::size_t n = static_cast<std::size_t>(kZeroCrossings) * kTableResolution + 2;
    std::vector<double> t(n, 0.0);
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / kTableResolution;
      if (u >= kZeroCrossings) break;
      const double r = u / kZeroCrossings;
      const double window = std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
      const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      t[i] = sinc * window;
    }
    return t;
  }();
  return table;
}

double kernel(double u) {
  u = std::abs(u);
  if (u >= kZeroCrossings) return 0.0;
  const auto& table = kernel_table();
  const double pos = u * kTableResolution;
  const std::size_t i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return table[i] + frac * (table[i + 1] - table[i]);
}

// ratio = output rate / input rate.
std::vector<double> resample_impl(std::span<const double> input, double ratio, std::size_t out_len) {
  std::vector<double> out(out_len, 0.0);
  if (input.empty()) return out;
  const double cutoff = std::min(1.0, ratio) * kRolloff;
  const double half_width = kZeroCrossings / cutoff;
  const auto n_in = static_cast<std::ptrdiff_t>(input.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const double x = static_cast<double>(n) / ratio;
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::ceil(x - half_width)));
    const auto hi = std::min<std::ptrdiff_t>(n_in - 1, static_cast<std::ptrdiff_t>(std::floor(x + half_width)));
    double acc = 0.0;
    for (std::ptrdiff_t k = lo; k <= hi; ++k) {
      acc += input[static_cast<std::size_t>(k)] * kernel(cutoff * (x - static_cast<double>(k)));
    }
    out[n] = cutoff * acc;
  }
  return out;
}

}  // namespace

Waveform resample(const Waveform& wave, int target_sr) {
  if (target_sr <= 0) throw ValidationError("resample: target sample rate must be positive");
  if (wave.sample_rate <= 0) throw ValidationError("resample: source sample rate must be positive");
  if (target_sr == wave.sample_rate) return wave;
  const double ratio = static_cast<double>(target_sr) / wave.sample_rate;
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(wave.size()) * ratio));
  return Waveform{resample_impl(wave.samples, ratio, out_len), target_sr};
}

std::vector<double> resample_to_length(std::span<const double> input, std::size_t out_len) {
  if (out_len == input.size()) return {input.begin(), input.end()};
  if (input.empty()) return std::vector<double>(out_len, 0.0);
  const double ratio = static_cast<double>(out_len) / static_cast<double>(input.size());
  return resample_impl(input, ratio, out_len);
}

}  // namespace pcgkit
