#include "pcgkit/time_stretch.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "pcgkit/error.hpp"
#include "pcgkit/fft.hpp"

namespace pcgkit {

using cplx = std::complex<double>;

VocoderParams vocoder_params_for(std::size_t length) {
  if (length < 2 * kMinVocoderWindow) {
    throw ValidationError("time stretch input of " + std::to_string(length) +
                          " samples is too short; need at least " +
                          std::to_string(2 * kMinVocoderWindow));
  }
  std::size_t window = 1024;
  while (2 * window > length) window /= 2;
  return VocoderParams{window, window / 4};
}

namespace {

// Centered (zero-padded by fft_size/2) Hann-windowed STFT, one vector of
// bins per frame.
std::vector<std::vector<cplx>> centered_stft(std::span<const double> x, const VocoderParams& p,
                                             RealFft& fft, const std::vector<double>& window) {
  const std::size_t n = p.fft_size;
  const std::size_t half = n / 2;
  const std::size_t n_frames = 1 + x.size() / p.hop;
  std::vector<std::vector<cplx>> frames(n_frames, std::vector<cplx>(fft.bins()));
  std::vector<double> buf(n);
  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::ptrdiff_t start = static_cast<std::ptrdiff_t>(t * p.hop) - static_cast<std::ptrdiff_t>(half);
    for (std::size_t i = 0; i < n; ++i) {
      const std::ptrdiff_t idx = start + static_cast<std::ptrdiff_t>(i);
      const double v = (idx >= 0 && idx < static_cast<std::ptrdiff_t>(x.size())) ? x[static_cast<std::size_t>(idx)] : 0.0;
      buf[i] = v * window[i];
    }
    fft.forward(buf, frames[t]);
  }
  return frames;
}

std::vector<double> centered_istft(const std::vector<std::vector<cplx>>& frames, const VocoderParams& p,
                                   RealFft& fft, const std::vector<double>& window, std::size_t length) {
  const std::size_t n = p.fft_size;
  const std::size_t total = n + p.hop * (frames.empty() ? 0 : frames.size() - 1);
  std::vector<double> acc(total, 0.0), norm(total, 0.0), buf(n);
  for (std::size_t t = 0; t < frames.size(); ++t) {
    fft.inverse(frames[t], buf);
    const std::size_t offset = t * p.hop;
    for (std::size_t i = 0; i < n; ++i) {
      acc[offset + i] += buf[i] * window[i];
      norm[offset + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(length, 0.0);
  const std::size_t half = n / 2;
  for (std::size_t i = 0; i < length && half + i < total; ++i) {
    const double w = norm[half + i];
    out[i] = w > 1e-10 ? acc[half + i] / w : acc[half + i];
  }
  return out;
}

double wrap_phase(double x) { return x - 2.0 * std::numbers::pi * std::round(x / (2.0 * std::numbers::pi)); }

}  // namespace

std::vector<double> time_stretch(std::span<const double> input, double rate, const VocoderParams& params) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ValidationError("time_stretch: rate must be positive");
  if (params.fft_size < 4 || params.hop == 0 || params.hop > params.fft_size) {
    throw ValidationError("time_stretch: invalid vocoder parameters");
  }
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(input.size()) / rate));
  RealFft fft(params.fft_size);
  const auto window = hann_window(params.fft_size);
  const auto frames = centered_stft(input, params, fft, window);
  const std::size_t bins = fft.bins();
  const std::size_t n_in = frames.size();

  // Expected phase advance per hop for each bin's center frequency.
  std::vector<double> advance(bins);
  for (std::size_t k = 0; k < bins; ++k) {
    advance[k] = 2.0 * std::numbers::pi * static_cast<double>(params.hop * k) / static_cast<double>(params.fft_size);
  }

  std::vector<double> phase(bins);
  for (std::size_t k = 0; k < bins; ++k) phase[k] = std::arg(frames[0][k]);

  const std::vector<cplx> silent(bins, cplx(0.0, 0.0));
  auto frame_at = [&](std::size_t i) -> const std::vector<cplx>& { return i < n_in ? frames[i] : silent; };

  std::vector<std::vector<cplx>> stretched;
  for (double step = 0.0; step < static_cast<double>(n_in); step += rate) {
    const auto i = static_cast<std::size_t>(step);
    const double alpha = step - static_cast<double>(i);
    const auto& a = frame_at(i);
    const auto& b = frame_at(i + 1);
    std::vector<cplx> out(bins);
    for (std::size_t k = 0; k < bins; ++k) {
      const double mag = (1.0 - alpha) * std::abs(a[k]) + alpha * std::abs(b[k]);
      out[k] = std::polar(mag, phase[k]);
      const double dphase = wrap_phase(std::arg(b[k]) - std::arg(a[k]) - advance[k]);
      phase[k] += advance[k] + dphase;
    }
    stretched.push_back(std::move(out));
  }
  return centered_istft(stretched, params, fft, window, out_len);
}

Waveform stretch_to_length(const Waveform& wave, std::size_t target_len) {
  if (target_len == 0) throw ValidationError("stretch_to_length: target length must be positive");
  const VocoderParams params = vocoder_params_for(wave.size());
  const double rate = static_cast<double>(wave.size()) / static_cast<double>(target_len);
  std::vector<double> out = time_stretch(wave.samples, rate, params);
  if (out.size() > target_len) {
    out.resize(target_len);
  } else if (out.size() < target_len) {
    const double edge = out.empty() ? 0.0 : out.back();
    out.resize(target_len, edge);
  }
  return Waveform{std::move(out), wave.sample_rate};
}

}  // namespace pcgkit
