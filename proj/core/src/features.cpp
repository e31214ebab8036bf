#include "pcgkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>

#include "pcgkit/error.hpp"
#include "pcgkit/fft.hpp"

namespace pcgkit {

void FeatureConfig::validate() const {
  if (n_mels < 1) throw ValidationError("features n_mels must be positive");
  if (fft_size < 2) throw ValidationError("features fft_size must be at least 2");
  if (hop_length < 1 || hop_length > fft_size) {
    throw ValidationError("features hop_length must be in [1, fft_size]");
  }
  if (sample_rate <= 0) throw ValidationError("features sample_rate must be positive");
  if (fmin < 0.0 || !(fmin < effective_fmax()) || effective_fmax() > sample_rate / 2.0) {
    throw ValidationError("features require 0 <= fmin < fmax <= sample_rate / 2");
  }
}

FeatureConfig fixed_mode_features(int sample_rate) {
  FeatureConfig cfg;
  cfg.n_mels = 352;
  cfg.fft_size = 512;
  cfg.hop_length = 352;
  cfg.sample_rate = sample_rate;
  return cfg;
}

FeatureConfig cycle_mode_features(int sample_rate) {
  FeatureConfig cfg;
  cfg.n_mels = 128;
  cfg.fft_size = 1152;
  cfg.hop_length = 288;
  cfg.sample_rate = sample_rate;
  return cfg;
}

std::size_t frame_count(std::size_t length, std::size_t fft_size, std::size_t hop) {
  if (length < fft_size || hop == 0) return 0;
  return (length - fft_size) / hop + 1;
}

Matrix stft_magnitude(const Waveform& wave, int fft_size, int hop_length) {
  if (fft_size < 2 || hop_length < 1) throw ValidationError("stft: invalid fft_size or hop_length");
  const auto n = static_cast<std::size_t>(fft_size);
  const auto hop = static_cast<std::size_t>(hop_length);
  if (wave.size() < n) {
    throw ValidationError("stft: input of " + std::to_string(wave.size()) +
                          " samples is shorter than fft_size " + std::to_string(n));
  }
  const std::size_t frames = frame_count(wave.size(), n, hop);
  RealFft fft(n);
  const auto window = hann_window(n);
  Matrix mag(fft.bins(), frames);
  std::vector<double> buf(n);
  std::vector<std::complex<double>> spec(fft.bins());
  for (std::size_t t = 0; t < frames; ++t) {
    const std::size_t start = t * hop;
    for (std::size_t i = 0; i < n; ++i) buf[i] = wave.samples[start + i] * window[i];
    fft.forward(buf, spec);
    for (std::size_t k = 0; k < spec.size(); ++k) mag(k, t) = std::abs(spec[k]);
  }
  return mag;
}

namespace {
constexpr double kLinearMelStep = 200.0 / 3.0;
constexpr double kBreakHz = 1000.0;
constexpr double kBreakMel = kBreakHz / kLinearMelStep;
const double kLogStep = std::log(6.4) / 27.0;
}  // namespace

double hz_to_mel(double hz) {
  if (hz < kBreakHz) return hz / kLinearMelStep;
  return kBreakMel + std::log(hz / kBreakHz) / kLogStep;
}

double mel_to_hz(double mel) {
  if (mel < kBreakMel) return mel * kLinearMelStep;
  return kBreakHz * std::exp(kLogStep * (mel - kBreakMel));
}

namespace {

// n_mels + 2 band edges, evenly spaced in mel.
std::vector<double> mel_edges(const FeatureConfig& cfg) {
  const double lo = hz_to_mel(cfg.fmin);
  const double hi = hz_to_mel(cfg.effective_fmax());
  std::vector<double> edges(static_cast<std::size_t>(cfg.n_mels) + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(edges.size() - 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_center_frequencies(const FeatureConfig& cfg) {
  cfg.validate();
  const auto edges = mel_edges(cfg);
  return {edges.begin() + 1, edges.end() - 1};
}

Matrix mel_filterbank(const FeatureConfig& cfg) {
  cfg.validate();
  const auto n_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
  const auto edges = mel_edges(cfg);
  Matrix fb(static_cast<std::size_t>(cfg.n_mels), n_bins);
  for (std::size_t m = 0; m < fb.rows; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    const double area_norm = 2.0 / (right - left);
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      const double rising = (f - left) / (center - left);
      const double falling = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(rising, falling)) * area_norm;
    }
  }
  return fb;
}

std::size_t count_empty_filters(const Matrix& filterbank) {
  std::size_t empty = 0;
  for (std::size_t r = 0; r < filterbank.rows; ++r) {
    bool any = false;
    for (std::size_t c = 0; c < filterbank.cols && !any; ++c) any = filterbank(r, c) != 0.0;
    if (!any) ++empty;
  }
  return empty;
}

namespace {

std::shared_ptr<const Matrix> cached_filterbank(const FeatureConfig& cfg) {
  using Key = std::tuple<int, int, int, double, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Matrix>> cache;
  const Key key{cfg.n_mels, cfg.fft_size, cfg.sample_rate, cfg.fmin, cfg.effective_fmax()};
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<const Matrix>(mel_filterbank(cfg))).first;
  return it->second;
}

}  // namespace

MelSpectrogram mel_spectrogram(const Waveform& wave, const FeatureConfig& cfg) {
  cfg.validate();
  if (wave.sample_rate != cfg.sample_rate) {
    throw ValidationError("mel_spectrogram: waveform rate " + std::to_string(wave.sample_rate) +
                          " Hz differs from configured " + std::to_string(cfg.sample_rate) + " Hz");
  }
  const Matrix mag = stft_magnitude(wave, cfg.fft_size, cfg.hop_length);
  const auto fb = cached_filterbank(cfg);
  Matrix mel(fb->rows, mag.cols);
  double peak = 0.0;
  for (std::size_t m = 0; m < fb->rows; ++m) {
    for (std::size_t t = 0; t < mag.cols; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < fb->cols; ++k) {
        const double w = (*fb)(m, k);
        if (w != 0.0) acc += w * mag(k, t) * mag(k, t);
      }
      mel(m, t) = acc;
      peak = std::max(peak, acc);
    }
  }
  for (double& v : mel.data) {
    v = (peak > 0.0 && v > 0.0) ? std::max(cfg.log_floor_db, 10.0 * std::log10(v / peak)) : cfg.log_floor_db;
  }
  return MelSpectrogram{std::move(mel), cfg};
}

FeatureVector pool_features(const MelSpectrogram& mel, const std::string& id) {
  const std::size_t bands = mel.n_mels(), frames = mel.n_frames();
  if (frames < 2) throw ValidationError("pool_features: need at least two frames");
  FeatureVector out;
  out.id = id;
  out.vector.assign(2 * bands, 0.0);
  for (std::size_t m = 0; m < bands; ++m) {
    double sum = 0.0;
    for (std::size_t t = 0; t < frames; ++t) sum += mel.values(m, t);
    const double mean = sum / static_cast<double>(frames);
    double sq = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      const double d = mel.values(m, t) - mean;
      sq += d * d;
    }
    out.vector[m] = mean;
    out.vector[bands + m] = std::sqrt(sq / static_cast<double>(frames));
  }
  return out;
}

}  // namespace pcgkit
