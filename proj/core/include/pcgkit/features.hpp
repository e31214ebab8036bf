#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

// Dense row-major matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool empty() const { return data.empty(); }
};

struct FeatureConfig {
  int n_mels = 128;
  int fft_size = 1152;
  int hop_length = 288;
  int sample_rate = 4000;
  double fmin = 0.0;
  double fmax = 0.0;  // <= 0 means sample_rate / 2
  double log_floor_db = -80.0;

  double effective_fmax() const { return fmax > 0.0 ? fmax : sample_rate / 2.0; }
  void validate() const;
  bool operator==(const FeatureConfig&) const = default;
};

// Front-end parameters for fixed-window chunks: 352 mel bands, FFT 512, hop 352.
FeatureConfig fixed_mode_features(int sample_rate);
// Front-end parameters for cycle-normalized chunks: 128 mel bands, FFT 1152, hop 288.
FeatureConfig cycle_mode_features(int sample_rate);

// floor((length - fft_size) / hop) + 1, or 0 when length < fft_size.
std::size_t frame_count(std::size_t length, std::size_t fft_size, std::size_t hop);

// Hann-windowed, non-centered STFT magnitude, (fft_size/2 + 1) x n_frames.
// Throws ValidationError when the input is shorter than fft_size.
Matrix stft_magnitude(const Waveform& wave, int fft_size, int hop_length);

double hz_to_mel(double hz);  // Slaney: linear below 1 kHz, logarithmic above
double mel_to_hz(double mel);

// Triangular mel filters with area normalization, n_mels x (fft_size/2 + 1).
// When the bands are narrower than the FFT bin spacing some rows are all
// zero; this is allowed (see count_empty_filters).
Matrix mel_filterbank(const FeatureConfig& cfg);

// Center frequency of each filter, in Hz.
std::vector<double> mel_center_frequencies(const FeatureConfig& cfg);

std::size_t count_empty_filters(const Matrix& filterbank);

struct MelSpectrogram {
  Matrix values;  // n_mels x n_frames, dB relative to the spectrogram maximum
  FeatureConfig config;

  std::size_t n_mels() const { return values.rows; }
  std::size_t n_frames() const { return values.cols; }
};

// Mel filterbank applied to the power spectrogram, converted to dB relative
// to the largest cell and floored at log_floor_db. The maximum cell is 0 dB
// for any non-silent input; silence maps to log_floor_db everywhere.
// Filterbanks are cached per configuration.
MelSpectrogram mel_spectrogram(const Waveform& wave, const FeatureConfig& cfg);

struct FeatureVector {
  std::string id;
  std::vector<double> vector;  // per-band means, then per-band std devs
};

// Per-band temporal mean and population standard deviation.
// Throws ValidationError for fewer than two frames.
FeatureVector pool_features(const MelSpectrogram& mel, const std::string& id = {});

}  // namespace pcgkit
