#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <thread>

#include "oracles.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/features.hpp"
#include "pcgkit/rng.hpp"

namespace pcgkit {
namespace {

// Reference triangular filterbank built from closed-form Slaney mel
// conversions, one weight at a time.
double ref_hz_to_mel(double hz) {
  return hz < 1000.0 ? hz * 3.0 / 200.0 : 15.0 + std::log(hz / 1000.0) * 27.0 / std::log(6.4);
}
double ref_mel_to_hz(double mel) {
  return mel < 15.0 ? mel * 200.0 / 3.0 : 1000.0 * std::exp((mel - 15.0) * std::log(6.4) / 27.0);
}
double ref_weight(int band, int bin, int n_mels, int fft, double sr, double fmin, double fmax) {
  const double lo = ref_hz_to_mel(fmin), hi = ref_hz_to_mel(fmax);
  auto edge = [&](int i) { return ref_mel_to_hz(lo + (hi - lo) * i / (n_mels + 1)); };
  const double left = edge(band), center = edge(band + 1), right = edge(band + 2);
  const double f = bin * sr / fft;
  const double rise = (f - left) / (center - left);
  const double fall = (right - f) / (right - center);
  return std::max(0.0, std::min(rise, fall)) * 2.0 / (right - left);
}

TEST(StftTest, FrameCountExample) {
  const auto m = stft_magnitude(Waveform{std::vector<double>(2048, 0.1), 4000}, 512, 352);
  EXPECT_EQ(m.cols, 5u);
  EXPECT_EQ(m.rows, 257u);
  EXPECT_EQ(frame_count(2048, 512, 352), 5u);
}

TEST(StftTest, FrameCountFormulaHolds) {
  Rng rng(201);
  for (int trial = 0; trial < 100; ++trial) {
    const int fft = 1 << rng.integer(4, 10);
    const int hop = static_cast<int>(rng.integer(1, fft));
    const auto len = static_cast<std::size_t>(rng.integer(fft, 6000));
    const auto m = stft_magnitude(Waveform{std::vector<double>(len, 0.0), 4000}, fft, hop);
    ASSERT_EQ(m.cols, (len - static_cast<std::size_t>(fft)) / static_cast<std::size_t>(hop) + 1);
  }
  EXPECT_EQ(frame_count(100, 512, 352), 0u);
}

TEST(StftTest, SilenceIsZero) {
  const auto m = stft_magnitude(Waveform{std::vector<double>(4000, 0.0), 4000}, 512, 128);
  for (double v : m.data) EXPECT_EQ(v, 0.0);
}

TEST(StftTest, ToneLandsInExpectedBin) {
  const auto m = stft_magnitude(Waveform{oracle::sine(250.0, 4000, 4000), 4000}, 512, 256);
  for (std::size_t c = 0; c < m.cols; ++c) {
    std::size_t best = 0;
    for (std::size_t r = 0; r < m.rows; ++r)
      if (m(r, c) > m(best, c)) best = r;
    EXPECT_EQ(best, 32u);
  }
}

TEST(StftTest, MatchesNaiveDft) {
  Rng rng(203);
  std::vector<double> x(300);
  for (double& v : x) v = rng.normal();
  const auto m = stft_magnitude(Waveform{x, 4000}, 64, 100);
  ASSERT_EQ(m.cols, 3u);
  for (std::size_t c = 0; c < m.cols; ++c) {
    std::vector<double> frame(64);
    for (std::size_t i = 0; i < 64; ++i) {
      frame[i] = x[c * 100 + i] * (0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / 64.0));
    }
    for (std::size_t k = 0; k <= 32; ++k) EXPECT_NEAR(m(k, c), oracle::dft_bin_magnitude(frame, k), 1e-9);
  }
}

TEST(StftTest, RejectsShortInput) {
  EXPECT_THROW(stft_magnitude(Waveform{std::vector<double>(100, 0.0), 4000}, 512, 352), ValidationError);
}

TEST(MelScaleTest, AnchorPointsAndInverse) {
  EXPECT_DOUBLE_EQ(hz_to_mel(0.0), 0.0);
  EXPECT_NEAR(hz_to_mel(1000.0), 15.0, 1e-12);
  for (double hz : {10.0, 500.0, 999.0, 1000.0, 1500.0, 8000.0}) {
    EXPECT_NEAR(hz_to_mel(hz), ref_hz_to_mel(hz), 1e-9);
    EXPECT_NEAR(mel_to_hz(hz_to_mel(hz)), hz, 1e-9);
  }
}

TEST(MelFilterbankTest, MatchesReferenceConstruction) {
  for (const auto& cfg : {cycle_mode_features(4000), fixed_mode_features(4000), cycle_mode_features(16000)}) {
    const auto fb = mel_filterbank(cfg);
    ASSERT_EQ(fb.rows, static_cast<std::size_t>(cfg.n_mels));
    ASSERT_EQ(fb.cols, static_cast<std::size_t>(cfg.fft_size / 2 + 1));
    for (std::size_t r = 0; r < fb.rows; ++r) {
      for (std::size_t c = 0; c < fb.cols; ++c) {
        const double ref = ref_weight(static_cast<int>(r), static_cast<int>(c), cfg.n_mels, cfg.fft_size,
                                      cfg.sample_rate, cfg.fmin, cfg.effective_fmax());
        ASSERT_NEAR(fb(r, c), ref, 1e-9 * std::max(1.0, std::abs(ref))) << r << "," << c;
      }
    }
  }
}

TEST(MelFilterbankTest, NonnegativeWithMonotoneCenters) {
  const auto cfg = cycle_mode_features(4000);
  const auto fb = mel_filterbank(cfg);
  for (double v : fb.data) EXPECT_GE(v, 0.0);
  EXPECT_EQ(count_empty_filters(fb), 0u);
  const auto centers = mel_center_frequencies(cfg);
  ASSERT_EQ(centers.size(), 128u);
  for (std::size_t i = 1; i < centers.size(); ++i) EXPECT_GT(centers[i], centers[i - 1]);
  // Each filter has finite, contiguous support.
  for (std::size_t r = 0; r < fb.rows; ++r) {
    std::size_t first = fb.cols, last = 0;
    for (std::size_t c = 0; c < fb.cols; ++c) {
      if (fb(r, c) > 0.0) {
        first = std::min(first, c);
        last = c;
      }
    }
    for (std::size_t c = first; c <= last && first < fb.cols; ++c) EXPECT_GT(fb(r, c), 0.0);
  }
}

TEST(MelFilterbankTest, EmptyRowsCountedNotRejected) {
  // With 352 bands over 257 bins, triangles stay wider than the bin spacing
  // at 4 kHz, so rows only go empty at higher rates.
  for (int sr : {4000, 8000, 16000}) {
    const auto cfg = fixed_mode_features(sr);
    const auto fb = mel_filterbank(cfg);
    std::size_t empty = 0;
    for (int r = 0; r < cfg.n_mels; ++r) {
      double sum = 0.0;
      for (int c = 0; c <= cfg.fft_size / 2; ++c) sum += ref_weight(r, c, cfg.n_mels, cfg.fft_size, sr, 0.0, sr / 2.0);
      empty += sum == 0.0 ? 1 : 0;
    }
    EXPECT_EQ(count_empty_filters(fb), empty) << sr;
    if (sr == 4000) EXPECT_EQ(empty, 0u);
    if (sr >= 8000) EXPECT_GT(empty, 0u) << sr;
  }
}

TEST(MelSpectrogramTest, SilenceIsFloor) {
  const auto cfg = cycle_mode_features(4000);
  const auto mel = mel_spectrogram(Waveform{std::vector<double>(8000, 0.0), 4000}, cfg);
  for (double v : mel.values.data) EXPECT_EQ(v, cfg.log_floor_db);
}

TEST(MelSpectrogramTest, MaxIsZeroAndGainInvariant) {
  Rng rng(207);
  for (const auto& cfg : {cycle_mode_features(4000), fixed_mode_features(4000)}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> x(8000);
      for (double& v : x) v = rng.normal();
      const auto a = mel_spectrogram(Waveform{x, 4000}, cfg);
      EXPECT_EQ(*std::max_element(a.values.data.begin(), a.values.data.end()), 0.0);
      for (double v : a.values.data) EXPECT_GE(v, cfg.log_floor_db);
      EXPECT_EQ(a.n_frames(), frame_count(8000, static_cast<std::size_t>(cfg.fft_size), static_cast<std::size_t>(cfg.hop_length)));
      for (double gain : {10.0, 0.003}) {
        std::vector<double> y = x;
        for (double& v : y) v *= gain;
        const auto b = mel_spectrogram(Waveform{y, 4000}, cfg);
        for (std::size_t i = 0; i < a.values.data.size(); ++i) ASSERT_NEAR(a.values.data[i], b.values.data[i], 1e-9);
      }
    }
  }
}

TEST(MelSpectrogramTest, RejectsRateMismatch) {
  EXPECT_THROW(mel_spectrogram(Waveform{std::vector<double>(8000, 0.0), 8000}, cycle_mode_features(4000)), ValidationError);
}

TEST(MelSpectrogramTest, ConcurrentCallsAgree) {
  std::vector<double> x = oracle::sine(123.0, 4000, 8000);
  const auto cfg = cycle_mode_features(4000);
  const auto ref = mel_spectrogram(Waveform{x, 4000}, cfg);
  std::vector<std::thread> threads;
  std::vector<int> ok(4, 0);
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      auto c = cfg;
      c.n_mels = 64 + t;  // distinct cache entries
      mel_spectrogram(Waveform{x, 4000}, c);
      ok[static_cast<std::size_t>(t)] = mel_spectrogram(Waveform{x, 4000}, cfg).values.data == ref.values.data;
    });
  }
  for (auto& th : threads) th.join();
  for (int v : ok) EXPECT_EQ(v, 1);
}

TEST(FeatureConfigTest, ValidationAndPresets) {
  const auto fixed = fixed_mode_features(4000);
  EXPECT_EQ(fixed.n_mels, 352);
  EXPECT_EQ(fixed.fft_size, 512);
  EXPECT_EQ(fixed.hop_length, 352);
  const auto cycle = cycle_mode_features(4000);
  EXPECT_EQ(cycle.n_mels, 128);
  EXPECT_EQ(cycle.fft_size, 1152);
  EXPECT_EQ(cycle.hop_length, 288);
  auto bad = cycle;
  bad.hop_length = 2000;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cycle;
  bad.fmax = 3000.0;
  EXPECT_THROW(bad.validate(), ValidationError);
  bad = cycle;
  bad.fmin = 2000.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(PoolFeaturesTest, ConstantSpectrogram) {
  MelSpectrogram mel{Matrix(6, 4, -12.5), cycle_mode_features(4000)};
  const auto fv = pool_features(mel, "x");
  ASSERT_EQ(fv.vector.size(), 12u);
  EXPECT_EQ(fv.id, "x");
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(fv.vector[i], -12.5);
    EXPECT_EQ(fv.vector[6 + i], 0.0);
  }
}

TEST(PoolFeaturesTest, MeanStdAndBandPermutation) {
  Rng rng(211);
  MelSpectrogram mel{Matrix(5, 7), cycle_mode_features(4000)};
  for (double& v : mel.values.data) v = rng.uniform(-80.0, 0.0);
  const auto fv = pool_features(mel);
  ASSERT_EQ(fv.vector.size(), 10u);
  for (std::size_t r = 0; r < 5; ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < 7; ++c) mean += mel.values(r, c) / 7.0;
    double var = 0.0;
    for (std::size_t c = 0; c < 7; ++c) var += (mel.values(r, c) - mean) * (mel.values(r, c) - mean) / 7.0;
    EXPECT_NEAR(fv.vector[r], mean, 1e-12);
    EXPECT_NEAR(fv.vector[5 + r], std::sqrt(var), 1e-12);
  }
  // Reversing band order reverses both halves of the vector.
  MelSpectrogram flipped = mel;
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 0; c < 7; ++c) flipped.values(r, c) = mel.values(4 - r, c);
  const auto fv2 = pool_features(flipped);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_EQ(fv2.vector[r], fv.vector[4 - r]);
    EXPECT_EQ(fv2.vector[5 + r], fv.vector[5 + 4 - r]);
  }
}

TEST(PoolFeaturesTest, RejectsSingleFrame) {
  EXPECT_THROW(pool_features(MelSpectrogram{Matrix(4, 1, 0.0), {}}), ValidationError);
}

}  // namespace
}  // namespace pcgkit
