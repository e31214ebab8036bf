#include "pcgkit/augmentation.hpp"

#include <algorithm>
#include <cmath>

#include "pcgkit/error.hpp"
#include "pcgkit/resample.hpp"
#include "pcgkit/time_stretch.hpp"

namespace pcgkit {

void AugmentConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(probability_each)) throw ValidationError("augment probability_each must be in [0, 1]");
  if (!unit(max_mute_fraction)) throw ValidationError("augment max_mute_fraction must be in [0, 1]");
  if (!unit(max_mask_area_fraction)) throw ValidationError("augment max_mask_area_fraction must be in [0, 1]");
  if (!(max_semitones >= 0.0)) throw ValidationError("augment max_semitones must be non-negative");
}

namespace {

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  return 0.5 * (upper + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)));
}

}  // namespace

Chunk mute_random(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng) {
  if (chunk.samples.empty()) throw ValidationError("mute_random: empty chunk");
  Chunk out = chunk;
  const std::size_t n = chunk.samples.size();
  const auto max_len = static_cast<std::size_t>(std::floor(cfg.max_mute_fraction * static_cast<double>(n)));
  if (max_len == 0) return out;
  const auto len = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(max_len)));
  const auto start = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n - len)));
  const double fill = median(chunk.samples);
  std::fill_n(out.samples.begin() + static_cast<std::ptrdiff_t>(start), len, fill);
  return out;
}

Chunk pitch_shift(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng,
                  std::optional<double> forced_semitones) {
  const std::size_t n = chunk.samples.size();
  if (n < kMinPitchShiftSamples) {
    throw ValidationError("pitch_shift: chunk of " + std::to_string(n) + " samples is shorter than " +
                          std::to_string(kMinPitchShiftSamples));
  }
  const double semitones =
      forced_semitones ? *forced_semitones : rng.uniform(-cfg.max_semitones, cfg.max_semitones);
  Chunk out = chunk;
  if (semitones == 0.0) return out;
  const double ratio = std::exp2(semitones / 12.0);
  // Lengthen by `ratio` keeping pitch, then squeeze back to n samples,
  // which scales every frequency by `ratio`.
  const auto stretched_len = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio));
  const Waveform stretched = stretch_to_length(Waveform{chunk.samples, chunk.sample_rate}, stretched_len);
  out.samples = resample_to_length(stretched.samples, n);
  return out;
}

MelSpectrogram spec_mask(const MelSpectrogram& mel, const AugmentConfig& cfg, Rng& rng) {
  if (mel.values.empty()) throw ValidationError("spec_mask: empty spectrogram");
  MelSpectrogram out = mel;
  const std::size_t bands = mel.n_mels(), frames = mel.n_frames();
  const auto area = static_cast<double>(bands * frames);
  const auto budget = static_cast<std::size_t>(std::floor(cfg.max_mask_area_fraction * area));
  if (budget == 0) return out;

  // Time mask of t frames covers t * bands cells; the frequency mask of f
  // bands then adds f * (frames - t) new cells.
  const std::size_t max_t = std::min(frames, budget / bands);
  const auto t_width = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(max_t)));
  const std::size_t remaining = budget - t_width * bands;
  const std::size_t free_frames = frames - t_width;
  const std::size_t max_f = free_frames == 0 ? bands : std::min(bands, remaining / free_frames);
  const auto f_width = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(max_f)));
  const auto t_start = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(frames - t_width)));
  const auto f_start = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(bands - f_width)));

  const double fill = *std::min_element(mel.values.data.begin(), mel.values.data.end());
  for (std::size_t m = 0; m < bands; ++m) {
    for (std::size_t t = 0; t < frames; ++t) {
      const bool in_time = t >= t_start && t < t_start + t_width;
      const bool in_freq = m >= f_start && m < f_start + f_width;
      if (in_time || in_freq) out.values(m, t) = fill;
    }
  }
  return out;
}

Chunk augment_chunk(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const bool do_mute = rng.bernoulli(cfg.probability_each);
  const bool do_pitch = rng.bernoulli(cfg.probability_each);
  Chunk out = chunk;
  if (do_mute) out = mute_random(out, cfg, rng);
  if (do_pitch) out = pitch_shift(out, cfg, rng);
  return out;
}

MelSpectrogram maybe_spec_mask(const MelSpectrogram& mel, const AugmentConfig& cfg, Rng& rng) {
  if (!rng.bernoulli(cfg.probability_each)) return mel;
  return spec_mask(mel, cfg, rng);
}

Rng chunk_rng(std::uint64_t seed, const std::string& chunk_id) { return Rng(derive_seed(seed, chunk_id)); }

}  // namespace pcgkit
