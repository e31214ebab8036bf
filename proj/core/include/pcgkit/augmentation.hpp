#pragma once

#include <cstdint>
#include <optional>

#include "pcgkit/features.hpp"
#include "pcgkit/rng.hpp"
#include "pcgkit/segmentation.hpp"

namespace pcgkit {

struct AugmentConfig {
  double probability_each = 0.6;
  double max_mute_fraction = 0.25;
  double max_semitones = 1.0;
  double max_mask_area_fraction = 0.25;
  std::uint64_t seed = 0;

  void validate() const;
};

// Minimum chunk length accepted by pitch_shift.
inline constexpr std::size_t kMinPitchShiftSamples = 2048;

// Replaces one contiguous run of 1..floor(max_mute_fraction * L) samples,
// at a uniform start position, with the chunk median.
Chunk mute_random(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng);

// Shifts pitch by s ~ U[-max_semitones, max_semitones] semitones (or the
// forced value): stretch to L * 2^(s/12) samples, then resample back to L.
// Throws ValidationError for chunks shorter than kMinPitchShiftSamples.
Chunk pitch_shift(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng,
                  std::optional<double> forced_semitones = std::nullopt);

// One time mask (all bands, contiguous frames) and one frequency mask (all
// frames, contiguous bands), sized so the union covers at most
// floor(max_mask_area_fraction * area) cells. Masked cells take the
// spectrogram minimum.
MelSpectrogram spec_mask(const MelSpectrogram& mel, const AugmentConfig& cfg, Rng& rng);

// With probability_each for each method independently: mute, then pitch
// shift. Both gates are always drawn so the stream layout is fixed.
Chunk augment_chunk(const Chunk& chunk, const AugmentConfig& cfg, Rng& rng);

// spec_mask gated by probability_each.
MelSpectrogram maybe_spec_mask(const MelSpectrogram& mel, const AugmentConfig& cfg, Rng& rng);

// Generator for one chunk, independent of processing order.
Rng chunk_rng(std::uint64_t seed, const std::string& chunk_id);

}  // namespace pcgkit
