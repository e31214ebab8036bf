#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

struct VocoderParams {
  std::size_t fft_size = 1024;
  std::size_t hop = 256;  // 75% overlap
};

// Largest analysis window the modifier uses for an input of `length`
// samples: 1024, or the largest power of two not exceeding length / 2.
// Throws ValidationError for inputs shorter than 2 * kMinVocoderWindow.
inline constexpr std::size_t kMinVocoderWindow = 64;
VocoderParams vocoder_params_for(std::size_t length);

// Phase-vocoder time-scale modification. rate > 1 shortens the signal,
// rate < 1 lengthens it; the output holds round(len / rate) samples.
std::vector<double> time_stretch(std::span<const double> input, double rate,
                                 const VocoderParams& params);

// Pitch-preserving stretch to exactly `target_len` samples. Sample rate is
// unchanged. Any rounding residue (at most one hop) is truncated or
// edge-padded with the final sample.
Waveform stretch_to_length(const Waveform& wave, std::size_t target_len);

}  // namespace pcgkit
