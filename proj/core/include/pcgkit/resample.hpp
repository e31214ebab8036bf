#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

// Band-limited resampling by Kaiser-windowed sinc interpolation.
//
// The output has round(len * target_sr / sample_rate) samples. When
// downsampling, the interpolation kernel is widened so that its cutoff sits
// at the new Nyquist frequency. Equal rates return the input unchanged.
Waveform resample(const Waveform& wave, int target_sr);

// Resamples `input` to exactly `out_len` samples, treating the whole span
// as covering the same duration. Used where the rate ratio is not a ratio
// of integer sample rates (pitch shifting).
std::vector<double> resample_to_length(std::span<const double> input, std::size_t out_len);

}  // namespace pcgkit
