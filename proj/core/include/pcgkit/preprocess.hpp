#pragma once

#include <complex>
#include <span>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

struct BandpassSpec {
  double low_cut = 25.0;    // Hz
  double high_cut = 500.0;  // Hz
  int order = 5;            // bandpass design order; the filter has 2*order poles
  double sample_rate = 4000.0;
};

// One second-order section, a0 normalized to 1:
//   H(z) = (b0 + b1 z^-1 + b2 z^-2) / (1 + a1 z^-1 + a2 z^-2)
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

struct FilterCoefficients {
  std::vector<Biquad> sections;

  std::complex<double> response(double frequency_hz, double sample_rate) const;
  double magnitude_db(double frequency_hz, double sample_rate) const;
  // Largest pole radius over all sections.
  double max_pole_radius() const;
};

// Digital Butterworth bandpass via the analog lowpass prototype, the
// lowpass-to-bandpass transform and the bilinear transform with
// pre-warped band edges. Returns `order` sections, each with one zero at
// z=1 and one at z=-1.
// Throws ValidationError unless 0 < low_cut < high_cut < sample_rate/2 and
// order >= 1.
FilterCoefficients design_bandpass(const BandpassSpec& spec);

// Single forward pass (direct form II transposed), zero initial state.
std::vector<double> filter_forward(const FilterCoefficients& coeffs, std::span<const double> x);

// Forward-backward filtering with odd-reflection edge padding of
// 3 * (2 * sections) samples and steady-state initial conditions.
// Output length equals input length; net phase is zero.
// Throws ValidationError when the input is not longer than the padding.
Waveform filter_zero_phase(const FilterCoefficients& coeffs, const Waveform& wave);

// (x - min) / (max - min). A constant signal maps to 0.5 everywhere.
Waveform minmax_normalize(const Waveform& wave);

}  // namespace pcgkit
