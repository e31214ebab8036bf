#include "pcgkit/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pcgkit/error.hpp"

namespace pcgkit {

using cplx = std::complex<double>;

std::complex<double> FilterCoefficients::response(double frequency_hz, double sample_rate) const {
  const double w = 2.0 * std::numbers::pi * frequency_hz / sample_rate;
  const cplx zi = std::polar(1.0, -w);  // z^-1
  const cplx zi2 = zi * zi;
  cplx h(1.0, 0.0);
  for (const auto& s : sections) {
    h *= (s.b0 + s.b1 * zi + s.b2 * zi2) / (1.0 + s.a1 * zi + s.a2 * zi2);
  }
  return h;
}

double FilterCoefficients::magnitude_db(double frequency_hz, double sample_rate) const {
  return 20.0 * std::log10(std::abs(response(frequency_hz, sample_rate)));
}

double FilterCoefficients::max_pole_radius() const {
  double radius = 0.0;
  for (const auto& s : sections) {
    // Roots of z^2 + a1 z + a2.
    const cplx disc = std::sqrt(cplx(s.a1 * s.a1 - 4.0 * s.a2, 0.0));
    radius = std::max({radius, std::abs((-s.a1 + disc) / 2.0), std::abs((-s.a1 - disc) / 2.0)});
  }
  return radius;
}

FilterCoefficients design_bandpass(const BandpassSpec& spec) {
  const double fs = spec.sample_rate;
  if (spec.order < 1) throw ValidationError("bandpass order must be positive");
  if (!(fs > 0.0)) throw ValidationError("bandpass sample rate must be positive");
  if (!(spec.low_cut > 0.0)) throw ValidationError("bandpass low_cut must be positive");
  if (!(spec.low_cut < spec.high_cut)) throw ValidationError("bandpass low_cut must be below high_cut");
  if (!(spec.high_cut < fs / 2.0)) {
    throw ValidationError("bandpass high_cut " + std::to_string(spec.high_cut) +
                          " Hz is not below the Nyquist frequency " + std::to_string(fs / 2.0) + " Hz");
  }

  const int n = spec.order;
  const double fs2 = 2.0 * fs;
  const double w_lo = fs2 * std::tan(std::numbers::pi * spec.low_cut / fs);
  const double w_hi = fs2 * std::tan(std::numbers::pi * spec.high_cut / fs);
  const double bw = w_hi - w_lo;
  const double w0_sq = w_lo * w_hi;

  // Analog bandpass poles from the unit-cutoff lowpass prototype, mapped
  // through the bilinear transform.
  std::vector<cplx> poles;
  cplx denom(1.0, 0.0);
  for (int k = 1; k <= n; ++k) {
    const cplx p = std::polar(1.0, std::numbers::pi * (2.0 * k + n - 1) / (2.0 * n));
    const cplx half = p * bw / 2.0;
    const cplx root = std::sqrt(half * half - w0_sq);
    for (const cplx s : {half + root, half - root}) {
      denom *= fs2 - s;
      poles.push_back((fs2 + s) / (fs2 - s));
    }
  }
  // Analog gain bw^n; the n zeros at s=0 contribute fs2^n.
  const double gain = (std::pow(bw, n) * std::pow(fs2, n) / denom).real();

  std::vector<cplx> upper;
  std::vector<double> real;
  for (const cplx z : poles) {
    if (std::abs(z.imag()) <= 1e-12 * std::abs(z)) {
      real.push_back(z.real());
    } else if (z.imag() > 0.0) {
      upper.push_back(z);
    }
  }
  if (real.size() % 2 != 0 || upper.size() * 2 + real.size() != poles.size()) {
    throw Error("design_bandpass: could not pair poles into second-order sections");
  }
  std::sort(real.begin(), real.end());

  FilterCoefficients out;
  const double g = std::pow(std::abs(gain), 1.0 / n);
  for (const cplx z : upper) {
    out.sections.push_back(Biquad{g, 0.0, -g, -2.0 * z.real(), std::norm(z)});
  }
  for (std::size_t i = 0; i + 1 < real.size(); i += 2) {
    out.sections.push_back(Biquad{g, 0.0, -g, -(real[i] + real[i + 1]), real[i] * real[i + 1]});
  }
  if (gain < 0.0) {
    auto& s = out.sections.front();
    s.b0 = -s.b0;
    s.b1 = -s.b1;
    s.b2 = -s.b2;
  }
  return out;
}

namespace {

struct SectionState {
  double z1 = 0.0;
  double z2 = 0.0;
};

// Steady-state DF2T state of each section for a unit step at the cascade input.
std::vector<SectionState> step_initial_state(const FilterCoefficients& coeffs) {
  std::vector<SectionState> zi;
  double scale = 1.0;
  for (const auto& s : coeffs.sections) {
    const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    SectionState st;
    st.z2 = (s.b2 - s.a2 * dc) * scale;
    st.z1 = (s.b1 - s.a1 * dc) * scale + st.z2;
    zi.push_back(st);
    scale *= dc;
  }
  return zi;
}

void run_cascade(const FilterCoefficients& coeffs, std::vector<SectionState> state, std::vector<double>& x) {
  for (std::size_t k = 0; k < coeffs.sections.size(); ++k) {
    const auto& s = coeffs.sections[k];
    double z1 = state[k].z1, z2 = state[k].z2;
    for (double& v : x) {
      const double in = v;
      const double y = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * y + z2;
      z2 = s.b2 * in - s.a2 * y;
      v = y;
    }
  }
}

}  // namespace

std::vector<double> filter_forward(const FilterCoefficients& coeffs, std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  run_cascade(coeffs, std::vector<SectionState>(coeffs.sections.size()), y);
  return y;
}

Waveform filter_zero_phase(const FilterCoefficients& coeffs, const Waveform& wave) {
  const std::size_t pad = 3 * (2 * coeffs.sections.size());
  const std::size_t n = wave.size();
  if (n <= pad) {
    throw ValidationError("filter_zero_phase: signal of " + std::to_string(n) +
                          " samples is too short; need more than " + std::to_string(pad));
  }
  const auto& x = wave.samples;

  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto zi = step_initial_state(coeffs);
  auto scaled = [&](double v) {
    auto st = zi;
    for (auto& s : st) {
      s.z1 *= v;
      s.z2 *= v;
    }
    return st;
  };

  run_cascade(coeffs, scaled(ext.front()), ext);
  std::reverse(ext.begin(), ext.end());
  run_cascade(coeffs, scaled(ext.front()), ext);
  std::reverse(ext.begin(), ext.end());

  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                     ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
  return out;
}

Waveform minmax_normalize(const Waveform& wave) {
  Waveform out = wave;
  if (wave.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(wave.samples.begin(), wave.samples.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(out.samples.begin(), out.samples.end(), 0.5);
    return out;
  }
  const double range = hi - lo;
  for (double& v : out.samples) v = (v - lo) / range;
  return out;
}

}  // namespace pcgkit
