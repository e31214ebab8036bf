#include "pcgkit/segmentation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pcgkit/error.hpp"
#include "pcgkit/resample.hpp"
#include "pcgkit/time_stretch.hpp"

namespace pcgkit {

std::string to_string(SegmentMethod method) { return method == SegmentMethod::Fixed ? "fixed" : "cycle"; }

SegmentMethod parse_segment_method(const std::string& token) {
  if (token == "fixed") return SegmentMethod::Fixed;
  if (token == "cycle") return SegmentMethod::Cycle;
  throw ValidationError("segment method must be 'fixed' or 'cycle', got '" + token + "'");
}

std::size_t SegmentConfig::chunk_length() const {
  return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

void SegmentConfig::validate() const {
  if (sample_rate <= 0) throw ValidationError("segment sample_rate must be positive");
  if (!(seconds > 0.0) || chunk_length() < 1) {
    throw ValidationError("segment seconds * sample_rate must be at least one sample");
  }
  if (method == SegmentMethod::Cycle && n_cycles < 1) {
    throw ValidationError("segment n_cycles must be at least 1");
  }
}

std::string Chunk::id() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_%c%03zu", method == SegmentMethod::Fixed ? 'f' : 'c', index);
  return recording_id + buf;
}

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

std::vector<Chunk> chunk_fixed(const Waveform& wave, const SegmentConfig& cfg, const ChunkSource& source) {
  cfg.validate();
  if (cfg.method != SegmentMethod::Fixed) throw ValidationError("chunk_fixed requires method 'fixed'");
  if (wave.sample_rate != cfg.sample_rate) {
    throw ValidationError("chunk_fixed: waveform rate " + std::to_string(wave.sample_rate) +
                          " Hz differs from configured " + std::to_string(cfg.sample_rate) + " Hz");
  }
  const std::size_t len = cfg.chunk_length();
  const std::size_t n = wave.size();
  const double sr = cfg.sample_rate;
  std::vector<Chunk> chunks;

  auto emit = [&](std::size_t begin, std::size_t count, bool padded) {
    Chunk c;
    c.recording_id = source.recording_id;
    c.patient_id = source.patient_id;
    c.index = chunks.size();
    c.sample_rate = cfg.sample_rate;
    c.method = SegmentMethod::Fixed;
    c.samples.assign(wave.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                     wave.samples.begin() + static_cast<std::ptrdiff_t>(begin + count));
    if (padded) c.samples.resize(len, median_of(c.samples));
    c.start_s = static_cast<double>(begin) / sr;
    c.end_s = static_cast<double>(begin + count) / sr;
    c.padded = padded;
    chunks.push_back(std::move(c));
  };

  const std::size_t full = n / len;
  for (std::size_t i = 0; i < full; ++i) emit(i * len, len, false);
  const std::size_t remainder = n - full * len;
  // Integer form of remainder > 0.65 * len.
  if (remainder > 0 && remainder * 100 > static_cast<std::size_t>(kRemainderKeepPercent) * len) {
    emit(full * len, remainder, true);
  }
  return chunks;
}

double compute_stretch_factor(const StretchSpec& spec) {
  if (!(spec.target_duration > 0.0 && spec.cycle_duration > 0.0 && spec.target_sr > 0.0 &&
        spec.original_sr > 0.0)) {
    throw ValidationError("stretch spec fields must all be positive");
  }
  return (spec.target_duration / spec.cycle_duration) * (spec.target_sr / spec.original_sr);
}

std::size_t cycle_group_count(std::size_t n_onsets, int n_cycles) {
  if (n_cycles < 1 || n_onsets < 2) return 0;
  return (n_onsets - 1) / static_cast<std::size_t>(n_cycles);
}

double cycle_covered_seconds(std::span<const double> s1_onsets, int n_cycles) {
  const std::size_t groups = cycle_group_count(s1_onsets.size(), n_cycles);
  double total = 0.0;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t first = g * static_cast<std::size_t>(n_cycles);
    total += s1_onsets[first + static_cast<std::size_t>(n_cycles)] - s1_onsets[first];
  }
  return total;
}

std::vector<Chunk> chunk_cycles(const Waveform& wave, std::span<const double> s1_onsets,
                                const SegmentConfig& cfg, const ChunkSource& source) {
  cfg.validate();
  if (cfg.method != SegmentMethod::Cycle) throw ValidationError("chunk_cycles requires method 'cycle'");
  if (wave.sample_rate <= 0) throw ValidationError("chunk_cycles: waveform has no sample rate");
  const double duration = wave.duration();
  for (std::size_t i = 0; i < s1_onsets.size(); ++i) {
    if (!(s1_onsets[i] >= 0.0 && s1_onsets[i] <= duration)) {
      throw ValidationError("chunk_cycles: onset " + std::to_string(s1_onsets[i]) +
                            " s lies outside the recording");
    }
    if (i > 0 && !(s1_onsets[i] > s1_onsets[i - 1])) {
      throw ValidationError("chunk_cycles: onsets must be strictly increasing");
    }
  }

  const std::size_t len = cfg.chunk_length();
  const auto per_group = static_cast<std::size_t>(cfg.n_cycles);
  const std::size_t groups = cycle_group_count(s1_onsets.size(), cfg.n_cycles);
  const double sr = wave.sample_rate;
  std::vector<Chunk> chunks;
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t first = g * per_group;
    for (std::size_t i = first; i < first + per_group; ++i) {
      const double cycle = s1_onsets[i + 1] - s1_onsets[i];
      if (cycle > kLongCycleSeconds) {
        spdlog::warn("{}: cycle of {:.2f} s at {:.2f} s (missing annotation?)", source.recording_id,
                     cycle, s1_onsets[i]);
      }
    }
    const double start = s1_onsets[first];
    const double end = s1_onsets[first + per_group];
    const auto begin = static_cast<std::size_t>(std::llround(start * sr));
    const auto stop = std::min(wave.size(), static_cast<std::size_t>(std::llround(end * sr)));

    Waveform segment{std::vector<double>(wave.samples.begin() + static_cast<std::ptrdiff_t>(begin),
                                         wave.samples.begin() + static_cast<std::ptrdiff_t>(stop)),
                     wave.sample_rate};
    if (segment.sample_rate != cfg.sample_rate) segment = resample(segment, cfg.sample_rate);
    Chunk c;
    c.recording_id = source.recording_id;
    c.patient_id = source.patient_id;
    c.index = g;
    c.sample_rate = cfg.sample_rate;
    c.method = SegmentMethod::Cycle;
    c.samples = stretch_to_length(segment, len).samples;
    c.start_s = start;
    c.end_s = end;
    chunks.push_back(std::move(c));
  }
  return chunks;
}

}  // namespace pcgkit
