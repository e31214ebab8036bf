#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

enum class SegmentMethod { Fixed, Cycle };

std::string to_string(SegmentMethod method);
SegmentMethod parse_segment_method(const std::string& token);

struct SegmentConfig {
  SegmentMethod method = SegmentMethod::Fixed;
  double seconds = 8.0;
  int sample_rate = 4000;
  int n_cycles = 10;  // Cycle mode only

  // round(seconds * sample_rate)
  std::size_t chunk_length() const;
  void validate() const;
};

struct StretchSpec {
  double target_duration = 0.0;  // seconds
  double cycle_duration = 0.0;   // seconds spanned by the N cycles
  double target_sr = 0.0;
  double original_sr = 0.0;
};

// Identifies where chunks came from; copied into every emitted chunk.
struct ChunkSource {
  std::string recording_id;
  std::string patient_id;
};

struct Chunk {
  std::string recording_id;
  std::string patient_id;
  std::size_t index = 0;
  std::vector<double> samples;
  int sample_rate = 0;
  SegmentMethod method = SegmentMethod::Fixed;
  double start_s = 0.0;  // span in the source recording
  double end_s = 0.0;
  bool padded = false;

  // "<recording_id>_<f|c><index, 3 digits>"
  std::string id() const;
  Waveform waveform() const { return Waveform{samples, sample_rate}; }
};

// Remainder blocks are kept only if strictly longer than this share of a
// full chunk.
inline constexpr int kRemainderKeepPercent = 65;

// Consecutive non-overlapping blocks of chunk_length() samples. A trailing
// remainder longer than 65% of a block is padded at the tail with its own
// median; shorter remainders are dropped.
// Throws ValidationError unless cfg.method is Fixed and rates match.
std::vector<Chunk> chunk_fixed(const Waveform& wave, const SegmentConfig& cfg,
                               const ChunkSource& source = {});

// (target_duration / cycle_duration) * (target_sr / original_sr)
double compute_stretch_factor(const StretchSpec& spec);

// Groups of n_cycles consecutive S1-to-S1 cycles, without overlap, each
// stretched (and resampled, if the recording rate differs from
// cfg.sample_rate) to exactly chunk_length() samples. Trailing partial
// groups are discarded. Gap plausibility is deliberately not checked; a
// warning is logged for cycles longer than kLongCycleSeconds.
// Throws ValidationError if onsets are not strictly increasing or lie
// outside the recording.
std::vector<Chunk> chunk_cycles(const Waveform& wave, std::span<const double> s1_onsets,
                                const SegmentConfig& cfg, const ChunkSource& source = {});

inline constexpr double kLongCycleSeconds = 2.0;

// floor((|onsets| - 1) / n_cycles), the number of complete groups.
std::size_t cycle_group_count(std::size_t n_onsets, int n_cycles);

// Seconds of audio covered by complete cycle groups.
double cycle_covered_seconds(std::span<const double> s1_onsets, int n_cycles);

}  // namespace pcgkit
