#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

struct SynthConfig {
  int sample_rate = 4000;
  double duration = 30.0;  // seconds
  double heart_rate_bpm = 72.0;
  double jitter_fraction = 0.02;  // per-cycle period jitter (std dev, relative)
  bool murmur = false;
  double murmur_snr_db = 20.0;  // systolic murmur RMS over noise-floor RMS
  double annotation_coverage = 1.0;
  double noise_floor_db = -30.0;  // white-noise RMS relative to unit burst amplitude
  std::uint64_t seed = 0;

  void validate() const;
};

// Burst geometry. An S1 burst starts at the annotated onset and is centered
// half a duration later.
inline constexpr double kS1Duration = 0.10;
inline constexpr double kS2Duration = 0.08;
inline constexpr double kS2Position = 0.35;  // fraction of the cycle
inline constexpr double kMurmurLowHz = 100.0;
inline constexpr double kMurmurHighHz = 400.0;

struct SynthRecording {
  Waveform wave;
  SegmentationTrack track;
  bool murmur = false;
  std::vector<double> s1_centers;   // every generated S1 burst
  std::vector<bool> annotated;      // per cycle
  std::vector<double> cycle_onsets;  // every generated cycle, annotated or not
};

// Gaussian-enveloped tone bursts for S1 (30-45 Hz) and S2 (50-70 Hz),
// white noise floor, and for murmur recordings band-limited (100-400 Hz)
// noise across systole. The track annotates the cycles selected by the
// coverage model (contiguous runs, a prefix of each block of ten cycles)
// and marks the rest state 0.
SynthRecording generate_recording(const SynthConfig& cfg);

// Indices of annotated cycles: a prefix of each ten-cycle block, with
// cumulative rounding so that exactly round(coverage * n_cycles) are set.
std::vector<bool> coverage_mask(std::size_t n_cycles, double coverage);

struct DatasetSpec {
  int n_patients = 40;
  int recordings_per_patient = 2;
  double positive_fraction = 0.2;
  SynthConfig recording;  // template; seed/murmur/heart rate are per recording
  std::uint64_t seed = 0;
  double heart_rate_spread = 0.15;  // per-recording bpm factor in 1 +- spread
};

// Writes <dir>/manifest.csv, <dir>/wav/*.wav (float32) and <dir>/seg/*.tsv.
// round(n_patients * positive_fraction) patients are positive; all of a
// patient's recordings share its label. Returns the manifest rows.
std::vector<RecordingMeta> generate_dataset(const DatasetSpec& spec,
                                            const std::filesystem::path& dir);

}  // namespace pcgkit
