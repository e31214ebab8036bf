#include "pcgkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "pcgkit/dataset_io.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/preprocess.hpp"
#include "pcgkit/rng.hpp"
#include "pcgkit/wav.hpp"

namespace pcgkit {

namespace fs = std::filesystem;

void SynthConfig::validate() const {
  if (sample_rate < 2 * static_cast<int>(kMurmurHighHz) + 1) {
    throw ValidationError("synth sample_rate must exceed twice the murmur band edge");
  }
  if (!(duration > 0.0)) throw ValidationError("synth duration must be positive");
  if (!(heart_rate_bpm >= 30.0 && heart_rate_bpm <= 220.0)) {
    throw ValidationError("synth heart_rate_bpm must be in [30, 220]");
  }
  if (!(jitter_fraction >= 0.0 && jitter_fraction < 0.5)) {
    throw ValidationError("synth jitter_fraction must be in [0, 0.5)");
  }
  if (!(annotation_coverage >= 0.0 && annotation_coverage <= 1.0)) {
    throw ValidationError("synth annotation_coverage must be in [0, 1]");
  }
}

std::vector<bool> coverage_mask(std::size_t n_cycles, double coverage) {
  constexpr std::size_t kBlock = 10;
  std::vector<bool> mask(n_cycles, false);
  for (std::size_t start = 0; start < n_cycles; start += kBlock) {
    const std::size_t end = std::min(start + kBlock, n_cycles);
    const auto quota = static_cast<std::size_t>(std::llround(coverage * static_cast<double>(end)) -
                                                std::llround(coverage * static_cast<double>(start)));
    for (std::size_t i = start; i < start + quota && i < end; ++i) mask[i] = true;
  }
  return mask;
}

namespace {

void add_burst(std::vector<double>& y, double sr, double center, double sigma, double freq, double amp,
               double phase) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
  const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(std::floor((center - 4 * sigma) * sr)));
  const auto hi = std::min<std::ptrdiff_t>(n - 1, static_cast<std::ptrdiff_t>(std::ceil((center + 4 * sigma) * sr)));
  for (std::ptrdiff_t i = lo; i <= hi; ++i) {
    const double t = static_cast<double>(i) / sr - center;
    const double env = std::exp(-0.5 * (t / sigma) * (t / sigma));
    y[static_cast<std::size_t>(i)] += amp * env * std::sin(2.0 * std::numbers::pi * freq * t + phase);
  }
}

void push_interval(SegmentationTrack& track, double onset, double offset, HeartState state, double limit) {
  offset = std::min(offset, limit);
  if (!(onset < offset)) return;
  auto& iv = track.intervals;
  if (state == HeartState::Unannotated && !iv.empty() && iv.back().state == 0 && iv.back().offset == onset) {
    iv.back().offset = offset;
    return;
  }
  iv.push_back(StateInterval{onset, offset, static_cast<int>(state)});
}

}  // namespace

SynthRecording generate_recording(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const double sr = cfg.sample_rate;
  const auto n = static_cast<std::size_t>(std::llround(cfg.duration * sr));
  const double period = 60.0 / cfg.heart_rate_bpm;

  SynthRecording rec;
  rec.murmur = cfg.murmur;
  for (double t = 0.0; t + kS1Duration <= cfg.duration;) {
    rec.cycle_onsets.push_back(t);
    const double jitter = std::clamp(cfg.jitter_fraction * rng.normal(), -0.5, 0.5);
    t += period * (1.0 + jitter);
  }
  const std::size_t n_cycles = rec.cycle_onsets.size();
  auto cycle_end = [&](std::size_t i) {
    return i + 1 < n_cycles ? rec.cycle_onsets[i + 1] : rec.cycle_onsets[i] + period;
  };
  auto s2_onset = [&](std::size_t i) {
    return rec.cycle_onsets[i] + kS2Position * (cycle_end(i) - rec.cycle_onsets[i]);
  };

  std::vector<double> y(n, 0.0);
  const double noise_rms = std::pow(10.0, cfg.noise_floor_db / 20.0);
  for (double& v : y) v = noise_rms * rng.normal();

  for (std::size_t i = 0; i < n_cycles; ++i) {
    const double s1_center = rec.cycle_onsets[i] + kS1Duration / 2.0;
    rec.s1_centers.push_back(s1_center);
    add_burst(y, sr, s1_center, kS1Duration / 6.0, rng.uniform(30.0, 45.0), rng.uniform(0.85, 1.0),
              rng.uniform(0.0, 2.0 * std::numbers::pi));
    add_burst(y, sr, s2_onset(i) + kS2Duration / 2.0, kS2Duration / 6.0, rng.uniform(50.0, 70.0),
              rng.uniform(0.55, 0.75), rng.uniform(0.0, 2.0 * std::numbers::pi));
  }

  if (cfg.murmur && n > 0) {
    std::vector<double> white(n);
    for (double& v : white) v = rng.normal();
    const auto band = design_bandpass({kMurmurLowHz, kMurmurHighHz, 4, sr});
    std::vector<double> noise = filter_forward(band, white);
    double energy = 0.0;
    for (double v : noise) energy += v * v;
    const double scale = noise_rms * std::pow(10.0, cfg.murmur_snr_db / 20.0) /
                         std::sqrt(energy / static_cast<double>(n));
    const double ramp = 0.01;
    for (std::size_t i = 0; i < n_cycles; ++i) {
      const double start = rec.cycle_onsets[i] + kS1Duration;
      const double stop = s2_onset(i);
      if (!(stop > start)) continue;
      const auto lo = static_cast<std::size_t>(std::ceil(start * sr));
      const auto hi = std::min(n, static_cast<std::size_t>(std::floor(stop * sr)));
      for (std::size_t s = lo; s < hi; ++s) {
        const double t = static_cast<double>(s) / sr;
        const double edge = std::min({1.0, (t - start) / ramp, (stop - t) / ramp});
        const double taper = 0.5 - 0.5 * std::cos(std::numbers::pi * std::max(0.0, edge));
        y[s] += scale * taper * noise[s];
      }
    }
  }

  rec.annotated = coverage_mask(n_cycles, cfg.annotation_coverage);
  const double limit = cfg.duration;
  for (std::size_t i = 0; i < n_cycles; ++i) {
    const double on = rec.cycle_onsets[i];
    const double end = cycle_end(i);
    if (!rec.annotated[i]) {
      push_interval(rec.track, on, end, HeartState::Unannotated, limit);
      continue;
    }
    const double s2 = s2_onset(i);
    push_interval(rec.track, on, on + kS1Duration, HeartState::S1, limit);
    push_interval(rec.track, on + kS1Duration, s2, HeartState::Systole, limit);
    push_interval(rec.track, s2, s2 + kS2Duration, HeartState::S2, limit);
    push_interval(rec.track, s2 + kS2Duration, end, HeartState::Diastole, limit);
  }

  rec.wave = Waveform{std::move(y), cfg.sample_rate};
  return rec;
}

std::vector<RecordingMeta> generate_dataset(const DatasetSpec& spec, const fs::path& dir) {
  if (spec.n_patients < 2) throw ValidationError("synth: need at least two patients");
  if (!(spec.positive_fraction > 0.0 && spec.positive_fraction < 1.0)) {
    throw ValidationError("synth: positive fraction must be in (0, 1)");
  }
  if (spec.recordings_per_patient < 1) throw ValidationError("synth: need at least one recording per patient");
  spec.recording.validate();

  const auto n_patients = static_cast<std::size_t>(spec.n_patients);
  const auto n_positive = static_cast<std::size_t>(std::llround(spec.n_patients * spec.positive_fraction));
  std::vector<std::size_t> order(n_patients);
  for (std::size_t i = 0; i < n_patients; ++i) order[i] = i;
  Rng rng(spec.seed);
  rng.shuffle(order);
  std::vector<bool> positive(n_patients, false);
  for (std::size_t i = 0; i < n_positive; ++i) positive[order[i]] = true;

  static const char* kSites[] = {"AV", "PV", "TV", "MV", "Phc"};
  fs::create_directories(dir / "wav");
  fs::create_directories(dir / "seg");
  std::vector<RecordingMeta> rows;
  for (std::size_t p = 0; p < n_patients; ++p) {
    char pid[16];
    std::snprintf(pid, sizeof(pid), "P%04zu", p + 1);
    const Sex sex = rng.bernoulli(0.5) ? Sex::Female : Sex::Male;
    for (int r = 0; r < spec.recordings_per_patient; ++r) {
      const std::string site = spec.recordings_per_patient <= 5 ? kSites[r] : "R" + std::to_string(r + 1);
      const std::string rid = std::string(pid) + "_" + site;
      SynthConfig cfg = spec.recording;
      cfg.seed = derive_seed(spec.seed, p, static_cast<std::uint64_t>(r));
      Rng local(cfg.seed ^ 0x5eedULL);
      cfg.heart_rate_bpm = std::clamp(
          spec.recording.heart_rate_bpm * (1.0 + spec.heart_rate_spread * local.uniform(-1.0, 1.0)), 30.0, 220.0);
      cfg.murmur = positive[p];
      const SynthRecording rec = generate_recording(cfg);

      RecordingMeta meta;
      meta.recording_id = rid;
      meta.patient_id = pid;
      meta.wav_path = "wav/" + rid + ".wav";
      meta.seg_path = "seg/" + rid + ".tsv";
      meta.label = positive[p] ? Label::Present : Label::Absent;
      meta.age_group = AgeGroup::Child;
      meta.sex = sex;
      write_wav(dir / meta.wav_path, rec.wave, WavEncoding::Float32);
      write_segmentation(dir / *meta.seg_path, rec.track);
      rows.push_back(std::move(meta));
    }
  }
  write_manifest(dir / "manifest.csv", rows);
  return rows;
}

}  // namespace pcgkit
