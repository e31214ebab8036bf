// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "pcgkit/classifier.hpp"
#include "pcgkit/dataset_io.hpp"
#include "pcgkit/evaluation.hpp"
#include "pcgkit/pipeline/stages.hpp"
#include "pcgkit/preprocess.hpp"
#include "pcgkit/rng.hpp"
#include "pcgkit/segmentation.hpp"
#include "pcgkit/time_stretch.hpp"
#include "temp_dir.hpp"

namespace {

using namespace pcgkit;
namespace fs = std::filesystem;

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
  Outcome outcome = Outcome::Fail;
  std::string detail;
};

Verdict pass_if(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

std::string describe(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

Verdict chunk_count_oracles() {
  Rng rng(20240101);
  int fixed_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const int sr = static_cast<int>(rng.integer(100, 16000));
    const double seconds = rng.uniform(0.01, 10.0);
    SegmentConfig cfg{SegmentMethod::Fixed, seconds, sr, 10};
    const auto lc = static_cast<std::size_t>(std::llround(seconds * sr));
    if (lc == 0) {
      ++fixed_ok;
      continue;
    }
    const auto n = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(std::min<std::size_t>(lc * 6, 400000))));
    const auto chunks = chunk_fixed(Waveform{std::vector<double>(n, 0.5), sr}, cfg);
    const std::size_t rem = n % lc;
    const std::size_t expected = n / lc + (static_cast<double>(rem) > 0.65 * static_cast<double>(lc) ? 1 : 0);
    fixed_ok += chunks.size() == expected ? 1 : 0;
  }
  int cycle_ok = 0;
  for (int t = 0; t < 1000; ++t) {
    const int n_cycles = static_cast<int>(rng.integer(1, 12));
    const auto n_onsets = static_cast<std::size_t>(rng.integer(0, 30));
    std::vector<double> onsets;
    double time = rng.uniform(0.0, 0.3);
    for (std::size_t i = 0; i < n_onsets; ++i) {
      onsets.push_back(time);
      time += rng.uniform(0.3, 1.5);
    }
    const int sr = 500;
    const Waveform w{std::vector<double>(static_cast<std::size_t>(std::ceil(time * sr)) + 1, 0.1), sr};
    const SegmentConfig cfg{SegmentMethod::Cycle, rng.uniform(0.5, 2.0), sr, n_cycles};
    const auto chunks = chunk_cycles(w, onsets, cfg);
    const std::size_t expected = n_onsets == 0 ? 0 : (n_onsets - 1) / static_cast<std::size_t>(n_cycles);
    cycle_ok += chunks.size() == expected ? 1 : 0;
  }
  return pass_if(fixed_ok == 1000 && cycle_ok == 1000, describe("fixed %d/1000, cycle %d/1000 exact", fixed_ok, cycle_ok));
}

Verdict length_exactness() {
  Rng rng(20240202);
  std::size_t chunks_seen = 0, wrong = 0;
  for (int t = 0; t < 500; ++t) {
    const int sr = static_cast<int>(rng.integer(500, 4000));
    const double seconds = rng.uniform(0.3, 3.0);
    const auto lc = static_cast<std::size_t>(std::llround(seconds * sr));
    if (t % 2 == 0) {
      const SegmentConfig cfg{SegmentMethod::Fixed, seconds, sr, 1};
      std::vector<double> x(static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(lc * 4))));
      for (double& v : x) v = rng.normal();
      for (const auto& c : chunk_fixed(Waveform{x, sr}, cfg)) {
        ++chunks_seen;
        wrong += c.samples.size() != lc ? 1 : 0;
      }
    } else {
      // Recording rate may differ from the segmentation rate.
      const int rec_sr = rng.bernoulli(0.5) ? sr : static_cast<int>(rng.integer(500, 4000));
      const int n_cycles = static_cast<int>(rng.integer(1, 6));
      std::vector<double> onsets;
      double time = 0.0;
      for (int i = 0; i < n_cycles * 2 + 1; ++i) {
        onsets.push_back(time);
        time += rng.uniform(0.4, 1.2);
      }
      std::vector<double> x(static_cast<std::size_t>(std::ceil(time * rec_sr)) + 1);
      for (double& v : x) v = rng.normal();
      const SegmentConfig cfg{SegmentMethod::Cycle, seconds, sr, n_cycles};
      for (const auto& c : chunk_cycles(Waveform{x, rec_sr}, onsets, cfg)) {
        ++chunks_seen;
        wrong += c.samples.size() != lc ? 1 : 0;
      }
    }
  }
  return pass_if(wrong == 0 && chunks_seen > 0, describe("%zu chunks, %zu with wrong length", chunks_seen, wrong));
}

Verdict filter_response() {
  const auto coeffs = design_bandpass({25.0, 500.0, 5, 4000.0});
  const double at10 = coeffs.magnitude_db(10.0, 4000.0);
  const double at1500 = coeffs.magnitude_db(1500.0, 4000.0);
  const double at112 = coeffs.magnitude_db(112.0, 4000.0);
  const bool stable = coeffs.max_pole_radius() < 1.0;
  return pass_if(at10 <= -40.0 && at1500 <= -40.0 && at112 >= -1.0 && stable,
                 describe("10 Hz %.1f dB, 1500 Hz %.1f dB, 112 Hz %.3f dB, max pole radius %.4f", at10, at1500, at112,
                     coeffs.max_pole_radius()));
}

Verdict stretch_pitch() {
  double worst = 0.0;
  for (double f : {50.0, 100.0, 200.0}) {
    for (double factor : {0.5, 1.0, 2.0}) {
      const Waveform w{oracle::sine(f, 4000, 8000), 4000};
      const auto out = stretch_to_length(w, static_cast<std::size_t>(8000 * factor));
      const double peak = oracle::dominant_frequency(out.samples, 4000, 20.0, 500.0);
      worst = std::max(worst, std::abs(peak - f) / f);
    }
  }
  return pass_if(worst <= 0.02, describe("worst relative peak error %.5f over 9 cases", worst));
}

Verdict metric_oracles() {
  Rng rng(20240303);
  double auroc_err = 0.0, mcc_err = 0.0, f2_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 200));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = t % 2 ? static_cast<double>(rng.integer(0, 9)) / 9.0 : rng.uniform();
      labels[i] = rng.bernoulli(0.4) ? 1 : 0;
    }
    labels[0] = 1;
    labels[n - 1] = 0;
    auroc_err = std::max(auroc_err, std::abs(auroc(scores, labels) - oracle::pairwise_auroc(scores, labels)));
  }
  std::vector<ConfusionMatrix> cms{{3, 1, 2, 4}};
  for (int t = 0; t < 99; ++t) {
    cms.push_back({static_cast<std::size_t>(rng.integer(0, 100)), static_cast<std::size_t>(rng.integer(0, 100)),
                   static_cast<std::size_t>(rng.integer(0, 100)), static_cast<std::size_t>(rng.integer(1, 100))});
  }
  for (const auto& cm : cms) {
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn_), tn = static_cast<double>(cm.tn);
    mcc_err = std::max(mcc_err, std::abs(matthews_correlation(cm) - oracle::mcc_direct(tp, fp, fn, tn)));
    f2_err = std::max(f2_err, std::abs(f2_score(precision(cm), recall(cm)) - oracle::f2_direct(tp, fp, fn)));
  }
  const ConfusionMatrix worked{3, 1, 2, 4};
  const double f2 = f2_score(precision(worked), recall(worked));
  const double mcc = matthews_correlation(worked);
  const bool worked_ok = std::abs(f2 - 0.625) < 1e-12 && std::abs(mcc - 0.4082) < 5e-5;
  return pass_if(auroc_err <= 1e-12 && mcc_err <= 1e-12 && f2_err <= 1e-12 && worked_ok,
                 describe("max |err| auroc %.1e mcc %.1e f2 %.1e; worked case F2 %.4f MCC %.4f", auroc_err, mcc_err, f2_err,
                     f2, mcc));
}

Verdict knn_exactness() {
  Rng rng(20240404);
  int matches = 0, queries = 0, tie_sets = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 500));
    const auto dim = static_cast<std::size_t>(rng.integer(1, 32));
    const bool ties = t % 4 == 0;
    tie_sets += ties ? 1 : 0;
    std::vector<std::vector<double>> raw;
    std::vector<int> labels;
    std::vector<KnnModel::Point> points;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> v(dim);
      for (double& x : v) x = ties ? static_cast<double>(rng.integer(-1, 1)) : rng.normal();
      const int label = rng.bernoulli(0.3) ? 1 : 0;
      raw.push_back(v);
      labels.push_back(label);
      points.push_back({v, label, {}});
    }
    KnnConfig cfg;
    cfg.k = static_cast<int>(rng.integer(1, static_cast<std::int64_t>(std::min<std::size_t>(n, 15))));
    const auto model = KnnModel::from_points(points, cfg);
    for (int q = 0; q < 10; ++q) {
      std::vector<double> query(dim);
      for (double& x : query) x = ties ? static_cast<double>(rng.integer(-1, 1)) : rng.normal();
      ++queries;
      matches += model.score(query) == oracle::knn_score(raw, labels, query, static_cast<std::size_t>(cfg.k)) ? 1 : 0;
    }
  }
  return pass_if(matches == queries,
                 describe("%d/%d queries match the exhaustive oracle (%d sets with duplicate distances)", matches, queries,
                     tie_sets));
}

Verdict cv_integrity() {
  Rng rng(20240505);
  int overlaps = 0, strat_violations = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<CvItem> items;
    const int n_patients = static_cast<int>(rng.integer(20, 120));
    for (int p = 0; p < n_patients; ++p) {
      const int label = p < 2 ? p : (rng.bernoulli(0.25) ? 1 : 0);
      const int recs = static_cast<int>(rng.integer(1, 5));
      for (int r = 0; r < recs; ++r) {
        CvItem it;
        it.patient_id = "P" + std::to_string(p);
        it.recording_id = it.patient_id + "_" + std::to_string(r);
        it.id = it.recording_id + "_f000";
        it.label = label;
        items.push_back(it);
      }
    }
    const auto patients = patient_labels(items);
    const int k = 10;
    const auto folds = make_folds(patients, k, static_cast<std::uint64_t>(t));
    double n_pos = 0;
    for (const auto& p : patients) n_pos += p.second;
    for (int f = 0; f < k; ++f) {
      const auto split = split_fold(items, folds, f);
      std::set<std::string> train;
      for (auto i : split.train) train.insert(items[i].patient_id);
      for (auto i : split.validation) overlaps += train.count(items[i].patient_id) ? 1 : 0;
      double pos = 0, neg = 0;
      for (const auto& p : patients) {
        if (folds.fold(p.first) != f) continue;
        (p.second ? pos : neg) += 1;
      }
      if (std::abs(pos - n_pos / k) > 1.0) ++strat_violations;
      if (std::abs(neg - (static_cast<double>(patients.size()) - n_pos) / k) > 1.0) ++strat_violations;
    }
  }
  return pass_if(overlaps == 0 && strat_violations == 0,
                 describe("50 fold generations: %d patient overlaps, %d stratification violations", overlaps,
                     strat_violations));
}

Verdict end_to_end() {
  testing::TempDir dir("pcgkit-e2e");
  DatasetSpec spec;
  spec.n_patients = 40;
  spec.positive_fraction = 0.2;
  spec.recording.murmur_snr_db = 20.0;
  spec.seed = 1;
  pipeline::synth_generate(spec, dir / "data");
  pipeline::PipelineConfig cfg = pipeline::preset_config("cnn-fixed");
  cfg.workdir = dir / "work";
  cfg.manifest = dir / "data" / "manifest.csv";
  cfg.seed = 1;
  pipeline::preprocess(cfg);
  std::string detail;
  bool ok = true;
  for (SegmentMethod mode : {SegmentMethod::Fixed, SegmentMethod::Cycle}) {
    pipeline::segment(cfg, mode);
    pipeline::featurize(cfg, mode);
    pipeline::CvRequest request;
    request.mode = mode;
    const double real = pipeline::cv_run(cfg, request).at("summary").at("auroc").at("mean").get<double>();
    double null_sum = 0.0;
    const int shuffles = 10;
    for (int s = 1; s <= shuffles; ++s) {
      request.shuffle_seed = static_cast<std::uint64_t>(s);
      null_sum += pipeline::cv_run(cfg, request).at("summary").at("auroc").at("mean").get<double>();
    }
    const double null_mean = null_sum / shuffles;
    ok = ok && real >= 0.95 && null_mean >= 0.4 && null_mean <= 0.6;
    detail += describe("%s AUROC %.3f, shuffled mean %.3f over %d seeds; ", to_string(mode).c_str(), real, null_mean,
                  shuffles);
  }
  return pass_if(ok, detail);
}

Verdict utilization() {
  testing::TempDir dir("pcgkit-util");
  std::size_t counts[2] = {0, 0};
  const double coverages[2] = {1.0, 0.5};
  for (int i = 0; i < 2; ++i) {
    // Long recordings keep the per-recording floor on partial groups small
    // relative to the chunk yield.
    DatasetSpec spec;
    spec.n_patients = 10;
    spec.positive_fraction = 0.2;
    spec.recording.duration = 120.0;
    spec.recording.annotation_coverage = coverages[i];
    spec.seed = 7;
    const auto sub = dir / ("cov" + std::to_string(i));
    pipeline::synth_generate(spec, sub / "data");
    pipeline::PipelineConfig cfg = pipeline::preset_config("cnn-cycle");
    cfg.workdir = sub / "work";
    cfg.manifest = sub / "data" / "manifest.csv";
    pipeline::preprocess(cfg);
    counts[i] = pipeline::segment(cfg, SegmentMethod::Cycle).at("chunks").get<std::size_t>();
  }
  const double ratio = counts[0] ? static_cast<double>(counts[1]) / static_cast<double>(counts[0]) : 0.0;
  return pass_if(std::abs(ratio - 0.5) <= 0.1,
                 describe("cycle chunks %zu at full coverage, %zu at 0.5 coverage, ratio %.3f", counts[0], counts[1], ratio));
}

Verdict dataset_statistics() {
  const char* manifest = std::getenv("PCGKIT_PHYSIONET_MANIFEST");
  if (manifest == nullptr || !fs::is_regular_file(manifest)) {
    return {Outcome::Skip, "set PCGKIT_PHYSIONET_MANIFEST to the dataset manifest to run"};
  }
  testing::TempDir dir("pcgkit-ingest");
  pipeline::PipelineConfig cfg = pipeline::preset_config("cnn-cycle");
  cfg.workdir = dir.path();
  cfg.manifest = manifest;
  const auto s = pipeline::ingest(cfg);
  const double fraction = s.usable_fraction.value_or(-1.0);
  const bool ok = s.total == 3163 && s.unknown_excluded == 156 && s.positive == 616 && s.negative == 2391 &&
                  s.patients == 816 && s.cycles == 62636 && std::abs(fraction - 0.517) <= 0.03;
  return pass_if(ok, describe("%zu total, %zu Unknown, %zu/%zu pos/neg, %zu patients, %zu cycles, usable fraction %.3f",
                         s.total, s.unknown_excluded, s.positive, s.negative, s.patients, s.cycles, fraction));
}

struct Criterion {
  const char* name;
  double limit_s;  // 0 means no limit
  std::function<Verdict()> run;
};

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const std::vector<Criterion> criteria{
      {"chunk-count-oracles", 5.0, chunk_count_oracles},
      {"length-exactness", 30.0, length_exactness},
      {"filter-response", 1.0, filter_response},
      {"stretch-pitch-preservation", 5.0, stretch_pitch},
      {"metric-oracle-equivalence", 5.0, metric_oracles},
      {"knn-exactness", 10.0, knn_exactness},
      {"cv-integrity", 5.0, cv_integrity},
      {"end-to-end-synthetic-separability", 120.0, end_to_end},
      {"utilization-effect", 60.0, utilization},
      {"dataset-statistics", 0.0, dataset_statistics},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (v.outcome == Outcome::Pass && c.limit_s > 0.0 && elapsed > c.limit_s) {
      v.outcome = Outcome::Fail;
      v.detail += describe(" (over the %.0f s limit)", c.limit_s);
    }
    const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Skip ? "SKIP" : "FAIL";
    failures += v.outcome == Outcome::Fail ? 1 : 0;
    std::printf("%s %s [%.2fs] %s\n", tag, c.name, elapsed, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
