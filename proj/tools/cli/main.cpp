// pcgkit command-line driver.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"
#include "pcgkit/pipeline/config.hpp"
#include "pcgkit/pipeline/stages.hpp"

namespace {

using pcgkit::SegmentMethod;
using pcgkit::pipeline::PipelineConfig;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct GlobalOptions {
  std::string config_path;
  std::string preset;
  std::string workdir;
  std::string manifest;
  std::optional<std::uint64_t> seed;
};

// Flags that override config fields; unset flags leave the config alone.
struct Overrides {
  std::optional<double> low_cut, high_cut;
  std::optional<int> order;
  std::optional<std::string> method;
  std::optional<double> seconds;
  std::optional<int> cycles, sample_rate;
  std::optional<double> augment_prob;
  bool no_augment = false;
  std::optional<int> augment_copies;
  std::optional<int> k, folds;
  std::optional<double> threshold;
  std::optional<std::string> aggregation;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("pcgkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("PCGKIT_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

PipelineConfig resolve(const GlobalOptions& g, const Overrides& o) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) {
    cfg = pcgkit::pipeline::load_config(g.config_path, g.preset.empty() ? "cnn-fixed" : g.preset);
    if (!g.preset.empty() && g.preset != cfg.preset) {
      // An explicit --preset wins over the file's preset: rebuild from it.
      auto doc = nlohmann::json::parse(pcgkit::read_file(g.config_path));
      doc.erase("preset");
      cfg = pcgkit::pipeline::preset_config(g.preset);
      pcgkit::pipeline::apply_json(cfg, doc);
    }
  } else {
    cfg = pcgkit::pipeline::preset_config(g.preset.empty() ? "cnn-fixed" : g.preset);
  }
  if (!g.workdir.empty()) cfg.workdir = g.workdir;
  if (!g.manifest.empty()) cfg.manifest = g.manifest;
  if (g.seed) cfg.seed = *g.seed;
  if (o.low_cut) cfg.bandpass.low_cut = *o.low_cut;
  if (o.high_cut) cfg.bandpass.high_cut = *o.high_cut;
  if (o.order) cfg.bandpass.order = *o.order;
  if (o.method) cfg.segment.method = pcgkit::parse_segment_method(*o.method);
  if (o.seconds) cfg.segment.seconds = *o.seconds;
  if (o.cycles) cfg.cycles_per_chunk = *o.cycles;
  if (o.sample_rate) cfg.segment.sample_rate = *o.sample_rate;
  if (o.augment_prob) cfg.augment.probability_each = *o.augment_prob;
  if (o.no_augment) cfg.augment_enabled = false;
  if (o.augment_copies) cfg.augment_copies = *o.augment_copies;
  if (o.k) cfg.knn.k = *o.k;
  if (o.threshold) cfg.knn.threshold = *o.threshold;
  if (o.folds) cfg.n_folds = *o.folds;
  if (o.aggregation) cfg.aggregation = pcgkit::parse_aggregation(*o.aggregation);
  cfg.segment.n_cycles = cfg.cycles_per_chunk;
  cfg.bandpass.sample_rate = cfg.segment.sample_rate;
  cfg.augment.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

void print(const nlohmann::json& summary) { std::cout << summary.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Heart-sound murmur detection pipeline"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  Overrides o;
  app.add_option("--config", g.config_path, "JSON configuration file");
  app.add_option("--preset", g.preset, "cnn-fixed, cnn-cycle, beats-fixed or beats-cycle")
      ->check(CLI::IsMember(pcgkit::pipeline::preset_names()));
  app.add_option("--workdir", g.workdir, "Directory for stage artifacts");
  app.add_option("--manifest", g.manifest, "Recording manifest CSV");
  app.add_option("--seed", g.seed, "Root random seed");

  auto* ingest = app.add_subcommand("ingest", "Validate a manifest and print dataset statistics");
  ingest->add_option("--cycles", o.cycles, "Cycles per chunk for the usable-fraction estimate");

  auto* preprocess = app.add_subcommand("preprocess", "Resample, bandpass filter and normalize recordings");
  preprocess->add_option("--low-cut", o.low_cut, "Lower band edge in Hz");
  preprocess->add_option("--high-cut", o.high_cut, "Upper band edge in Hz");
  preprocess->add_option("--order", o.order, "Bandpass design order");
  preprocess->add_option("--sample-rate", o.sample_rate, "Target sample rate in Hz");

  auto* segment = app.add_subcommand("segment", "Cut preprocessed recordings into chunks");
  segment->add_option("--method", o.method, "fixed or cycle")->check(CLI::IsMember({"fixed", "cycle"}));
  segment->add_option("--seconds", o.seconds, "Chunk duration in seconds");
  segment->add_option("--cycles", o.cycles, "Heart cycles per chunk (cycle method)");
  segment->add_option("--sample-rate", o.sample_rate, "Sample rate of the preprocessed recordings");

  std::string mode;
  auto* featurize = app.add_subcommand("featurize", "Pooled mel-spectrogram features per chunk");
  featurize->add_option("--mode", mode, "fixed or cycle")->check(CLI::IsMember({"fixed", "cycle"}));
  featurize->add_option("--augment-prob", o.augment_prob, "Probability of each augmentation");
  featurize->add_flag("--no-augment", o.no_augment, "Skip augmented training copies");
  featurize->add_option("--augment-copies", o.augment_copies, "Augmented copies per chunk");

  std::string embeddings_path, labels_path, model_path, queries_path, out_path;
  auto* embed = app.add_subcommand("embed-import", "Import externally computed embeddings");
  embed->add_option("--embeddings", embeddings_path, "Embedding CSV")->required();
  embed->add_option("--labels", labels_path, "Label CSV or manifest");

  auto* knn = app.add_subcommand("knn", "Fit or apply a k-NN model");
  knn->require_subcommand(1);
  auto* knn_fit = knn->add_subcommand("fit", "Fit a model on labeled embeddings");
  knn_fit->add_option("--embeddings", embeddings_path, "Embedding CSV")->required();
  knn_fit->add_option("--labels", labels_path, "Label CSV or manifest")->required();
  knn_fit->add_option("--model", model_path, "Output model file")->required();
  knn_fit->add_option("--k", o.k, "Neighbours");
  auto* knn_predict = knn->add_subcommand("predict", "Score query embeddings");
  knn_predict->add_option("--model", model_path, "Model file")->required();
  knn_predict->add_option("--queries", queries_path, "Query embedding CSV")->required();
  knn_predict->add_option("--out", out_path, "Prediction CSV (default: stdout)");
  knn_predict->add_option("--k", o.k, "Neighbours");
  knn_predict->add_option("--threshold", o.threshold, "Decision threshold");

  std::optional<std::uint64_t> shuffle_seed;
  std::string report_name;
  auto* cv = app.add_subcommand("cv", "Cross-validation");
  cv->require_subcommand(1);
  auto* cv_run = cv->add_subcommand("run", "Patient-grouped stratified k-fold evaluation");
  cv_run->add_option("--mode", mode, "Feature set: fixed or cycle")->check(CLI::IsMember({"fixed", "cycle"}));
  cv_run->add_option("--embeddings", embeddings_path, "Evaluate this embedding CSV instead of pooled features");
  cv_run->add_option("--labels", labels_path, "Labels for --embeddings (default: manifest)");
  cv_run->add_option("--k", o.k, "Neighbours");
  cv_run->add_option("--threshold", o.threshold, "Decision threshold");
  cv_run->add_option("--folds", o.folds, "Number of folds");
  cv_run->add_option("--aggregation", o.aggregation, "per-chunk or per-recording")
      ->check(CLI::IsMember({"per-chunk", "per-recording"}));
  cv_run->add_flag("--no-augment", o.no_augment, "Ignore augmented training rows");
  cv_run->add_option("--shuffle-labels", shuffle_seed, "Permute patient labels with this seed (null check)");
  cv_run->add_option("--name", report_name, "Report directory name under reports/");

  pcgkit::DatasetSpec spec;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Synthetic data");
  synth->require_subcommand(1);
  auto* synth_gen = synth->add_subcommand("generate", "Write a synthetic dataset");
  synth_gen->add_option("--patients", spec.n_patients, "Number of patients")->capture_default_str();
  synth_gen->add_option("--recordings", spec.recordings_per_patient, "Recordings per patient")->capture_default_str();
  synth_gen->add_option("--positive-frac", spec.positive_fraction, "Fraction of murmur patients")->capture_default_str();
  synth_gen->add_option("--coverage", spec.recording.annotation_coverage, "Annotated share of cycles")
      ->capture_default_str();
  synth_gen->add_option("--snr", spec.recording.murmur_snr_db, "Murmur SNR in dB")->capture_default_str();
  synth_gen->add_option("--duration", spec.recording.duration, "Seconds per recording")->capture_default_str();
  synth_gen->add_option("--sample-rate", spec.recording.sample_rate, "Sample rate in Hz")->capture_default_str();
  synth_gen->add_option("--out", synth_out, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Summarize cross-validation reports");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (synth_gen->parsed()) {
      spec.seed = g.seed.value_or(0);
      print(pcgkit::pipeline::synth_generate(spec, synth_out));
      return 0;
    }
    const PipelineConfig cfg = resolve(g, o);
    const SegmentMethod chosen = mode.empty() ? cfg.segment.method : pcgkit::parse_segment_method(mode);
    if (ingest->parsed()) {
      const auto stats = pcgkit::pipeline::ingest(cfg);
      std::cout << stats.total << " recordings, " << stats.unknown_excluded << " Unknown excluded, " << stats.usable
                << " usable\n"
                << stats.positive << " positive / " << stats.negative << " negative, " << stats.patients
                << " patients\n";
      if (stats.with_segmentation > 0) {
        std::cout << stats.cycles << " complete S1 to S1 cycles\n";
        if (stats.usable_fraction) {
          std::cout << "cycle-mode usable fraction " << *stats.usable_fraction << " (" << cfg.cycles_per_chunk
                    << " cycles per chunk)\n";
        }
      }
    } else if (preprocess->parsed()) {
      print(pcgkit::pipeline::preprocess(cfg));
    } else if (segment->parsed()) {
      print(pcgkit::pipeline::segment(cfg, cfg.segment.method));
    } else if (featurize->parsed()) {
      print(pcgkit::pipeline::featurize(cfg, chosen));
    } else if (embed->parsed()) {
      std::optional<std::filesystem::path> labels;
      if (!labels_path.empty()) labels = labels_path;
      print(pcgkit::pipeline::embed_import(cfg, embeddings_path, labels));
    } else if (knn_fit->parsed()) {
      print(pcgkit::pipeline::knn_fit_stage(cfg, embeddings_path, labels_path, model_path));
    } else if (knn_predict->parsed()) {
      const auto summary = pcgkit::pipeline::knn_predict_stage(cfg, model_path, queries_path, out_path);
      if (out_path.empty()) {
        std::cout << summary.at("csv").get<std::string>();
      } else {
        print(summary);
      }
    } else if (cv_run->parsed()) {
      pcgkit::pipeline::CvRequest request;
      request.mode = chosen;
      if (!embeddings_path.empty()) request.embeddings = embeddings_path;
      if (!labels_path.empty()) request.labels = labels_path;
      request.shuffle_seed = shuffle_seed;
      request.report_name = report_name;
      print(pcgkit::pipeline::cv_run(cfg, request));
    } else if (report->parsed()) {
      std::cout << pcgkit::pipeline::report(cfg).at("table").get<std::string>();
    }
  } catch (const pcgkit::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("config: {}", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return 0;
}
