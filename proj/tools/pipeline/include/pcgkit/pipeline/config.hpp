#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgkit/augmentation.hpp"
#include "pcgkit/classifier.hpp"
#include "pcgkit/evaluation.hpp"
#include "pcgkit/features.hpp"
#include "pcgkit/preprocess.hpp"
#include "pcgkit/segmentation.hpp"

namespace pcgkit::pipeline {

// Preset names accepted by --preset and the "preset" config key.
const std::vector<std::string>& preset_names();

struct PipelineConfig {
  std::string preset = "cnn-fixed";
  std::filesystem::path workdir = "work";
  std::filesystem::path manifest;  // empty until set

  BandpassSpec bandpass;  // sample_rate follows segment.sample_rate
  SegmentConfig segment;
  int cycles_per_chunk = 10;  // copied into segment.n_cycles for cycle runs

  // Optional overrides on top of the per-mode front-end parameters.
  std::optional<int> n_mels;
  std::optional<int> fft_size;
  std::optional<int> hop_length;
  double log_floor_db = -80.0;

  bool augment_enabled = true;
  int augment_copies = 1;
  AugmentConfig augment;

  KnnConfig knn;
  int n_folds = 10;
  Aggregation aggregation = Aggregation::PerChunk;
  std::uint64_t seed = 0;

  // Segmentation parameters for `method` (n_cycles taken from cycles_per_chunk).
  SegmentConfig segment_config(SegmentMethod method) const;
  FeatureConfig feature_config(SegmentMethod mode) const;

  // Every effective parameter, keys sorted.
  nlohmann::json to_json() const;
  // SHA-256 of the canonical JSON form.
  std::string hash() const;

  // Throws ValidationError naming the offending field.
  void validate() const;
};

// Defaults of one preset. Throws ValidationError for an unknown name.
PipelineConfig preset_config(const std::string& name);

// Overlays a JSON document onto `cfg`. Unknown keys and wrong types are
// rejected with the dotted field path in the message.
void apply_json(PipelineConfig& cfg, const nlohmann::json& doc);

// Reads a config file: the preset named inside it (or `fallback_preset`)
// provides defaults, the file's fields override them.
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::string& fallback_preset = "cnn-fixed");

}  // namespace pcgkit::pipeline
