#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcgkit/pipeline/config.hpp"
#include "pcgkit/synth.hpp"

namespace pcgkit::pipeline {

// Locations of every stage's artifacts under the work directory.
struct Layout {
  std::filesystem::path root;

  std::filesystem::path ingest_summary() const { return root / "ingest.json"; }
  std::filesystem::path preprocessed_dir() const { return root / "preprocessed"; }
  std::filesystem::path preprocessed_manifest() const { return preprocessed_dir() / "manifest.csv"; }
  std::filesystem::path chunk_dir(SegmentMethod m) const { return root / "chunks" / to_string(m); }
  std::filesystem::path chunk_index(SegmentMethod m) const { return chunk_dir(m) / "index.csv"; }
  std::filesystem::path features(SegmentMethod m) const { return root / "features" / (to_string(m) + ".csv"); }
  std::filesystem::path imported_dir() const { return root / "embeddings"; }
  std::filesystem::path report_dir(const std::string& name) const { return root / "reports" / name; }
  std::filesystem::path run_record(const std::string& stage) const { return root / "runs" / (stage + ".json"); }
};

inline constexpr const char* kChunkIndexHeader = "chunk_id,recording_id,patient_id,method,start_s,end_s,padded";

struct ChunkRecord {
  std::string chunk_id;
  std::string recording_id;
  std::string patient_id;
  SegmentMethod method = SegmentMethod::Fixed;
  double start_s = 0.0;
  double end_s = 0.0;
  bool padded = false;
};

std::vector<ChunkRecord> load_chunk_index(const std::filesystem::path& path);
void write_chunk_index(const std::filesystem::path& path, const std::vector<ChunkRecord>& rows);

// Suffix marking training-only augmented copies of a chunk: "<chunk>@aug<N>".
inline constexpr const char* kAugmentTag = "@aug";
std::string base_id(const std::string& id);
bool is_augmented(const std::string& id);

// Dataset statistics for a manifest. Cycle counts need segmentation files;
// usable_fraction is covered cycle-group seconds over total seconds of the
// usable recordings.
struct IngestStats {
  std::size_t total = 0;
  std::size_t unknown_excluded = 0;
  std::size_t usable = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t patients = 0;
  std::size_t with_segmentation = 0;
  std::size_t cycles = 0;             // over usable recordings
  std::size_t cycles_all = 0;         // over every recording with a track
  double total_seconds = 0.0;         // usable recordings
  double covered_seconds = 0.0;       // complete cycle groups, usable recordings
  std::optional<double> usable_fraction;

  nlohmann::json to_json() const;
};

// Each stage writes its artifacts plus runs/<stage>.json and returns a
// summary. ValidationError for bad input, IoError for filesystem failures.
IngestStats ingest(const PipelineConfig& cfg);
nlohmann::json preprocess(const PipelineConfig& cfg);
nlohmann::json segment(const PipelineConfig& cfg, SegmentMethod method);
nlohmann::json featurize(const PipelineConfig& cfg, SegmentMethod mode);
nlohmann::json embed_import(const PipelineConfig& cfg, const std::filesystem::path& embeddings,
                            const std::optional<std::filesystem::path>& labels);

nlohmann::json knn_fit_stage(const PipelineConfig& cfg, const std::filesystem::path& embeddings,
                             const std::filesystem::path& labels, const std::filesystem::path& model_out);
// Writes `id,score,label` rows to `out`, or returns them in "csv" when out is empty.
nlohmann::json knn_predict_stage(const PipelineConfig& cfg, const std::filesystem::path& model,
                                 const std::filesystem::path& queries, const std::filesystem::path& out);

struct CvRequest {
  // Pooled features of this segmentation mode, unless `embeddings` is set.
  SegmentMethod mode = SegmentMethod::Fixed;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> labels;
  // Permute patient labels with this seed before splitting (null check).
  std::optional<std::uint64_t> shuffle_seed;
  std::string report_name;  // defaults to the mode, "-shuffled<seed>" appended
};

nlohmann::json cv_run(const PipelineConfig& cfg, const CvRequest& request);

nlohmann::json synth_generate(const DatasetSpec& spec, const std::filesystem::path& out);

// Collects reports/*/cv_report.json into reports/summary.csv and summary.json.
nlohmann::json report(const PipelineConfig& cfg);

}  // namespace pcgkit::pipeline
