#include "pcgkit/pipeline/stages.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "pcgkit/csv.hpp"
#include "pcgkit/dataset_io.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"
#include "pcgkit/report.hpp"
#include "pcgkit/rng.hpp"
#include "pcgkit/resample.hpp"
#include "pcgkit/wav.hpp"

namespace pcgkit::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::is_regular_file(path)) throw ValidationError(what + " not found: " + path.string());
}

// Digest over many files: SHA-256 of "name sha\n" lines in the given order.
std::string digest_files(const std::vector<fs::path>& files) {
  std::string lines;
  for (const auto& f : files) lines += f.filename().string() + ' ' + sha256_file(f) + '\n';
  return sha256_hex(lines);
}

void write_run_record(const PipelineConfig& cfg, const std::string& stage, const json& inputs,
                      const json& outputs) {
  const Layout layout{cfg.workdir};
  ensure_dir(layout.run_record(stage).parent_path());
  const json record{{"stage", stage},
                    {"config_hash", cfg.hash()},
                    {"config", cfg.to_json()},
                    {"seed", cfg.seed},
                    {"inputs", inputs},
                    {"outputs", outputs}};
  atomic_write_file(layout.run_record(stage), record.dump(2) + "\n");
}

fs::path require_manifest(const PipelineConfig& cfg) {
  if (cfg.manifest.empty()) throw ValidationError("manifest: no manifest given");
  require_file(cfg.manifest, "manifest");
  return cfg.manifest;
}

std::string chunk_wav_name(const std::string& chunk_id) { return chunk_id + ".wav"; }

std::map<std::string, RecordingMeta> by_recording(const std::vector<RecordingMeta>& rows) {
  std::map<std::string, RecordingMeta> out;
  for (const auto& r : rows) out.emplace(r.recording_id, r);
  return out;
}

}  // namespace

std::string base_id(const std::string& id) {
  const auto pos = id.find(kAugmentTag);
  return pos == std::string::npos ? id : id.substr(0, pos);
}

bool is_augmented(const std::string& id) { return id.find(kAugmentTag) != std::string::npos; }

std::vector<ChunkRecord> load_chunk_index(const fs::path& path) {
  require_file(path, "chunk index");
  const auto lines = csv::read_lines(path.string());
  if (lines.empty() || lines[0] != kChunkIndexHeader) {
    throw ValidationError(path.string() + ": expected header '" + kChunkIndexHeader + "'");
  }
  std::vector<ChunkRecord> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const auto f = csv::split(lines[i]);
    if (f.size() != 7) throw ValidationError(path.string() + ":" + std::to_string(i + 1) + ": expected 7 columns");
    rows.push_back({f[0], f[1], f[2], parse_segment_method(f[3]), csv::parse_double(f[4], "start_s"),
                    csv::parse_double(f[5], "end_s"), f[6] == "1"});
  }
  return rows;
}

void write_chunk_index(const fs::path& path, const std::vector<ChunkRecord>& rows) {
  std::ostringstream out;
  out << kChunkIndexHeader << '\n';
  for (const auto& r : rows) {
    out << r.chunk_id << ',' << r.recording_id << ',' << r.patient_id << ',' << to_string(r.method) << ','
        << csv::format_double(r.start_s) << ',' << csv::format_double(r.end_s) << ',' << (r.padded ? 1 : 0) << '\n';
  }
  atomic_write_file(path, out.str());
}

json IngestStats::to_json() const {
  return json{{"total", total},
              {"unknown_excluded", unknown_excluded},
              {"usable", usable},
              {"positive", positive},
              {"negative", negative},
              {"patients", patients},
              {"with_segmentation", with_segmentation},
              {"cycles", cycles},
              {"cycles_all_recordings", cycles_all},
              {"total_seconds", total_seconds},
              {"covered_seconds", covered_seconds},
              {"usable_fraction", usable_fraction ? json(*usable_fraction) : json(nullptr)}};
}

IngestStats ingest(const PipelineConfig& cfg) {
  const auto manifest = require_manifest(cfg);
  const auto all = load_manifest(manifest, false);
  IngestStats stats;
  stats.total = all.size();
  std::set<std::string> patients;
  for (const auto& r : all) {
    std::optional<SegmentationTrack> track;
    if (r.seg_path && fs::is_regular_file(*r.seg_path)) track = load_segmentation(*r.seg_path);
    std::vector<double> onsets;
    if (track) {
      onsets = extract_s1_onsets(*track);
      stats.cycles_all += onsets.empty() ? 0 : onsets.size() - 1;
    }
    if (r.label == Label::Unknown) {
      ++stats.unknown_excluded;
      continue;
    }
    ++stats.usable;
    ++(r.positive() ? stats.positive : stats.negative);
    patients.insert(r.patient_id);
    if (track) {
      ++stats.with_segmentation;
      stats.cycles += onsets.empty() ? 0 : onsets.size() - 1;
      stats.covered_seconds += cycle_covered_seconds(onsets, cfg.cycles_per_chunk);
      stats.total_seconds += load_wav(r.wav_path).duration();
    }
  }
  stats.patients = patients.size();
  if (stats.total_seconds > 0.0) stats.usable_fraction = stats.covered_seconds / stats.total_seconds;

  const Layout layout{cfg.workdir};
  ensure_dir(layout.root);
  atomic_write_file(layout.ingest_summary(), stats.to_json().dump(2) + "\n");
  write_run_record(cfg, "ingest", {{"manifest", sha256_file(manifest)}}, stats.to_json());
  return stats;
}

json preprocess(const PipelineConfig& cfg) {
  cfg.validate();
  const auto manifest = require_manifest(cfg);
  const auto rows = load_manifest(manifest, true);
  const auto coeffs = design_bandpass(cfg.bandpass);
  const Layout layout{cfg.workdir};
  const fs::path wav_dir = layout.preprocessed_dir() / "wav";
  ensure_dir(wav_dir);

  std::vector<RecordingMeta> out_rows;
  std::vector<fs::path> inputs;
  std::size_t resampled = 0;
  for (const auto& r : rows) {
    inputs.push_back(r.wav_path);
    Waveform w = load_wav(r.wav_path);
    if (w.sample_rate != cfg.segment.sample_rate) {
      w = resample(w, cfg.segment.sample_rate);
      ++resampled;
    }
    try {
      w = minmax_normalize(filter_zero_phase(coeffs, w));
    } catch (const ValidationError& e) {
      throw ValidationError(r.recording_id + ": " + e.what());
    }
    const fs::path out = fs::absolute(wav_dir / (r.recording_id + ".wav"));
    write_wav(out, w);
    RecordingMeta m = r;
    m.wav_path = out.string();
    if (m.seg_path) m.seg_path = fs::absolute(*m.seg_path).string();
    out_rows.push_back(std::move(m));
  }
  write_manifest(layout.preprocessed_manifest(), out_rows);
  const json summary{{"recordings", out_rows.size()}, {"resampled", resampled},
                     {"sample_rate", cfg.segment.sample_rate}};
  write_run_record(cfg, "preprocess", {{"manifest", sha256_file(manifest)}, {"wavs", digest_files(inputs)}}, summary);
  return summary;
}

json segment(const PipelineConfig& cfg, SegmentMethod method) {
  cfg.validate();
  const Layout layout{cfg.workdir};
  require_file(layout.preprocessed_manifest(), "preprocessed manifest (run `preprocess` first)");
  const auto rows = load_manifest(layout.preprocessed_manifest(), true);
  const SegmentConfig seg = cfg.segment_config(method);
  seg.validate();

  const fs::path wav_dir = layout.chunk_dir(method) / "wav";
  std::error_code ec;
  fs::remove_all(wav_dir, ec);
  ensure_dir(wav_dir);

  std::vector<ChunkRecord> index;
  std::size_t skipped = 0;
  std::size_t recordings_used = 0;
  for (const auto& r : rows) {
    const Waveform w = load_wav(r.wav_path);
    std::vector<Chunk> chunks;
    const ChunkSource source{r.recording_id, r.patient_id};
    if (method == SegmentMethod::Fixed) {
      chunks = chunk_fixed(w, seg, source);
    } else {
      if (!r.seg_path || !fs::is_regular_file(*r.seg_path)) {
        spdlog::warn("{}: no segmentation file; skipped", r.recording_id);
        ++skipped;
        continue;
      }
      const auto onsets = extract_s1_onsets(load_segmentation(*r.seg_path));
      try {
        chunks = chunk_cycles(w, onsets, seg, source);
      } catch (const ValidationError& e) {
        throw ValidationError(r.recording_id + ": " + e.what());
      }
    }
    recordings_used += chunks.empty() ? 0 : 1;
    for (const auto& c : chunks) {
      write_wav(wav_dir / chunk_wav_name(c.id()), c.waveform());
      index.push_back({c.id(), c.recording_id, c.patient_id, c.method, c.start_s, c.end_s, c.padded});
    }
  }
  write_chunk_index(layout.chunk_index(method), index);
  const json summary{{"method", to_string(method)},
                     {"chunks", index.size()},
                     {"recordings", rows.size()},
                     {"recordings_with_chunks", recordings_used},
                     {"skipped_without_segmentation", skipped},
                     {"chunk_length", seg.chunk_length()}};
  write_run_record(cfg, "segment-" + to_string(method),
                   {{"manifest", sha256_file(layout.preprocessed_manifest())}}, summary);
  return summary;
}

json featurize(const PipelineConfig& cfg, SegmentMethod mode) {
  cfg.validate();
  const Layout layout{cfg.workdir};
  const auto index = load_chunk_index(layout.chunk_index(mode));
  const FeatureConfig fcfg = cfg.feature_config(mode);
  fcfg.validate();
  const std::size_t empty_filters = count_empty_filters(mel_filterbank(fcfg));
  if (empty_filters > 0) spdlog::info("{} of {} mel filters are empty", empty_filters, fcfg.n_mels);

  std::vector<Embedding> rows;
  std::size_t augmented = 0;
  const int copies = cfg.augment_enabled ? cfg.augment_copies : 0;
  for (const auto& rec : index) {
    Chunk chunk;
    chunk.recording_id = rec.recording_id;
    chunk.patient_id = rec.patient_id;
    chunk.method = rec.method;
    const Waveform w = load_wav(layout.chunk_dir(mode) / "wav" / chunk_wav_name(rec.chunk_id));
    chunk.samples = w.samples;
    chunk.sample_rate = w.sample_rate;
    const auto base = pool_features(mel_spectrogram(w, fcfg), rec.chunk_id);
    rows.push_back({base.id, base.vector});
    for (int n = 0; n < copies; ++n) {
      const std::string id = rec.chunk_id + kAugmentTag + std::to_string(n);
      Rng rng = chunk_rng(cfg.seed, id);
      const Chunk aug = augment_chunk(chunk, cfg.augment, rng);
      const auto mel = maybe_spec_mask(mel_spectrogram(aug.waveform(), fcfg), cfg.augment, rng);
      rows.push_back({id, pool_features(mel, id).vector});
      ++augmented;
    }
  }
  ensure_dir(layout.features(mode).parent_path());
  write_embeddings(layout.features(mode), rows);
  const json summary{{"mode", to_string(mode)},
                     {"chunks", index.size()},
                     {"augmented_rows", augmented},
                     {"dimension", 2 * fcfg.n_mels},
                     {"empty_mel_filters", empty_filters}};
  write_run_record(cfg, "featurize-" + to_string(mode), {{"chunk_index", sha256_file(layout.chunk_index(mode))}},
                   summary);
  return summary;
}

json embed_import(const PipelineConfig& cfg, const fs::path& embeddings, const std::optional<fs::path>& labels) {
  require_file(embeddings, "embeddings");
  const auto rows = load_embeddings(embeddings);
  if (rows.empty()) throw ValidationError(embeddings.string() + ": no embeddings");
  const Layout layout{cfg.workdir};
  ensure_dir(layout.imported_dir());
  write_embeddings(layout.imported_dir() / "embeddings.csv", rows);
  json inputs{{"embeddings", sha256_file(embeddings)}};
  std::size_t labeled = 0;
  if (labels) {
    require_file(*labels, "labels");
    const auto map = load_labels(*labels);
    for (const auto& r : rows) labeled += map.count(base_id(r.id));
    std::ostringstream out;
    out << "id,label\n";
    for (const auto& [id, label] : map) out << id << ',' << label << '\n';
    atomic_write_file(layout.imported_dir() / "labels.csv", out.str());
    inputs["labels"] = sha256_file(*labels);
  }
  const json summary{{"embeddings", rows.size()}, {"dimension", rows.front().vector.size()}, {"labeled", labeled},
                     {"path", (layout.imported_dir() / "embeddings.csv").string()}};
  write_run_record(cfg, "embed-import", inputs, summary);
  return summary;
}

json knn_fit_stage(const PipelineConfig& cfg, const fs::path& embeddings, const fs::path& labels,
                   const fs::path& model_out) {
  require_file(embeddings, "embeddings");
  require_file(labels, "labels");
  const auto rows = load_embeddings(embeddings);
  const auto label_map = load_labels(labels);
  const auto model = KnnModel::fit(rows, label_map, cfg.knn);
  if (model_out.has_parent_path()) ensure_dir(model_out.parent_path());
  model.save(model_out);
  const json summary{{"points", model.size()}, {"dimension", model.dimension()}, {"k", cfg.knn.k},
                     {"model", model_out.string()}};
  write_run_record(cfg, "knn-fit", {{"embeddings", sha256_file(embeddings)}, {"labels", sha256_file(labels)}},
                   summary);
  return summary;
}

json knn_predict_stage(const PipelineConfig& cfg, const fs::path& model_path, const fs::path& queries,
                       const fs::path& out) {
  require_file(model_path, "model");
  require_file(queries, "queries");
  const auto model = KnnModel::load(model_path);
  KnnConfig kc = model.config();
  kc.k = cfg.knn.k;
  kc.threshold = cfg.knn.threshold;
  const auto rows = load_embeddings(queries);
  std::ostringstream csv_out;
  csv_out << "id,score,label\n";
  std::size_t positives = 0;
  for (const auto& q : rows) {
    const auto p = model.predict(q.vector, kc, q.id);
    positives += static_cast<std::size_t>(p.label);
    csv_out << p.id << ',' << csv::format_double(p.score) << ',' << p.label << '\n';
  }
  json summary{{"queries", rows.size()}, {"predicted_positive", positives}, {"k", kc.k}};
  if (!out.empty()) {
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    atomic_write_file(out, csv_out.str());
    summary["predictions"] = out.string();
  } else {
    summary["csv"] = csv_out.str();
  }
  write_run_record(cfg, "knn-predict", {{"model", sha256_file(model_path)}, {"queries", sha256_file(queries)}},
                   summary);
  return summary;
}

namespace {

struct ItemOrigin {
  std::string recording_id;
  std::string patient_id;
};

}  // namespace

json cv_run(const PipelineConfig& cfg, const CvRequest& request) {
  cfg.validate();
  const Layout layout{cfg.workdir};

  // Recording metadata: preprocessed manifest if present, else the input manifest.
  std::vector<RecordingMeta> manifest_rows;
  fs::path manifest_path = layout.preprocessed_manifest();
  if (!fs::is_regular_file(manifest_path)) manifest_path = cfg.manifest;
  if (!manifest_path.empty() && fs::is_regular_file(manifest_path)) manifest_rows = load_manifest(manifest_path, true);
  const auto recordings = by_recording(manifest_rows);

  std::map<std::string, ItemOrigin> origins;
  for (SegmentMethod m : {SegmentMethod::Fixed, SegmentMethod::Cycle}) {
    if (!fs::is_regular_file(layout.chunk_index(m))) continue;
    for (const auto& c : load_chunk_index(layout.chunk_index(m))) origins[c.chunk_id] = {c.recording_id, c.patient_id};
  }
  for (const auto& [id, r] : recordings) origins.emplace(id, ItemOrigin{r.recording_id, r.patient_id});

  fs::path features_path = request.embeddings ? *request.embeddings : layout.features(request.mode);
  require_file(features_path, request.embeddings ? "embeddings" : "features (run `featurize` first)");
  const auto rows = load_embeddings(features_path);
  std::optional<std::map<std::string, int>> label_map;
  if (request.labels) {
    require_file(*request.labels, "labels");
    label_map = load_labels(*request.labels);
  }

  std::vector<CvItem> items;
  for (const auto& row : rows) {
    const bool aug = is_augmented(row.id);
    if (aug && !cfg.augment_enabled) continue;
    const std::string base = base_id(row.id);
    CvItem item;
    item.id = row.id;
    item.vector = row.vector;
    item.training_only = aug;
    const auto origin = origins.find(base);
    if (origin != origins.end()) {
      item.recording_id = origin->second.recording_id;
      item.patient_id = origin->second.patient_id;
    } else if (label_map) {
      item.recording_id = base;
      item.patient_id = base;
    } else {
      throw ValidationError(features_path.string() + ": id '" + base + "' matches no chunk or recording");
    }
    if (label_map) {
      const auto it = label_map->find(base);
      const auto rec_it = label_map->find(item.recording_id);
      if (it != label_map->end()) {
        item.label = it->second;
      } else if (rec_it != label_map->end()) {
        item.label = rec_it->second;
      } else {
        throw ValidationError("no label for '" + base + "'");
      }
    } else {
      const auto rec = recordings.find(item.recording_id);
      if (rec == recordings.end()) throw ValidationError("no label for recording '" + item.recording_id + "'");
      item.label = rec->second.positive() ? 1 : 0;
    }
    items.push_back(std::move(item));
  }
  if (items.empty()) throw ValidationError(features_path.string() + ": no items to evaluate");

  if (request.shuffle_seed) {
    auto patients = patient_labels(items);
    std::vector<int> labels;
    for (const auto& p : patients) labels.push_back(p.second);
    Rng rng(derive_seed(cfg.seed, "shuffle-" + std::to_string(*request.shuffle_seed)));
    rng.shuffle(labels);
    std::map<std::string, int> shuffled;
    for (std::size_t i = 0; i < patients.size(); ++i) shuffled[patients[i].first] = labels[i];
    for (auto& item : items) item.label = shuffled.at(item.patient_id);
  }

  const auto patients = patient_labels(items);
  const FoldAssignment folds = make_folds(patients, cfg.n_folds, cfg.seed);
  const CvResult result = run_cv(items, cfg.knn, folds, cfg.aggregation);

  std::string name = request.report_name;
  if (name.empty()) {
    name = request.embeddings ? "embeddings" : to_string(request.mode);
    if (request.shuffle_seed) name += "-shuffled" + std::to_string(*request.shuffle_seed);
  }
  std::size_t training_only = 0;
  for (const auto& item : items) training_only += item.training_only ? 1 : 0;
  const json extra{{"source", request.embeddings ? "embeddings" : "features"},
                   {"mode", to_string(request.mode)},
                   {"aggregation", to_string(cfg.aggregation)},
                   {"k", cfg.knn.k},
                   {"threshold", cfg.knn.threshold},
                   {"n_folds", cfg.n_folds},
                   {"seed", cfg.seed},
                   {"config_hash", cfg.hash()},
                   {"shuffle_seed", request.shuffle_seed ? json(*request.shuffle_seed) : json(nullptr)},
                   {"n_items", items.size()},
                   {"n_training_only", training_only},
                   {"n_patients", patients.size()}};
  const fs::path dir = layout.report_dir(name);
  ensure_dir(dir);
  write_cv_reports(dir, result, extra);

  json summary = extra;
  summary["report"] = (dir / "cv_report.json").string();
  for (const auto& [metric, s] : result.summary) summary["summary"][metric] = {{"mean", s.mean}, {"std", s.std}};
  json inputs{{"features", sha256_file(features_path)}};
  if (request.labels) inputs["labels"] = sha256_file(*request.labels);
  write_run_record(cfg, "cv-" + name, inputs, summary);
  return summary;
}

json synth_generate(const DatasetSpec& spec, const fs::path& out) {
  ensure_dir(out);
  const auto rows = generate_dataset(spec, out);
  std::set<std::string> patients, positive;
  for (const auto& r : rows) {
    patients.insert(r.patient_id);
    if (r.positive()) positive.insert(r.patient_id);
  }
  return json{{"manifest", (out / "manifest.csv").string()},
              {"recordings", rows.size()},
              {"patients", patients.size()},
              {"positive_patients", positive.size()},
              {"seed", spec.seed}};
}

json report(const PipelineConfig& cfg) {
  const Layout layout{cfg.workdir};
  const fs::path dir = layout.root / "reports";
  if (!fs::is_directory(dir)) throw ValidationError("no reports under " + dir.string() + " (run `cv run` first)");
  std::vector<fs::path> reports;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "cv_report.json")) reports.push_back(entry.path());
  }
  std::sort(reports.begin(), reports.end());
  const std::vector<std::string> metrics{"auroc", "mcc", "precision", "recall", "f2"};
  std::ostringstream table;
  table << "report";
  for (const auto& m : metrics) table << ',' << m << "_mean," << m << "_std";
  table << '\n';
  json all = json::object();
  for (const auto& r : reports) {
    const json doc = json::parse(read_file(r / "cv_report.json"));
    const std::string name = r.filename().string();
    table << name;
    json entry = json::object();
    for (const auto& m : metrics) {
      const json& s = doc.at("summary").at(m);
      table << ',' << csv::format_double(s.at("mean").get<double>()) << ','
            << csv::format_double(s.at("std").get<double>());
      entry[m] = {{"mean", s.at("mean")}, {"std", s.at("std")}};
    }
    table << '\n';
    all[name] = entry;
  }
  atomic_write_file(dir / "summary.csv", table.str());
  atomic_write_file(dir / "summary.json", all.dump(2) + "\n");
  return json{{"reports", all}, {"table", table.str()}};
}

}  // namespace pcgkit::pipeline
