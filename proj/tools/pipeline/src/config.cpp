#include "pcgkit/pipeline/config.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"

namespace pcgkit::pipeline {

using nlohmann::json;

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"cnn-fixed", "cnn-cycle", "beats-fixed", "beats-cycle"};
  return names;
}

PipelineConfig preset_config(const std::string& name) {
  PipelineConfig cfg;
  cfg.preset = name;
  if (name == "cnn-fixed" || name == "cnn-cycle") {
    cfg.segment.seconds = 8.0;
    cfg.segment.sample_rate = 4000;
    cfg.cycles_per_chunk = 10;
    cfg.knn.k = 5;
  } else if (name == "beats-fixed" || name == "beats-cycle") {
    cfg.segment.seconds = 7.0;
    cfg.segment.sample_rate = 16000;
    cfg.cycles_per_chunk = 12;
    cfg.knn.k = name == "beats-cycle" ? 7 : 5;
  } else {
    throw ValidationError("preset: unknown preset '" + name + "'");
  }
  cfg.segment.method = name.ends_with("-cycle") ? SegmentMethod::Cycle : SegmentMethod::Fixed;
  cfg.segment.n_cycles = cfg.cycles_per_chunk;
  cfg.bandpass.sample_rate = cfg.segment.sample_rate;
  return cfg;
}

SegmentConfig PipelineConfig::segment_config(SegmentMethod method) const {
  SegmentConfig out = segment;
  out.method = method;
  out.n_cycles = cycles_per_chunk;
  return out;
}

FeatureConfig PipelineConfig::feature_config(SegmentMethod mode) const {
  FeatureConfig f = mode == SegmentMethod::Fixed ? fixed_mode_features(segment.sample_rate)
                                                 : cycle_mode_features(segment.sample_rate);
  if (n_mels) f.n_mels = *n_mels;
  if (fft_size) f.fft_size = *fft_size;
  if (hop_length) f.hop_length = *hop_length;
  f.log_floor_db = log_floor_db;
  return f;
}

json PipelineConfig::to_json() const {
  auto opt = [](const std::optional<int>& v) { return v ? json(*v) : json(nullptr); };
  return json{
      {"preset", preset},
      {"workdir", workdir.string()},
      {"manifest", manifest.string()},
      {"seed", seed},
      {"preprocess",
       {{"low_cut", bandpass.low_cut}, {"high_cut", bandpass.high_cut}, {"order", bandpass.order}}},
      {"segment",
       {{"method", to_string(segment.method)},
        {"seconds", segment.seconds},
        {"sample_rate", segment.sample_rate},
        {"cycles", cycles_per_chunk}}},
      {"features",
       {{"n_mels", opt(n_mels)}, {"fft_size", opt(fft_size)}, {"hop_length", opt(hop_length)},
        {"log_floor_db", log_floor_db}}},
      {"augment",
       {{"enabled", augment_enabled},
        {"copies", augment_copies},
        {"probability", augment.probability_each},
        {"max_mute_fraction", augment.max_mute_fraction},
        {"max_semitones", augment.max_semitones},
        {"max_mask_area_fraction", augment.max_mask_area_fraction}}},
      {"knn", {{"k", knn.k}, {"threshold", knn.threshold}, {"metric", "euclidean"}, {"weighting", "uniform"}}},
      {"cv", {{"folds", n_folds}, {"aggregation", to_string(aggregation)}}},
  };
}

std::string PipelineConfig::hash() const { return sha256_hex(to_json().dump()); }

namespace {

void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

void check_object(const json& node, const std::string& path, const std::set<std::string>& allowed) {
  if (!node.is_object()) fail(path.empty() ? "config" : path, "expected an object");
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

double get_number(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

long long get_integer(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<long long>();
}

bool get_bool(const json& node, const std::string& path) {
  if (!node.is_boolean()) fail(path, "expected true or false");
  return node.get<bool>();
}

std::string get_string(const json& node, const std::string& path) {
  if (!node.is_string()) fail(path, "expected a string");
  return node.get<std::string>();
}

int to_int(long long v, const std::string& path) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) fail(path, "out of range");
  return static_cast<int>(v);
}

template <typename Fn>
void each(const json& section, const std::string& prefix, Fn&& fn) {
  for (const auto& [key, value] : section.items()) fn(key, value, prefix + "." + key);
}

}  // namespace

void apply_json(PipelineConfig& cfg, const json& doc) {
  check_object(doc, "", {"preset", "workdir", "manifest", "seed", "preprocess", "segment", "features", "augment",
                         "knn", "cv"});
  if (doc.contains("workdir")) cfg.workdir = get_string(doc["workdir"], "workdir");
  if (doc.contains("manifest")) cfg.manifest = get_string(doc["manifest"], "manifest");
  if (doc.contains("seed")) {
    const auto& s = doc["seed"];
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      fail("seed", "expected a nonnegative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  if (doc.contains("preprocess")) {
    const auto& sec = doc["preprocess"];
    check_object(sec, "preprocess", {"low_cut", "high_cut", "order"});
    each(sec, "preprocess", [&](const std::string& key, const json& v, const std::string& path) {
      if (key == "low_cut") cfg.bandpass.low_cut = get_number(v, path);
      if (key == "high_cut") cfg.bandpass.high_cut = get_number(v, path);
      if (key == "order") cfg.bandpass.order = to_int(get_integer(v, path), path);
    });
  }
  if (doc.contains("segment")) {
    const auto& sec = doc["segment"];
    check_object(sec, "segment", {"method", "seconds", "sample_rate", "cycles"});
    each(sec, "segment", [&](const std::string& key, const json& v, const std::string& path) {
      if (key == "method") {
        try {
          cfg.segment.method = parse_segment_method(get_string(v, path));
        } catch (const ValidationError&) {
          fail(path, "expected \"fixed\" or \"cycle\"");
        }
      }
      if (key == "seconds") cfg.segment.seconds = get_number(v, path);
      if (key == "sample_rate") cfg.segment.sample_rate = to_int(get_integer(v, path), path);
      if (key == "cycles") cfg.cycles_per_chunk = to_int(get_integer(v, path), path);
    });
  }
  if (doc.contains("features")) {
    const auto& sec = doc["features"];
    check_object(sec, "features", {"n_mels", "fft_size", "hop_length", "log_floor_db"});
    each(sec, "features", [&](const std::string& key, const json& v, const std::string& path) {
      auto opt_int = [&]() -> std::optional<int> {
        if (v.is_null()) return std::nullopt;
        return to_int(get_integer(v, path), path);
      };
      if (key == "n_mels") cfg.n_mels = opt_int();
      if (key == "fft_size") cfg.fft_size = opt_int();
      if (key == "hop_length") cfg.hop_length = opt_int();
      if (key == "log_floor_db") cfg.log_floor_db = get_number(v, path);
    });
  }
  if (doc.contains("augment")) {
    const auto& sec = doc["augment"];
    check_object(sec, "augment",
                 {"enabled", "copies", "probability", "max_mute_fraction", "max_semitones", "max_mask_area_fraction"});
    each(sec, "augment", [&](const std::string& key, const json& v, const std::string& path) {
      if (key == "enabled") cfg.augment_enabled = get_bool(v, path);
      if (key == "copies") cfg.augment_copies = to_int(get_integer(v, path), path);
      if (key == "probability") cfg.augment.probability_each = get_number(v, path);
      if (key == "max_mute_fraction") cfg.augment.max_mute_fraction = get_number(v, path);
      if (key == "max_semitones") cfg.augment.max_semitones = get_number(v, path);
      if (key == "max_mask_area_fraction") cfg.augment.max_mask_area_fraction = get_number(v, path);
    });
  }
  if (doc.contains("knn")) {
    const auto& sec = doc["knn"];
    check_object(sec, "knn", {"k", "threshold", "metric", "weighting"});
    each(sec, "knn", [&](const std::string& key, const json& v, const std::string& path) {
      if (key == "k") cfg.knn.k = to_int(get_integer(v, path), path);
      if (key == "threshold") cfg.knn.threshold = get_number(v, path);
      if (key == "metric" && get_string(v, path) != "euclidean") fail(path, "only \"euclidean\" is supported");
      if (key == "weighting" && get_string(v, path) != "uniform") fail(path, "only \"uniform\" is supported");
    });
  }
  if (doc.contains("cv")) {
    const auto& sec = doc["cv"];
    check_object(sec, "cv", {"folds", "aggregation"});
    each(sec, "cv", [&](const std::string& key, const json& v, const std::string& path) {
      if (key == "folds") cfg.n_folds = to_int(get_integer(v, path), path);
      if (key == "aggregation") {
        try {
          cfg.aggregation = parse_aggregation(get_string(v, path));
        } catch (const ValidationError&) {
          fail(path, "expected \"per-chunk\" or \"per-recording\"");
        }
      }
    });
  }
  cfg.segment.n_cycles = cfg.cycles_per_chunk;
  cfg.bandpass.sample_rate = cfg.segment.sample_rate;
}

PipelineConfig load_config(const std::filesystem::path& path, const std::string& fallback_preset) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": invalid JSON: " + e.what());
  }
  std::string preset = fallback_preset;
  if (doc.is_object() && doc.contains("preset")) preset = get_string(doc["preset"], "preset");
  PipelineConfig cfg = preset_config(preset);
  apply_json(cfg, doc);
  return cfg;
}

void PipelineConfig::validate() const {
  auto wrap = [](const std::string& path, auto&& fn) {
    try {
      fn();
    } catch (const ValidationError& e) {
      fail(path, e.what());
    }
  };
  if (std::find(preset_names().begin(), preset_names().end(), preset) == preset_names().end()) {
    fail("preset", "unknown preset '" + preset + "'");
  }
  if (segment.sample_rate <= 0) fail("segment.sample_rate", "must be positive");
  if (!(segment.seconds > 0.0)) fail("segment.seconds", "must be positive");
  if (cycles_per_chunk < 1) fail("segment.cycles", "must be at least 1");
  wrap("segment", [&] { segment_config(segment.method).validate(); });
  wrap("preprocess", [&] { design_bandpass(bandpass); });
  wrap("features", [&] {
    feature_config(SegmentMethod::Fixed).validate();
    feature_config(SegmentMethod::Cycle).validate();
  });
  if (augment_copies < 0) fail("augment.copies", "must be nonnegative");
  wrap("augment", [&] { augment.validate(); });
  if (knn.k < 1) fail("knn.k", "must be at least 1");
  if (!(knn.threshold >= 0.0 && knn.threshold <= 1.0)) fail("knn.threshold", "must lie in [0, 1]");
  if (n_folds < 2) fail("cv.folds", "must be at least 2");
}

}  // namespace pcgkit::pipeline
