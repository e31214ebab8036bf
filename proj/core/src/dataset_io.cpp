#include "pcgkit/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "pcgkit/csv.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"

namespace pcgkit {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string resolve(const fs::path& base_dir, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base_dir / path).lexically_normal().string();
}

}  // namespace

std::string to_string(Label label) {
  switch (label) {
    case Label::Present: return "Present";
    case Label::Absent: return "Absent";
    case Label::Unknown: return "Unknown";
  }
  return "Unknown";
}

std::string to_string(AgeGroup group) {
  switch (group) {
    case AgeGroup::Neonate: return "Neonate";
    case AgeGroup::Infant: return "Infant";
    case AgeGroup::Child: return "Child";
    case AgeGroup::Adolescent: return "Adolescent";
    case AgeGroup::Unlabeled: return "Unlabeled";
  }
  return "Unlabeled";
}

std::string to_string(Sex sex) { return sex == Sex::Female ? "Female" : "Male"; }

Label parse_label(const std::string& token) {
  const std::string t = lower(csv::trim(token));
  if (t == "present") return Label::Present;
  if (t == "absent") return Label::Absent;
  if (t == "unknown") return Label::Unknown;
  throw ValidationError("unknown label token '" + token + "'");
}

AgeGroup parse_age_group(const std::string& token) {
  const std::string t = lower(csv::trim(token));
  if (t == "neonate") return AgeGroup::Neonate;
  if (t == "infant") return AgeGroup::Infant;
  if (t == "child") return AgeGroup::Child;
  if (t == "adolescent") return AgeGroup::Adolescent;
  if (t == "unlabeled" || t == "nan") return AgeGroup::Unlabeled;
  throw ValidationError("unknown age group '" + token + "'");
}

Sex parse_sex(const std::string& token) {
  const std::string t = lower(csv::trim(token));
  if (t == "female") return Sex::Female;
  if (t == "male") return Sex::Male;
  throw ValidationError("unknown sex '" + token + "'");
}

std::vector<RecordingMeta> load_manifest(const fs::path& path, bool exclude_unknown) {
  if (!fs::exists(path)) throw IoError("manifest not found: " + path.string());
  const auto lines = csv::read_lines(path.string());
  if (lines.empty() || csv::trim(lines.front()) != kManifestHeader) {
    throw ValidationError(path.string() + ": header must be '" + std::string(kManifestHeader) + "'");
  }
  const fs::path base = path.parent_path();
  std::vector<RecordingMeta> rows;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto f = csv::split(lines[i]);
    if (f.size() != 7) {
      throw ValidationError(where + ": expected 7 columns, got " + std::to_string(f.size()));
    }
    RecordingMeta meta;
    meta.recording_id = std::string(csv::trim(f[0]));
    meta.patient_id = std::string(csv::trim(f[1]));
    if (meta.recording_id.empty()) throw ValidationError(where + ": empty recording_id");
    if (meta.patient_id.empty()) throw ValidationError(where + ": empty patient_id");
    meta.wav_path = resolve(base, std::string(csv::trim(f[2])));
    if (const auto seg = std::string(csv::trim(f[3])); !seg.empty()) meta.seg_path = resolve(base, seg);
    try {
      meta.label = parse_label(f[4]);
      if (!csv::trim(f[5]).empty()) meta.age_group = parse_age_group(f[5]);
      if (!csv::trim(f[6]).empty()) meta.sex = parse_sex(f[6]);
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
    if (!seen.insert(meta.recording_id).second) {
      throw ValidationError(where + ": duplicate recording_id '" + meta.recording_id + "'");
    }
    if (exclude_unknown && meta.label == Label::Unknown) continue;
    rows.push_back(std::move(meta));
  }
  return rows;
}

void write_manifest(const fs::path& path, const std::vector<RecordingMeta>& rows) {
  std::ostringstream out;
  out << kManifestHeader << '\n';
  for (const auto& r : rows) {
    out << r.recording_id << ',' << r.patient_id << ',' << r.wav_path << ','
        << r.seg_path.value_or("") << ',' << to_string(r.label) << ','
        << (r.age_group ? to_string(*r.age_group) : "") << ','
        << (r.sex ? to_string(*r.sex) : "") << '\n';
  }
  atomic_write_file(path, out.str());
}

void validate_track(SegmentationTrack& track) {
  auto& iv = track.intervals;
  std::stable_sort(iv.begin(), iv.end(),
                   [](const StateInterval& a, const StateInterval& b) { return a.onset < b.onset; });
  for (std::size_t i = 0; i < iv.size(); ++i) {
    if (!(iv[i].onset < iv[i].offset)) {
      throw ValidationError("interval " + std::to_string(i) + " has onset >= offset");
    }
    if (iv[i].state < 0 || iv[i].state > 4) {
      throw ValidationError("state " + std::to_string(iv[i].state) + " outside 0..4");
    }
    if (i > 0 && iv[i].onset < iv[i - 1].offset) {
      throw ValidationError("overlapping intervals at onset " + csv::format_double(iv[i].onset));
    }
  }
}

SegmentationTrack parse_segmentation(const std::string& text) {
  SegmentationTrack track;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_whitespace(csv::trim(line));
    const std::string where = "line " + std::to_string(lineno);
    if (f.size() != 3) throw ValidationError(where + ": expected 3 fields");
    StateInterval iv;
    iv.onset = csv::parse_double(f[0], where + " onset");
    iv.offset = csv::parse_double(f[1], where + " offset");
    const long long state = csv::parse_int(f[2], where + " state");
    if (state < 0 || state > 4) throw ValidationError(where + ": state " + f[2] + " outside 0..4");
    if (!std::isfinite(iv.onset) || !std::isfinite(iv.offset)) {
      throw ValidationError(where + ": non-finite time");
    }
    iv.state = static_cast<int>(state);
    track.intervals.push_back(iv);
  }
  validate_track(track);
  return track;
}

SegmentationTrack load_segmentation(const fs::path& path) {
  if (!fs::exists(path)) throw IoError("segmentation file not found: " + path.string());
  try {
    return parse_segmentation(read_file(path));
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_segmentation(const fs::path& path, const SegmentationTrack& track) {
  std::ostringstream out;
  for (const auto& iv : track.intervals) {
    out << csv::format_double(iv.onset) << '\t' << csv::format_double(iv.offset) << '\t'
        << iv.state << '\n';
  }
  atomic_write_file(path, out.str());
}

std::vector<double> extract_s1_onsets(const SegmentationTrack& track) {
  std::vector<double> onsets;
  for (const auto& iv : track.intervals) {
    if (iv.state != static_cast<int>(HeartState::S1)) continue;
    if (onsets.empty() || iv.onset > onsets.back()) onsets.push_back(iv.onset);
  }
  return onsets;
}

std::size_t count_s1_cycles(const SegmentationTrack& track) {
  const auto n = extract_s1_onsets(track).size();
  return n > 0 ? n - 1 : 0;
}

std::vector<Embedding> load_embeddings(const fs::path& path) {
  const auto lines = csv::read_lines(path.string());
  std::vector<Embedding> rows;
  std::set<std::string> ids;
  std::size_t dim = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const auto f = csv::split(lines[i]);
    if (rows.empty() && f.size() >= 2 && csv::trim(f[0]) == "id" && csv::trim(f[1]) == "v0") continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (f.size() < 2) throw ValidationError(where + ": row has no vector values");
    Embedding e;
    e.id = std::string(csv::trim(f[0]));
    if (e.id.empty()) throw ValidationError(where + ": empty id");
    e.vector.reserve(f.size() - 1);
    for (std::size_t j = 1; j < f.size(); ++j) {
      const double v = csv::parse_double(f[j], where);
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
      e.vector.push_back(v);
    }
    if (rows.empty()) {
      dim = e.vector.size();
    } else if (e.vector.size() != dim) {
      throw ValidationError(where + ": dimension " + std::to_string(e.vector.size()) +
                            " differs from " + std::to_string(dim));
    }
    if (!ids.insert(e.id).second) throw ValidationError(where + ": duplicate id '" + e.id + "'");
    rows.push_back(std::move(e));
  }
  return rows;
}

void write_embeddings(const fs::path& path, const std::vector<Embedding>& rows) {
  std::string out = "id";
  const std::size_t dim = rows.empty() ? 0 : rows.front().vector.size();
  for (std::size_t j = 0; j < dim; ++j) out += ",v" + std::to_string(j);
  out += '\n';
  for (const auto& e : rows) {
    if (e.vector.size() != dim) throw ValidationError("write_embeddings: mixed dimensions");
    out += e.id;
    for (double v : e.vector) {
      out += ',';
      out += csv::format_double(v);
    }
    out += '\n';
  }
  atomic_write_file(path, out);
}

std::map<std::string, int> load_labels(const fs::path& path) {
  const auto lines = csv::read_lines(path.string());
  if (!lines.empty() && csv::trim(lines.front()) == kManifestHeader) {
    std::map<std::string, int> out;
    for (const auto& row : load_manifest(path, true)) out[row.recording_id] = row.positive() ? 1 : 0;
    return out;
  }
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (csv::trim(lines[i]).empty()) continue;
    const auto f = csv::split(lines[i]);
    if (i == 0 && !f.empty() && csv::trim(f[0]) == "id") continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (f.size() < 2) throw ValidationError(where + ": expected id,label");
    const std::string token(csv::trim(f[1]));
    int label;
    if (token == "0" || token == "1") {
      label = token == "1" ? 1 : 0;
    } else {
      const Label l = parse_label(token);
      if (l == Label::Unknown) continue;
      label = l == Label::Present ? 1 : 0;
    }
    if (!out.emplace(std::string(csv::trim(f[0])), label).second) {
      throw ValidationError(where + ": duplicate id");
    }
  }
  return out;
}

}  // namespace pcgkit
