#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

inline constexpr const char* kManifestHeader =
    "recording_id,patient_id,wav_path,seg_path,label,age_group,sex";

// Loads a recording manifest. Relative wav/seg paths are resolved against
// the manifest's directory. Unknown-labeled rows are dropped when
// `exclude_unknown` is set.
//
// Throws IoError if the file is missing; ValidationError on a bad header,
// wrong column count, unknown label token or duplicate recording_id.
std::vector<RecordingMeta> load_manifest(const std::filesystem::path& path,
                                         bool exclude_unknown = true);

// Writes rows verbatim (paths are not relativized).
void write_manifest(const std::filesystem::path& path, const std::vector<RecordingMeta>& rows);

// Parses a three-column (onset, offset, state) annotation file. Columns are
// tab separated; other whitespace is tolerated. The result is sorted by
// onset. Throws ValidationError on non-numeric fields, states outside 0..4,
// onset >= offset, or overlapping intervals.
SegmentationTrack load_segmentation(const std::filesystem::path& path);
SegmentationTrack parse_segmentation(const std::string& text);
void write_segmentation(const std::filesystem::path& path, const SegmentationTrack& track);

// Sorts and validates intervals in place.
void validate_track(SegmentationTrack& track);

// Onset of every S1 interval, strictly increasing. The onset is used as the
// cycle delimiter because annotations carry intervals, not peak positions.
std::vector<double> extract_s1_onsets(const SegmentationTrack& track);

// Number of S1-to-S1 cycles delimited by consecutive annotated onsets.
std::size_t count_s1_cycles(const SegmentationTrack& track);

// Embedding CSV: optional header `id,v0,...,v{D-1}` then one row per vector.
// Throws ValidationError on dimension mismatch, duplicate id or non-finite
// values.
std::vector<Embedding> load_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const std::vector<Embedding>& rows);

// Two-column label file `id,label` (label 0/1 or Present/Absent). Extra
// columns are ignored. A recording manifest is accepted as well.
std::map<std::string, int> load_labels(const std::filesystem::path& path);

}  // namespace pcgkit
