#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace pcgkit {

// Mono signal. Amplitudes are dimensionless.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 0;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class Label { Present, Absent, Unknown };
enum class AgeGroup { Neonate, Infant, Child, Adolescent, Unlabeled };
enum class Sex { Female, Male };

struct RecordingMeta {
  std::string recording_id;
  std::string patient_id;
  std::string wav_path;
  std::optional<std::string> seg_path;
  Label label = Label::Unknown;
  std::optional<AgeGroup> age_group;
  std::optional<Sex> sex;

  bool positive() const { return label == Label::Present; }
};

// Heart-cycle phase states as they appear in annotation files.
enum class HeartState : int { Unannotated = 0, S1 = 1, Systole = 2, S2 = 3, Diastole = 4 };

struct StateInterval {
  double onset = 0.0;   // seconds
  double offset = 0.0;  // seconds
  int state = 0;

  bool operator==(const StateInterval&) const = default;
};

// Sorted, non-overlapping annotated intervals of one recording.
struct SegmentationTrack {
  std::vector<StateInterval> intervals;
};

struct Embedding {
  std::string id;
  std::vector<double> vector;
};

std::string to_string(Label label);
std::string to_string(AgeGroup group);
std::string to_string(Sex sex);

// Throw ValidationError on an unrecognized token.
Label parse_label(const std::string& token);
AgeGroup parse_age_group(const std::string& token);
Sex parse_sex(const std::string& token);

}  // namespace pcgkit
