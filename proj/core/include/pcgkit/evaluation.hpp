#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcgkit/classifier.hpp"

namespace pcgkit {

// Positive class = murmur present.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn_ = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn_ + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  std::optional<double> auroc;  // absent when only one class is present
  double mcc = 0.0;
  double f2 = 0.0;
  ConfusionMatrix counts;
};

// Throws ValidationError on length mismatch or empty input.
ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels);

double precision(const ConfusionMatrix& cm);  // 0 when tp + fp == 0
double recall(const ConfusionMatrix& cm);     // 0 when tp + fn == 0
// 5 * P * R / (4 * P + R); 0 when P and R are both 0.
double f2_score(double precision, double recall);
// 0 when any marginal is empty.
double matthews_correlation(const ConfusionMatrix& cm);

// Mann-Whitney form of the ROC area: share of (positive, negative) pairs
// ranked correctly, ties counting one half. Computed from mid-ranks in
// O(n log n). Throws ValidationError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

// Threshold metrics from `cm`, AUROC from scores/labels.
// Throws ValidationError if the counts disagree with the labels or AUROC is
// undefined.
MetricsReport compute_metrics(const ConfusionMatrix& cm, std::span<const double> scores,
                              std::span<const int> labels);

// Like compute_metrics, but leaves auroc empty for single-class input.
MetricsReport compute_metrics_lenient(const ConfusionMatrix& cm, std::span<const double> scores,
                                      std::span<const int> labels);

struct FoldAssignment {
  std::map<std::string, int> fold_of;  // patient_id -> fold
  int n_folds = 10;
  std::uint64_t seed = 0;

  int fold(const std::string& patient_id) const;  // throws if unassigned
};

// Stratified grouped assignment: patients are shuffled within each class,
// positives first and then negatives are dealt round-robin with one running
// counter. Every fold therefore gets floor or ceil of n/n_folds patients, and
// each class is spread within +-1 of perfect stratification.
// Throws ValidationError for n_folds < 2, fewer patients than folds, an
// empty class, or duplicate patient ids.
FoldAssignment make_folds(const std::vector<std::pair<std::string, int>>& patients, int n_folds,
                          std::uint64_t seed);

enum class Aggregation { PerChunk, PerRecordingMeanScore };
std::string to_string(Aggregation aggregation);
Aggregation parse_aggregation(const std::string& token);

// One classifiable unit (a chunk or a whole recording).
struct CvItem {
  std::string id;
  std::string recording_id;
  std::string patient_id;
  int label = 0;
  std::vector<double> vector;
  bool training_only = false;  // augmented copies never enter validation
};

// A patient is positive if any of its items is.
std::vector<std::pair<std::string, int>> patient_labels(const std::vector<CvItem>& items);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

FoldSplit split_fold(const std::vector<CvItem>& items, const FoldAssignment& folds, int fold);

struct FoldReport {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  std::size_t n_validation_patients = 0;
  MetricsReport metrics;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) standard deviation
  std::size_t n = 0;
};

struct CvResult {
  std::vector<FoldReport> folds;
  std::map<std::string, MetricSummary> summary;  // precision, recall, auroc, mcc, f2, tp, fp, fn, tn
  std::vector<int> folds_missing_auroc;
};

MetricSummary summarize(std::span<const double> values);

// Fits on out-of-fold items, scores in-fold items, optionally averages
// scores per recording before thresholding. Folds whose validation labels
// are single-class get no AUROC and are left out of its mean.
// Throws ValidationError if a patient has no fold or a training split is
// smaller than k.
CvResult run_cv(const std::vector<CvItem>& items, const KnnConfig& knn,
                const FoldAssignment& folds, Aggregation aggregation);

}  // namespace pcgkit
