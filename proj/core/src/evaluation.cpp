#include "pcgkit/evaluation.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "pcgkit/error.hpp"
#include "pcgkit/rng.hpp"

namespace pcgkit {

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw ValidationError("confusion_matrix: length mismatch");
  if (labels.empty()) throw ValidationError("confusion_matrix: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0, y = labels[i] != 0;
    if (p && y) ++cm.tp;
    else if (p) ++cm.fp;
    else if (y) ++cm.fn_;
    else ++cm.tn;
  }
  return cm;
}

double precision(const ConfusionMatrix& cm) {
  const std::size_t d = cm.tp + cm.fp;
  return d == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(d);
}

double recall(const ConfusionMatrix& cm) {
  const std::size_t d = cm.tp + cm.fn_;
  return d == 0 ? 0.0 : static_cast<double>(cm.tp) / static_cast<double>(d);
}

double f2_score(double p, double r) {
  const double d = 4.0 * p + r;
  return d == 0.0 ? 0.0 : 5.0 * p * r / d;
}

double matthews_correlation(const ConfusionMatrix& cm) {
  const auto tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const auto fn = static_cast<double>(cm.fn_), tn = static_cast<double>(cm.tn);
  const double a = tp + fp, b = tp + fn, c = tn + fp, d = tn + fn;
  if (a == 0.0 || b == 0.0 || c == 0.0 || d == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(a * b * c * d);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("auroc: length mismatch");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y != 0 ? 1 : 0;
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ValidationError("auroc: undefined unless both classes are present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of 1-based mid-ranks of the positives.
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] != 0) rank_sum += mid_rank;
    }
    i = j;
  }
  const auto p = static_cast<double>(n_pos), n = static_cast<double>(n_neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

namespace {

MetricsReport threshold_metrics(const ConfusionMatrix& cm, std::span<const double> scores,
                                std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("compute_metrics: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (int y : labels) n_pos += y != 0 ? 1 : 0;
  if (cm.total() != labels.size() || cm.tp + cm.fn_ != n_pos) {
    throw ValidationError("compute_metrics: confusion matrix is inconsistent with labels");
  }
  MetricsReport r;
  r.counts = cm;
  r.precision = precision(cm);
  r.recall = recall(cm);
  r.f2 = f2_score(r.precision, r.recall);
  r.mcc = matthews_correlation(cm);
  return r;
}

}  // namespace

MetricsReport compute_metrics(const ConfusionMatrix& cm, std::span<const double> scores,
                              std::span<const int> labels) {
  MetricsReport r = threshold_metrics(cm, scores, labels);
  r.auroc = auroc(scores, labels);
  return r;
}

MetricsReport compute_metrics_lenient(const ConfusionMatrix& cm, std::span<const double> scores,
                                      std::span<const int> labels) {
  MetricsReport r = threshold_metrics(cm, scores, labels);
  const bool has_pos = cm.tp + cm.fn_ > 0, has_neg = cm.fp + cm.tn > 0;
  if (has_pos && has_neg) r.auroc = auroc(scores, labels);
  return r;
}

int FoldAssignment::fold(const std::string& patient_id) const {
  const auto it = fold_of.find(patient_id);
  if (it == fold_of.end()) throw ValidationError("patient '" + patient_id + "' has no fold assignment");
  return it->second;
}

FoldAssignment make_folds(const std::vector<std::pair<std::string, int>>& patients, int n_folds,
                          std::uint64_t seed) {
  if (n_folds < 2) throw ValidationError("make_folds: n_folds must be at least 2");
  if (patients.size() < static_cast<std::size_t>(n_folds)) {
    throw ValidationError("make_folds: " + std::to_string(patients.size()) + " patients cannot fill " +
                          std::to_string(n_folds) + " folds");
  }
  auto sorted = patients;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::string> pos, neg;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i].first == sorted[i - 1].first) {
      throw ValidationError("make_folds: duplicate patient '" + sorted[i].first + "'");
    }
    (sorted[i].second != 0 ? pos : neg).push_back(sorted[i].first);
  }
  if (pos.empty() || neg.empty()) throw ValidationError("make_folds: both classes need at least one patient");

  Rng rng(seed);
  rng.shuffle(pos);
  rng.shuffle(neg);
  FoldAssignment out;
  out.n_folds = n_folds;
  out.seed = seed;
  std::size_t counter = 0;
  for (const auto* group : {&pos, &neg}) {
    for (const auto& id : *group) out.fold_of[id] = static_cast<int>(counter++ % static_cast<std::size_t>(n_folds));
  }
  return out;
}

std::string to_string(Aggregation aggregation) {
  return aggregation == Aggregation::PerChunk ? "per-chunk" : "per-recording";
}

Aggregation parse_aggregation(const std::string& token) {
  if (token == "per-chunk") return Aggregation::PerChunk;
  if (token == "per-recording") return Aggregation::PerRecordingMeanScore;
  throw ValidationError("aggregation must be 'per-chunk' or 'per-recording', got '" + token + "'");
}

std::vector<std::pair<std::string, int>> patient_labels(const std::vector<CvItem>& items) {
  std::map<std::string, int> by_patient;
  for (const auto& item : items) {
    auto& label = by_patient[item.patient_id];
    label = std::max(label, item.label != 0 ? 1 : 0);
  }
  return {by_patient.begin(), by_patient.end()};
}

FoldSplit split_fold(const std::vector<CvItem>& items, const FoldAssignment& folds, int fold) {
  FoldSplit split;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (folds.fold(items[i].patient_id) != fold) {
      split.train.push_back(i);
    } else if (!items[i].training_only) {
      split.validation.push_back(i);
    }
  }
  return split;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.n = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

CvResult run_cv(const std::vector<CvItem>& items, const KnnConfig& knn, const FoldAssignment& folds,
                Aggregation aggregation) {
  knn.validate();
  CvResult result;
  for (int fold = 0; fold < folds.n_folds; ++fold) {
    const FoldSplit split = split_fold(items, folds, fold);
    if (split.validation.empty()) {
      spdlog::warn("fold {} has no validation items; skipped", fold);
      continue;
    }
    std::vector<KnnModel::Point> train;
    train.reserve(split.train.size());
    for (std::size_t i : split.train) train.push_back({items[i].vector, items[i].label, items[i].id});
    const KnnModel model = KnnModel::from_points(std::move(train), knn);

    std::vector<double> scores;
    std::vector<int> labels;
    std::set<std::string> val_patients;
    if (aggregation == Aggregation::PerChunk) {
      for (std::size_t i : split.validation) {
        scores.push_back(model.score(items[i].vector));
        labels.push_back(items[i].label);
        val_patients.insert(items[i].patient_id);
      }
    } else {
      std::vector<std::string> order;
      std::map<std::string, std::pair<double, std::size_t>> sums;
      std::map<std::string, int> rec_label;
      for (std::size_t i : split.validation) {
        const auto& rec = items[i].recording_id;
        if (!sums.contains(rec)) order.push_back(rec);
        auto& [sum, count] = sums[rec];
        sum += model.score(items[i].vector);
        ++count;
        rec_label[rec] = std::max(rec_label[rec], items[i].label);
        val_patients.insert(items[i].patient_id);
      }
      for (const auto& rec : order) {
        scores.push_back(sums[rec].first / static_cast<double>(sums[rec].second));
        labels.push_back(rec_label[rec]);
      }
    }
    std::vector<int> preds(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] >= knn.threshold ? 1 : 0;

    FoldReport report;
    report.fold = fold;
    report.n_train = split.train.size();
    report.n_validation = scores.size();
    report.n_validation_patients = val_patients.size();
    report.metrics = compute_metrics_lenient(confusion_matrix(preds, labels), scores, labels);
    if (!report.metrics.auroc) {
      spdlog::warn("fold {} validation labels are single-class; AUROC excluded from the mean", fold);
      result.folds_missing_auroc.push_back(fold);
    }
    result.folds.push_back(std::move(report));
  }

  auto collect = [&](auto getter) {
    std::vector<double> v;
    for (const auto& f : result.folds) {
      if (auto x = getter(f.metrics)) v.push_back(*x);
    }
    return summarize(v);
  };
  using Opt = std::optional<double>;
  result.summary["precision"] = collect([](const MetricsReport& m) -> Opt { return m.precision; });
  result.summary["recall"] = collect([](const MetricsReport& m) -> Opt { return m.recall; });
  result.summary["auroc"] = collect([](const MetricsReport& m) -> Opt { return m.auroc; });
  result.summary["mcc"] = collect([](const MetricsReport& m) -> Opt { return m.mcc; });
  result.summary["f2"] = collect([](const MetricsReport& m) -> Opt { return m.f2; });
  result.summary["tp"] = collect([](const MetricsReport& m) -> Opt { return static_cast<double>(m.counts.tp); });
  result.summary["fp"] = collect([](const MetricsReport& m) -> Opt { return static_cast<double>(m.counts.fp); });
  result.summary["fn"] = collect([](const MetricsReport& m) -> Opt { return static_cast<double>(m.counts.fn_); });
  result.summary["tn"] = collect([](const MetricsReport& m) -> Opt { return static_cast<double>(m.counts.tn); });
  return result;
}

}  // namespace pcgkit
