#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/evaluation.hpp"
#include "pcgkit/report.hpp"
#include "pcgkit/rng.hpp"
#include "temp_dir.hpp"

namespace pcgkit {
namespace {

TEST(ConfusionMatrixTest, Examples) {
  EXPECT_EQ(confusion_matrix(std::vector<int>{1, 0, 1}, std::vector<int>{1, 0, 1}), (ConfusionMatrix{2, 0, 0, 1}));
  EXPECT_EQ(confusion_matrix(std::vector<int>{0, 0, 0}, std::vector<int>{1, 1, 0}), (ConfusionMatrix{0, 0, 2, 1}));
  EXPECT_EQ(confusion_matrix(std::vector<int>{1, 1, 1, 0, 0, 0, 0, 0, 1, 0}, std::vector<int>{1, 1, 0, 1, 1, 0, 0, 0, 1, 0}),
            (ConfusionMatrix{3, 1, 2, 4}));
  EXPECT_THROW(confusion_matrix(std::vector<int>{1}, std::vector<int>{1, 0}), ValidationError);
  EXPECT_THROW(confusion_matrix(std::vector<int>{}, std::vector<int>{}), ValidationError);
}

TEST(MetricsTest, WorkedCase) {
  const ConfusionMatrix cm{3, 1, 2, 4};
  EXPECT_DOUBLE_EQ(precision(cm), 0.75);
  EXPECT_DOUBLE_EQ(recall(cm), 0.6);
  EXPECT_NEAR(f2_score(0.75, 0.6), 0.625, 1e-12);
  EXPECT_NEAR(matthews_correlation(cm), 10.0 / std::sqrt(600.0), 1e-12);
  EXPECT_NEAR(matthews_correlation(cm), 0.4082, 1e-4);
}

TEST(MetricsTest, PerfectAndDegenerate) {
  const ConfusionMatrix perfect{4, 0, 0, 6};
  EXPECT_EQ(precision(perfect), 1.0);
  EXPECT_EQ(recall(perfect), 1.0);
  EXPECT_EQ(f2_score(1.0, 1.0), 1.0);
  EXPECT_EQ(matthews_correlation(perfect), 1.0);
  const ConfusionMatrix none{0, 0, 4, 6};
  EXPECT_EQ(precision(none), 0.0);
  EXPECT_EQ(recall(none), 0.0);
  EXPECT_EQ(f2_score(0.0, 0.0), 0.0);
  EXPECT_EQ(matthews_correlation(none), 0.0);
}

TEST(MetricsTest, MatchesDirectDefinitions) {
  Rng rng(401);
  for (int trial = 0; trial < 100; ++trial) {
    ConfusionMatrix cm{static_cast<std::size_t>(rng.integer(0, 50)), static_cast<std::size_t>(rng.integer(0, 50)),
                       static_cast<std::size_t>(rng.integer(0, 50)), static_cast<std::size_t>(rng.integer(0, 50))};
    if (cm.total() == 0) cm.tn = 1;
    const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
    const double fn = static_cast<double>(cm.fn_), tn = static_cast<double>(cm.tn);
    EXPECT_NEAR(matthews_correlation(cm), oracle::mcc_direct(tp, fp, fn, tn), 1e-12);
    EXPECT_NEAR(f2_score(precision(cm), recall(cm)), oracle::f2_direct(tp, fp, fn), 1e-12);
    // Swapping the roles of the classes leaves MCC unchanged.
    EXPECT_NEAR(matthews_correlation(cm), matthews_correlation({cm.tn, cm.fn_, cm.fp, cm.tp}), 1e-12);
    const double m = matthews_correlation(cm);
    EXPECT_GE(m, -1.0);
    EXPECT_LE(m, 1.0);
    // F2 weights recall: above F1 when recall exceeds precision.
    const double p = precision(cm), r = recall(cm);
    if (r > p && p > 0.0) EXPECT_GT(f2_score(p, r), 2.0 * p * r / (p + r));
  }
}

TEST(AurocTest, Examples) {
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1}), 0.75);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, std::vector<int>{0, 1, 0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(auroc(std::vector<double>{0.1, 0.2, 0.9, 0.8}, std::vector<int>{0, 0, 1, 1}), 1.0);
  EXPECT_THROW(auroc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);
}

TEST(AurocTest, MatchesPairCountingAndIsRankInvariant) {
  Rng rng(403);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(2, 200));
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = trial % 2 ? static_cast<double>(rng.integer(0, 5)) / 5.0 : rng.uniform();
      labels[i] = rng.bernoulli(0.3) ? 1 : 0;
    }
    labels[0] = 1;
    labels[1] = 0;
    const double a = auroc(scores, labels);
    EXPECT_NEAR(a, oracle::pairwise_auroc(scores, labels), 1e-12);
    std::vector<double> warped(n);
    for (std::size_t i = 0; i < n; ++i) warped[i] = std::exp(3.0 * scores[i]) - 7.0;
    EXPECT_NEAR(auroc(warped, labels), a, 1e-12);
  }
}

TEST(ComputeMetricsTest, ReportAndSingleClass) {
  const std::vector<double> scores{0.9, 0.8, 0.2, 0.7, 0.1, 0.3, 0.2, 0.1, 0.6, 0.4};
  const std::vector<int> preds{1, 1, 1, 0, 0, 0, 0, 0, 1, 0};
  const std::vector<int> labels{1, 1, 0, 1, 1, 0, 0, 0, 1, 0};
  const auto cm = confusion_matrix(preds, labels);
  const auto report = compute_metrics(cm, scores, labels);
  EXPECT_DOUBLE_EQ(report.f2, 0.625);
  ASSERT_TRUE(report.auroc.has_value());
  EXPECT_NEAR(*report.auroc, oracle::pairwise_auroc(scores, labels), 1e-12);
  const std::vector<int> ones(3, 1);
  const std::vector<double> s3{0.1, 0.5, 0.9};
  const auto cm1 = confusion_matrix(ones, ones);
  EXPECT_THROW(compute_metrics(cm1, s3, ones), ValidationError);
  EXPECT_FALSE(compute_metrics_lenient(cm1, s3, ones).auroc.has_value());
}

std::vector<std::pair<std::string, int>> random_patients(Rng& rng, std::size_t n, double pos_frac) {
  std::vector<std::pair<std::string, int>> patients;
  for (std::size_t i = 0; i < n; ++i) patients.emplace_back("P" + std::to_string(i), rng.bernoulli(pos_frac) ? 1 : 0);
  patients[0].second = 1;
  patients[1].second = 0;
  return patients;
}

TEST(MakeFoldsTest, TwentyPatientsFourPositive) {
  std::vector<std::pair<std::string, int>> patients;
  for (int i = 0; i < 20; ++i) patients.emplace_back("P" + std::to_string(i), i < 4 ? 1 : 0);
  const auto folds = make_folds(patients, 10, 42);
  std::vector<int> per_fold(10, 0);
  std::set<int> positive_folds;
  for (const auto& [id, label] : patients) {
    const int f = folds.fold(id);
    ++per_fold[static_cast<std::size_t>(f)];
    if (label) positive_folds.insert(f);
  }
  for (int c : per_fold) EXPECT_EQ(c, 2);
  EXPECT_EQ(positive_folds.size(), 4u);
  EXPECT_EQ(make_folds(patients, 10, 42).fold_of, folds.fold_of);
}

TEST(MakeFoldsTest, StratifiedWithinOne) {
  Rng rng(405);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = static_cast<std::size_t>(rng.integer(10, 150));
    const auto patients = random_patients(rng, n, rng.uniform(0.1, 0.6));
    const int k = static_cast<int>(rng.integer(2, 10));
    const auto folds = make_folds(patients, k, static_cast<std::uint64_t>(trial));
    std::vector<double> pos(static_cast<std::size_t>(k), 0), neg(static_cast<std::size_t>(k), 0);
    double n_pos = 0;
    for (const auto& [id, label] : patients) {
      (label ? pos : neg)[static_cast<std::size_t>(folds.fold(id))] += 1;
      n_pos += label;
    }
    for (int f = 0; f < k; ++f) {
      EXPECT_LE(std::abs(pos[static_cast<std::size_t>(f)] - n_pos / k), 1.0);
      EXPECT_LE(std::abs(neg[static_cast<std::size_t>(f)] - (static_cast<double>(n) - n_pos) / k), 1.0);
    }
  }
}

TEST(MakeFoldsTest, Errors) {
  std::vector<std::pair<std::string, int>> patients{{"a", 1}, {"b", 0}, {"c", 0}};
  EXPECT_THROW(make_folds(patients, 1, 0), ValidationError);
  EXPECT_THROW(make_folds(patients, 4, 0), ValidationError);
  EXPECT_THROW(make_folds({{"a", 0}, {"b", 0}}, 2, 0), ValidationError);
  EXPECT_THROW(make_folds({{"a", 1}, {"a", 0}, {"b", 0}}, 2, 0), ValidationError);
}

std::vector<CvItem> separable_items(Rng& rng, int n_patients, double separation) {
  std::vector<CvItem> items;
  for (int p = 0; p < n_patients; ++p) {
    const int label = p % 4 == 0 ? 1 : 0;
    for (int r = 0; r < 2; ++r) {
      for (int c = 0; c < 3; ++c) {
        CvItem it;
        it.recording_id = "R" + std::to_string(p) + "_" + std::to_string(r);
        it.id = it.recording_id + "_f" + std::to_string(c);
        it.patient_id = "P" + std::to_string(p);
        it.label = label;
        it.vector = {rng.normal() + separation * label, rng.normal()};
        items.push_back(it);
      }
    }
  }
  return items;
}

TEST(RunCvTest, NoPatientLeakageAndAugmentedRowsStayInTraining) {
  Rng rng(407);
  auto items = separable_items(rng, 40, 4.0);
  CvItem aug = items[0];
  aug.id += "@aug0";
  aug.training_only = true;
  items.push_back(aug);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto folds = make_folds(patient_labels(items), 10, seed);
    for (int f = 0; f < 10; ++f) {
      const auto split = split_fold(items, folds, f);
      std::set<std::string> train_patients;
      for (auto i : split.train) train_patients.insert(items[i].patient_id);
      for (auto i : split.validation) {
        EXPECT_EQ(train_patients.count(items[i].patient_id), 0u);
        EXPECT_FALSE(items[i].training_only);
      }
      EXPECT_EQ(split.train.size() + split.validation.size() + (folds.fold(aug.patient_id) == f ? 1 : 0), items.size());
    }
  }
}

TEST(RunCvTest, SeparableClassesScoreHigh) {
  Rng rng(409);
  const auto items = separable_items(rng, 40, 6.0);
  const auto folds = make_folds(patient_labels(items), 10, 1);
  for (auto agg : {Aggregation::PerChunk, Aggregation::PerRecordingMeanScore}) {
    const auto result = run_cv(items, KnnConfig{}, folds, agg);
    EXPECT_EQ(result.folds.size(), 10u);
    EXPECT_GE(result.summary.at("auroc").mean, 0.95);
    EXPECT_EQ(result.summary.at("auroc").n + result.folds_missing_auroc.size(), 10u);
  }
}

TEST(RunCvTest, ShuffledLabelsScoreNearChance) {
  double total = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    Rng rng(500 + static_cast<std::uint64_t>(s));
    auto items = separable_items(rng, 40, 0.0);
    const auto folds = make_folds(patient_labels(items), 10, static_cast<std::uint64_t>(s));
    total += run_cv(items, KnnConfig{}, folds, Aggregation::PerChunk).summary.at("auroc").mean;
  }
  const double mean = total / seeds;
  EXPECT_GE(mean, 0.4);
  EXPECT_LE(mean, 0.6);
}

TEST(RunCvTest, SingleClassFoldHasNoAuroc) {
  Rng rng(411);
  const auto items = separable_items(rng, 20, 4.0);  // 5 positive patients, 10 folds
  const auto result = run_cv(items, KnnConfig{}, make_folds(patient_labels(items), 10, 3), Aggregation::PerChunk);
  EXPECT_EQ(result.folds_missing_auroc.size(), 5u);
  EXPECT_EQ(result.summary.at("auroc").n, 5u);
}

TEST(SummarizeTest, SampleStd) {
  const auto s = summarize(std::vector<double>{1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-12);
  EXPECT_EQ(s.n, 4u);
  EXPECT_EQ(summarize(std::vector<double>{7.0}).std, 0.0);
}

TEST(ReportTest, DeterministicFiles) {
  Rng rng(413);
  const auto items = separable_items(rng, 40, 3.0);
  const auto folds = make_folds(patient_labels(items), 10, 9);
  const auto result = run_cv(items, KnnConfig{}, folds, Aggregation::PerChunk);
  testing::TempDir a, b;
  write_cv_reports(a.path(), result, {{"seed", 9}});
  write_cv_reports(b.path(), run_cv(items, KnnConfig{}, folds, Aggregation::PerChunk), {{"seed", 9}});
  for (const char* name : {"cv_report.json", "cv_folds.csv", "confusion_matrix.csv"}) {
    std::ifstream fa(a / name), fb(b / name);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {}), sb((std::istreambuf_iterator<char>(fb)), {});
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, sb) << name;
  }
  std::ifstream fj(a / "cv_report.json");
  const auto j = nlohmann::json::parse(fj);
  EXPECT_EQ(j["folds"].size(), 10u);
  EXPECT_TRUE(j.contains("summary"));
  const std::string folds_csv = cv_folds_csv(result);
  const auto lines = std::count(folds_csv.begin(), folds_csv.end(), '\n');
  EXPECT_EQ(lines, 11);
}

}  // namespace
}  // namespace pcgkit
