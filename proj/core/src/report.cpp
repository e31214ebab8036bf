#include "pcgkit/report.hpp"

#include <sstream>

#include "pcgkit/csv.hpp"
#include "pcgkit/io_util.hpp"

namespace pcgkit {

using nlohmann::json;

json to_json(const MetricsReport& report) {
  return json{
      {"precision", report.precision},
      {"recall", report.recall},
      {"auroc", report.auroc ? json(*report.auroc) : json(nullptr)},
      {"mcc", report.mcc},
      {"f2", report.f2},
      {"confusion", {{"tp", report.counts.tp}, {"fp", report.counts.fp},
                     {"fn", report.counts.fn_}, {"tn", report.counts.tn}}},
  };
}

json to_json(const CvResult& result) {
  json folds = json::array();
  for (const auto& f : result.folds) {
    folds.push_back({{"fold", f.fold},
                     {"n_train", f.n_train},
                     {"n_validation", f.n_validation},
                     {"n_validation_patients", f.n_validation_patients},
                     {"metrics", to_json(f.metrics)}});
  }
  json summary = json::object();
  for (const auto& [name, s] : result.summary) {
    summary[name] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
  }
  return json{{"folds", folds}, {"summary", summary}, {"folds_missing_auroc", result.folds_missing_auroc}};
}

std::string cv_folds_csv(const CvResult& result) {
  std::ostringstream out;
  out << "fold,n_train,n_validation,precision,recall,auroc,mcc,f2,tp,fp,fn,tn\n";
  for (const auto& f : result.folds) {
    const auto& m = f.metrics;
    out << f.fold << ',' << f.n_train << ',' << f.n_validation << ',' << csv::format_double(m.precision) << ','
        << csv::format_double(m.recall) << ',' << (m.auroc ? csv::format_double(*m.auroc) : "") << ','
        << csv::format_double(m.mcc) << ',' << csv::format_double(m.f2) << ',' << m.counts.tp << ','
        << m.counts.fp << ',' << m.counts.fn_ << ',' << m.counts.tn << '\n';
  }
  return out.str();
}

std::string confusion_matrix_csv(const CvResult& result) {
  std::ostringstream out;
  out << "actual,predicted,mean,std\n";
  const struct {
    const char* actual;
    const char* predicted;
    const char* key;
  } cells[] = {{"present", "present", "tp"}, {"present", "absent", "fn"},
               {"absent", "present", "fp"}, {"absent", "absent", "tn"}};
  for (const auto& c : cells) {
    const auto it = result.summary.find(c.key);
    const MetricSummary s = it == result.summary.end() ? MetricSummary{} : it->second;
    out << c.actual << ',' << c.predicted << ',' << csv::format_double(s.mean) << ','
        << csv::format_double(s.std) << '\n';
  }
  return out.str();
}

void write_cv_reports(const std::filesystem::path& dir, const CvResult& result, const json& extra) {
  json doc = to_json(result);
  for (const auto& [key, value] : extra.items()) doc[key] = value;
  atomic_write_file(dir / "cv_report.json", doc.dump(2) + "\n");
  atomic_write_file(dir / "cv_folds.csv", cv_folds_csv(result));
  atomic_write_file(dir / "confusion_matrix.csv", confusion_matrix_csv(result));
}

}  // namespace pcgkit
