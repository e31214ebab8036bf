#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pcgkit/evaluation.hpp"

namespace pcgkit {

nlohmann::json to_json(const MetricsReport& report);
nlohmann::json to_json(const CvResult& result);

// One row per fold: fold,n_train,n_validation,precision,recall,auroc,mcc,f2,tp,fp,fn,tn
std::string cv_folds_csv(const CvResult& result);

// Mean and std of each confusion-matrix cell across folds:
// actual,predicted,mean,std
std::string confusion_matrix_csv(const CvResult& result);

// Writes cv_report.json, cv_folds.csv and confusion_matrix.csv into `dir`.
void write_cv_reports(const std::filesystem::path& dir, const CvResult& result,
                      const nlohmann::json& extra = nlohmann::json::object());

}  // namespace pcgkit
