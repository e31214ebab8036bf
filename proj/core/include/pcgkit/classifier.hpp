#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pcgkit/types.hpp"

namespace pcgkit {

enum class DistanceMetric { Euclidean };
enum class NeighborWeighting { Uniform };

struct KnnConfig {
  int k = 5;
  DistanceMetric metric = DistanceMetric::Euclidean;
  NeighborWeighting weighting = NeighborWeighting::Uniform;
  double threshold = 0.5;

  void validate() const;
};

struct Prediction {
  std::string id;
  double score = 0.0;  // fraction of positive neighbours
  int label = 0;       // 1 iff score >= threshold
};

// Exact k-nearest-neighbour model. Stores every training point verbatim and
// answers queries by linear scan. Immutable after construction.
class KnnModel {
 public:
  struct Point {
    std::vector<double> vector;
    int label = 0;
    std::string id;
  };

  // Throws ValidationError on a missing label, fewer points than cfg.k,
  // inconsistent dimensions, or an empty training set.
  static KnnModel fit(const std::vector<Embedding>& embeddings,
                      const std::map<std::string, int>& labels, const KnnConfig& cfg);
  static KnnModel from_points(std::vector<Point> points, const KnnConfig& cfg);

  // Positive fraction among the k nearest points. Equal distances are
  // ordered by insertion index.
  double score(std::span<const double> query) const { return score(query, cfg_); }
  Prediction predict(std::span<const double> query, const std::string& id = {}) const {
    return predict(query, cfg_, id);
  }

  // Same, with k and threshold taken from `cfg` instead of the fit-time
  // configuration. Throws ValidationError if cfg.k exceeds size() or the
  // query dimension differs.
  double score(std::span<const double> query, const KnnConfig& cfg) const;
  Prediction predict(std::span<const double> query, const KnnConfig& cfg,
                     const std::string& id = {}) const;

  // Indices of the k nearest points, nearest first.
  std::vector<std::size_t> neighbors(std::span<const double> query, std::size_t k) const;

  std::size_t size() const { return points_.size(); }
  std::size_t dimension() const { return dimension_; }
  const KnnConfig& config() const { return cfg_; }
  const std::vector<Point>& points() const { return points_; }

  // Model file: `# key=value` config lines, then `id,label,v0,...`.
  void save(const std::filesystem::path& path) const;
  static KnnModel load(const std::filesystem::path& path);

 private:
  KnnModel(std::vector<Point> points, KnnConfig cfg, std::size_t dim)
      : points_(std::move(points)), cfg_(cfg), dimension_(dim) {}

  std::vector<Point> points_;
  KnnConfig cfg_;
  std::size_t dimension_ = 0;
};

// Free-function forms mirroring the model methods.
KnnModel knn_fit(const std::vector<Embedding>& embeddings,
                 const std::map<std::string, int>& labels, const KnnConfig& cfg);
double knn_score(const KnnModel& model, std::span<const double> query, const KnnConfig& cfg);
Prediction knn_predict(const KnnModel& model, std::span<const double> query,
                       const KnnConfig& cfg, const std::string& id = {});

}  // namespace pcgkit
