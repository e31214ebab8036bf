#include "pcgkit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pcgkit/csv.hpp"
#include "pcgkit/error.hpp"
#include "pcgkit/io_util.hpp"

namespace pcgkit {

void KnnConfig::validate() const {
  if (k < 1) throw ValidationError("knn k must be at least 1");
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw ValidationError("knn threshold must be in [0, 1]");
}

KnnModel KnnModel::from_points(std::vector<Point> points, const KnnConfig& cfg) {
  cfg.validate();
  if (points.empty()) throw ValidationError("knn: empty training set");
  if (points.size() < static_cast<std::size_t>(cfg.k)) {
    throw ValidationError("knn: " + std::to_string(points.size()) + " training points but k = " +
                          std::to_string(cfg.k));
  }
  const std::size_t dim = points.front().vector.size();
  for (const auto& p : points) {
    if (p.vector.size() != dim) {
      throw ValidationError("knn: point '" + p.id + "' has dimension " + std::to_string(p.vector.size()) +
                            ", expected " + std::to_string(dim));
    }
    if (p.label != 0 && p.label != 1) throw ValidationError("knn: label of '" + p.id + "' must be 0 or 1");
  }
  return KnnModel(std::move(points), cfg, dim);
}

KnnModel KnnModel::fit(const std::vector<Embedding>& embeddings, const std::map<std::string, int>& labels,
                       const KnnConfig& cfg) {
  std::vector<Point> points;
  points.reserve(embeddings.size());
  for (const auto& e : embeddings) {
    const auto it = labels.find(e.id);
    if (it == labels.end()) throw ValidationError("knn: no label for embedding '" + e.id + "'");
    points.push_back(Point{e.vector, it->second, e.id});
  }
  return from_points(std::move(points), cfg);
}

std::vector<std::size_t> KnnModel::neighbors(std::span<const double> query, std::size_t k) const {
  if (query.size() != dimension_) {
    throw ValidationError("knn: query dimension " + std::to_string(query.size()) + " differs from model " +
                          std::to_string(dimension_));
  }
  if (k < 1 || k > points_.size()) {
    throw ValidationError("knn: k = " + std::to_string(k) + " outside [1, " + std::to_string(points_.size()) + "]");
  }
  // (distance, insertion index) ordered lexicographically, so equal
  // distances resolve to the earlier point.
  std::vector<std::pair<double, std::size_t>> dist(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const auto& v = points_[i].vector;
    double acc = 0.0;
    for (std::size_t d = 0; d < dimension_; ++d) {
      const double diff = v[d] - query[d];
      acc += diff * diff;
    }
    dist[i] = {std::sqrt(acc), i};
  }
  const auto kth = dist.begin() + static_cast<std::ptrdiff_t>(k);
  std::partial_sort(dist.begin(), kth, dist.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (auto it = dist.begin(); it != kth; ++it) out.push_back(it->second);
  return out;
}

double KnnModel::score(std::span<const double> query, const KnnConfig& cfg) const {
  cfg.validate();
  const auto idx = neighbors(query, static_cast<std::size_t>(cfg.k));
  std::size_t positive = 0;
  for (std::size_t i : idx) positive += points_[i].label == 1 ? 1 : 0;
  return static_cast<double>(positive) / static_cast<double>(cfg.k);
}

Prediction KnnModel::predict(std::span<const double> query, const KnnConfig& cfg, const std::string& id) const {
  const double s = score(query, cfg);
  return Prediction{id, s, s >= cfg.threshold ? 1 : 0};
}

void KnnModel::save(const std::filesystem::path& path) const {
  std::string out;
  out += "# k=" + std::to_string(cfg_.k) + "\n";
  out += "# metric=euclidean\n";
  out += "# weighting=uniform\n";
  out += "# threshold=" + csv::format_double(cfg_.threshold) + "\n";
  out += "id,label";
  for (std::size_t d = 0; d < dimension_; ++d) out += ",v" + std::to_string(d);
  out += '\n';
  for (const auto& p : points_) {
    out += p.id + "," + std::to_string(p.label);
    for (double v : p.vector) out += "," + csv::format_double(v);
    out += '\n';
  }
  atomic_write_file(path, out);
}

KnnModel KnnModel::load(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path.string());
  KnnConfig cfg;
  std::vector<Point> points;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    const auto line = csv::trim(lines[i]);
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = csv::trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const auto key = csv::trim(body.substr(0, eq));
      const auto value = std::string(csv::trim(body.substr(eq + 1)));
      if (key == "k") {
        cfg.k = static_cast<int>(csv::parse_int(value, where));
      } else if (key == "threshold") {
        cfg.threshold = csv::parse_double(value, where);
      } else if (key == "metric" && value != "euclidean") {
        throw ValidationError(where + ": unsupported metric '" + value + "'");
      } else if (key == "weighting" && value != "uniform") {
        throw ValidationError(where + ": unsupported weighting '" + value + "'");
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      if (line.starts_with("id,label")) continue;
    }
    const auto f = csv::split(line);
    if (f.size() < 3) throw ValidationError(where + ": expected id,label,v0,...");
    Point p;
    p.id = std::string(csv::trim(f[0]));
    p.label = static_cast<int>(csv::parse_int(f[1], where));
    for (std::size_t j = 2; j < f.size(); ++j) {
      const double v = csv::parse_double(f[j], where);
      if (!std::isfinite(v)) throw ValidationError(where + ": non-finite value");
      p.vector.push_back(v);
    }
    points.push_back(std::move(p));
  }
  return from_points(std::move(points), cfg);
}

KnnModel knn_fit(const std::vector<Embedding>& embeddings, const std::map<std::string, int>& labels,
                 const KnnConfig& cfg) {
  return KnnModel::fit(embeddings, labels, cfg);
}

double knn_score(const KnnModel& model, std::span<const double> query, const KnnConfig& cfg) {
  return model.score(query, cfg);
}

Prediction knn_predict(const KnnModel& model, std::span<const double> query, const KnnConfig& cfg,
                       const std::string& id) {
  return model.predict(query, cfg, id);
}

}  // namespace pcgkit
