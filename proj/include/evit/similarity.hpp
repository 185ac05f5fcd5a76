#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "evit/domain.hpp"
#include "evit/error.hpp"

namespace evit {

enum class SimilarityMeasure { MAC, Jaccard };

inline const char* to_string(SimilarityMeasure m) { return m == SimilarityMeasure::MAC ? "MAC" : "Jaccard"; }

inline SimilarityMeasure parse_measure(const std::string& s) {
  if (s == "MAC" || s == "mac") return SimilarityMeasure::MAC;
  if (s == "Jaccard" || s == "jaccard" || s == "JACCARD") return SimilarityMeasure::Jaccard;
  throw ValidationError("unknown similarity measure '" + s + "' (expected MAC or Jaccard)");
}

/// Summary of target-vs-source pairwise scores over a source set.
struct SimilarityVector {
  SimilarityMeasure measure = SimilarityMeasure::MAC;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;

  bool operator==(const SimilarityVector&) const = default;
};

/// Modal assurance criterion |a.b|^2 / ((a.a)(b.b)).
inline double mac(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (a.size() != b.size())
    throw ValidationError("mac: vectors differ in length (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  const double aa = a.squaredNorm();
  const double bb = b.squaredNorm();
  if (aa == 0.0 || bb == 0.0) throw ValidationError("mac: zero modeshape vector");
  const double ab = a.dot(b);
  return std::clamp(ab * ab / (aa * bb), 0.0, 1.0);
}

/// Mean MAC over index-paired modes 0..n_modes-1.
inline double mac_summary(const Eigen::MatrixXd& modes_a, const Eigen::MatrixXd& modes_b, int n_modes) {
  if (n_modes < 1) throw ValidationError("mac_summary: n_modes must be positive");
  if (modes_a.cols() < n_modes || modes_b.cols() < n_modes)
    throw ValidationError("mac_summary: n_modes=" + std::to_string(n_modes) + " exceeds available modes (" +
                          std::to_string(std::min(modes_a.cols(), modes_b.cols())) + ")");
  double sum = 0.0;
  for (int i = 0; i < n_modes; ++i) sum += mac(modes_a.col(i), modes_b.col(i));
  return sum / n_modes;
}

inline int default_mode_count(Eigen::Index n_dof) { return static_cast<int>(std::min<Eigen::Index>(5, n_dof)); }

/// Intersection over union; 1 for two empty sets.
inline double jaccard(const EdgeSet& a, const EdgeSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& e : a) common += b.count(e);
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

inline double pairwise_similarity(const Representation& a, const Representation& b, SimilarityMeasure measure,
                                  int n_modes) {
  return measure == SimilarityMeasure::MAC ? mac_summary(a.modeshapes, b.modeshapes, n_modes)
                                           : jaccard(a.graph_edges, b.graph_edges);
}

/// (mean, min, max) of target-vs-each-source scores. n_modes <= 0 selects
/// default_mode_count. Scores are summed in sorted order so the result does
/// not depend on the order of `sources`.
inline SimilarityVector similarity_features(const Representation& target, std::span<const Representation* const> sources,
                                            SimilarityMeasure measure, int n_modes = 0) {
  if (sources.empty()) throw ValidationError("similarity_features: empty source list");
  if (n_modes <= 0) n_modes = default_mode_count(target.modeshapes.rows());
  std::vector<double> scores;
  scores.reserve(sources.size());
  for (const Representation* s : sources) scores.push_back(pairwise_similarity(target, *s, measure, n_modes));
  std::sort(scores.begin(), scores.end());
  SimilarityVector v;
  v.measure = measure;
  v.min = scores.front();
  v.max = scores.back();
  v.mean = std::clamp(std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size()), v.min,
                      v.max);
  return v;
}

inline SimilarityVector similarity_features(const Representation& target, std::span<const Representation> sources,
                                            SimilarityMeasure measure, int n_modes = 0) {
  std::vector<const Representation*> ptrs;
  for (const auto& s : sources) ptrs.push_back(&s);
  return similarity_features(target, std::span<const Representation* const>(ptrs), measure, n_modes);
}

}  // namespace evit
