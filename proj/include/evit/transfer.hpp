#pragma once

// Candidate transfer algorithms, the downstream kNN damage classifier and
// prediction-quality scoring.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evit/domain.hpp"
#include "evit/error.hpp"

namespace evit {

// Declaration order is the tie-break order used when ranking strategies.
enum class AlgorithmId { Null = 0, StatAlign = 1, Tca = 2 };

inline constexpr std::array<AlgorithmId, 3> kAllAlgorithms{AlgorithmId::Null, AlgorithmId::StatAlign, AlgorithmId::Tca};

inline const char* to_string(AlgorithmId a) {
  switch (a) {
    case AlgorithmId::Null: return "NULL";
    case AlgorithmId::StatAlign: return "STAT_ALIGN";
    case AlgorithmId::Tca: return "TCA";
  }
  return "?";
}

inline AlgorithmId parse_algorithm(const std::string& s) {
  for (AlgorithmId a : kAllAlgorithms)
    if (s == to_string(a)) return a;
  throw ValidationError("unknown algorithm '" + s + "' (expected NULL, STAT_ALIGN or TCA)");
}

struct AlgorithmParams {
  int tca_components = 2;
  double tca_mu = 1.0;
  std::optional<double> tca_kernel_bandwidth;  // nullopt: median heuristic
  int knn_k = 1;
};

inline void validate(const AlgorithmParams& p) {
  if (p.tca_components < 1) throw ValidationError("tca_components must be positive");
  if (!(p.tca_mu > 0.0)) throw ValidationError("tca_mu must be positive");
  if (p.tca_kernel_bandwidth && !(*p.tca_kernel_bandwidth > 0.0))
    throw ValidationError("tca_kernel_bandwidth must be positive or \"median\"");
  if (p.knn_k < 1 || p.knn_k % 2 == 0) throw ValidationError("knn_k must be a positive odd integer");
}

struct QualityMeasures {
  double accuracy = 0.0;
  double type1_rate = 0.0;  // P(predict damaged | truly undamaged)
  double type2_rate = 0.0;  // P(predict undamaged | truly damaged)
  bool type1_degenerate = false;  // no truly-undamaged samples
  bool type2_degenerate = false;  // no truly-damaged samples

  bool operator==(const QualityMeasures&) const = default;
};

/// Per-column (x - mean) / std with the biased std. Columns whose std is
/// below 1e-12 are only centred.
inline Eigen::MatrixXd statistic_align(const Eigen::MatrixXd& x) {
  if (x.rows() < 2) throw ValidationError("statistic_align: need at least 2 rows, got " + std::to_string(x.rows()));
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).sum() / n;
    const Eigen::VectorXd centred = x.col(j).array() - mean;
    const double sd = std::sqrt(centred.squaredNorm() / n);
    out.col(j) = sd < 1e-12 ? centred : Eigen::VectorXd(centred / sd);
  }
  return out;
}

struct TcaEmbedding {
  Eigen::MatrixXd source;  // n_s x m
  Eigen::MatrixXd target;  // n_t x m
  double bandwidth = 0.0;
};

namespace detail {

inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d = (sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1)) - 2.0 * x * x.transpose();
  d = d.cwiseMax(0.0);
  d.diagonal().setZero();
  return d;
}

inline double median_pairwise_distance(const Eigen::MatrixXd& sqdist) {
  std::vector<double> d;
  const Eigen::Index n = sqdist.rows();
  d.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index j = 1; j < n; ++j)
    for (Eigen::Index i = 0; i < j; ++i) d.push_back(std::sqrt(sqdist(i, j)));
  if (d.empty()) return 0.0;
  std::sort(d.begin(), d.end());
  const std::size_t h = d.size() / 2;
  return d.size() % 2 ? d[h] : 0.5 * (d[h - 1] + d[h]);
}

}  // namespace detail

/// Transfer component analysis with an RBF kernel. Solves
///   K H K w = lambda (K L K + mu I) w
/// (equivalently the leading eigenvectors of (KLK + mu I)^-1 KHK) and
/// embeds both domains as Z = K W. Eigenvectors are taken by descending
/// eigenvalue, each signed so its largest-magnitude entry is positive.
inline TcaEmbedding tca(const Eigen::MatrixXd& xs, const Eigen::MatrixXd& xt, const AlgorithmParams& params) {
  validate(params);
  if (xs.cols() != xt.cols())
    throw ValidationError("tca: source has " + std::to_string(xs.cols()) + " features, target " +
                          std::to_string(xt.cols()));
  const Eigen::Index ns = xs.rows();
  const Eigen::Index nt = xt.rows();
  const Eigen::Index n = ns + nt;
  const int m = params.tca_components;
  if (ns == 0 || nt == 0) throw ValidationError("tca: empty source or target");
  if (m > n - 1)
    throw ValidationError("tca: tca_components=" + std::to_string(m) + " exceeds combined sample count - 1 (" +
                          std::to_string(n - 1) + ")");

  Eigen::MatrixXd x(n, xs.cols());
  x << xs, xt;
  const Eigen::MatrixXd sqdist = detail::squared_distances(x);
  const double sigma = params.tca_kernel_bandwidth ? *params.tca_kernel_bandwidth
                                                   : detail::median_pairwise_distance(sqdist);
  if (!(sigma > 0.0)) throw NumericalError("tca: kernel bandwidth is zero (all samples coincide)");
  const Eigen::MatrixXd K = (-sqdist / (2.0 * sigma * sigma)).array().exp().matrix();

  // MMD coefficient matrix L = e e^T with e = (1/ns, ..., -1/nt, ...).
  Eigen::VectorXd e(n);
  e.head(ns).setConstant(1.0 / static_cast<double>(ns));
  e.tail(nt).setConstant(-1.0 / static_cast<double>(nt));
  const Eigen::VectorXd Ke = K * e;

  // K H K with H = I - 11^T/n is the double-centred K^2.
  const Eigen::VectorXd Kbar = K.rowwise().sum() / static_cast<double>(n);
  Eigen::MatrixXd A = K * K - n * Kbar * Kbar.transpose();
  Eigen::MatrixXd B = Ke * Ke.transpose();
  B.diagonal().array() += params.tca_mu;
  A = 0.5 * (A + A.transpose()).eval();
  B = 0.5 * (B + B.transpose()).eval();

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(A, B);
  if (solver.info() != Eigen::Success)
    throw NumericalError("tca: generalised eigensolver failed (n=" + std::to_string(n) +
                         ", mu=" + std::to_string(params.tca_mu) + ", bandwidth=" + std::to_string(sigma) + ")");

  Eigen::MatrixXd W = solver.eigenvectors().rightCols(m).rowwise().reverse();
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < W.rows(); ++i)
      if (std::abs(W(i, j)) > std::abs(W(best, j))) best = i;
    if (W(best, j) < 0.0) W.col(j) *= -1.0;
  }
  if (!W.allFinite()) throw NumericalError("tca: non-finite transfer components");

  const Eigen::MatrixXd Z = K * W;
  return {Z.topRows(ns), Z.bottomRows(nt), sigma};
}

struct TransferResult {
  Eigen::MatrixXd source_features;
  std::vector<int> source_labels;
  Eigen::MatrixXd target_features;
};

/// Maps a labelled source and the target features into a shared space.
/// `seed` is accepted for algorithms with stochastic steps; the three
/// implemented algorithms are deterministic.
inline TransferResult apply_transfer(AlgorithmId algorithm, const Domain& source, const Eigen::MatrixXd& target_features,
                                     const AlgorithmParams& params, std::uint64_t /*seed*/) {
  if (!source.labelled()) throw ValidationError("apply_transfer: source '" + source.id + "' is unlabelled");
  if (source.n_features() != target_features.cols())
    throw ValidationError("apply_transfer: source and target feature dimensions differ");
  switch (algorithm) {
    case AlgorithmId::Null:
      return {source.features, *source.labels, target_features};
    case AlgorithmId::StatAlign:
      return {statistic_align(source.features), *source.labels, statistic_align(target_features)};
    case AlgorithmId::Tca: {
      auto z = tca(source.features, target_features, params);
      return {std::move(z.source), *source.labels, std::move(z.target)};
    }
  }
  throw ValidationError("apply_transfer: unknown algorithm");
}

/// k-nearest-neighbour classifier (Euclidean). Neighbours are ordered by
/// (distance, label, row) and votes tied between classes go to the smaller
/// class index.
inline std::vector<int> train_classify(const Eigen::MatrixXd& source_features, std::span<const int> source_labels,
                                       const Eigen::MatrixXd& target_features, const AlgorithmParams& params) {
  if (source_features.rows() == 0) throw PreconditionError("train_classify: empty source");
  if (static_cast<Eigen::Index>(source_labels.size()) != source_features.rows())
    throw ValidationError("train_classify: label count does not match source rows");
  if (source_features.cols() != target_features.cols())
    throw ValidationError("train_classify: source and target feature dimensions differ");
  if (params.knn_k < 1 || params.knn_k % 2 == 0) throw ValidationError("knn_k must be a positive odd integer");

  const Eigen::Index ns = source_features.rows();
  const int k = static_cast<int>(std::min<Eigen::Index>(params.knn_k, ns));
  int n_classes = 0;
  for (int y : source_labels) {
    if (y < 0) throw ValidationError("train_classify: negative class label");
    n_classes = std::max(n_classes, y + 1);
  }

  struct Neighbour {
    double dist;
    int label;
    Eigen::Index row;
  };
  std::vector<Neighbour> nb(static_cast<std::size_t>(ns));
  std::vector<int> votes(static_cast<std::size_t>(n_classes));
  std::vector<int> out(static_cast<std::size_t>(target_features.rows()));
  for (Eigen::Index t = 0; t < target_features.rows(); ++t) {
    for (Eigen::Index i = 0; i < ns; ++i)
      nb[static_cast<std::size_t>(i)] = {(source_features.row(i) - target_features.row(t)).squaredNorm(),
                                         source_labels[static_cast<std::size_t>(i)], i};
    std::partial_sort(nb.begin(), nb.begin() + k, nb.end(), [](const Neighbour& a, const Neighbour& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      if (a.label != b.label) return a.label < b.label;
      return a.row < b.row;
    });
    std::fill(votes.begin(), votes.end(), 0);
    for (int i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(nb[static_cast<std::size_t>(i)].label)];
    out[static_cast<std::size_t>(t)] =
        static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }
  return out;
}

/// Accuracy plus type-I/II rates of the damage indicator (label != 0).
/// A rate whose conditioning set is empty is 0 and flagged degenerate.
inline QualityMeasures evaluate_quality(std::span<const int> y_pred, std::span<const int> y_true) {
  if (y_pred.size() != y_true.size())
    throw ValidationError("evaluate_quality: " + std::to_string(y_pred.size()) + " predictions for " +
                          std::to_string(y_true.size()) + " labels");
  if (y_true.empty()) throw ValidationError("evaluate_quality: empty label vector");
  std::size_t correct = 0, healthy = 0, damaged = 0, false_alarm = 0, missed = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    correct += y_pred[i] == y_true[i];
    const bool truly_damaged = y_true[i] != 0;
    const bool flagged = y_pred[i] != 0;
    if (truly_damaged) {
      ++damaged;
      missed += !flagged;
    } else {
      ++healthy;
      false_alarm += flagged;
    }
  }
  QualityMeasures q;
  q.accuracy = static_cast<double>(correct) / static_cast<double>(y_true.size());
  q.type1_degenerate = healthy == 0;
  q.type2_degenerate = damaged == 0;
  q.type1_rate = healthy ? static_cast<double>(false_alarm) / static_cast<double>(healthy) : 0.0;
  q.type2_rate = damaged ? static_cast<double>(missed) / static_cast<double>(damaged) : 0.0;
  return q;
}

/// Most frequent label (smallest index on ties).
inline int majority_class(std::span<const int> labels) {
  if (labels.empty()) throw PreconditionError("majority_class: no labels");
  std::vector<std::size_t> counts;
  for (int y : labels) {
    if (y < 0) throw ValidationError("majority_class: negative label");
    if (static_cast<std::size_t>(y) >= counts.size()) counts.resize(static_cast<std::size_t>(y) + 1);
    ++counts[static_cast<std::size_t>(y)];
  }
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace evit
