#pragma once

// Similarity -> prediction-quality meta-model: training-record generation by
// pseudo-target transfers, per-algorithm logit-space GP regressors, Monte
// Carlo predictive distributions and the no-transfer baseline distribution.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evit/domain.hpp"
#include "evit/enumeration.hpp"
#include "evit/error.hpp"
#include "evit/gp_regressor.hpp"
#include "evit/parallel.hpp"
#include "evit/random.hpp"
#include "evit/similarity.hpp"
#include "evit/transfer.hpp"

namespace evit {

enum class QualityComponent { Accuracy = 0, Type1 = 1, Type2 = 2 };

inline constexpr std::array<QualityComponent, 3> kQualityComponents{
    QualityComponent::Accuracy, QualityComponent::Type1, QualityComponent::Type2};

inline const char* to_string(QualityComponent c) {
  switch (c) {
    case QualityComponent::Accuracy: return "accuracy";
    case QualityComponent::Type1: return "type1";
    case QualityComponent::Type2: return "type2";
  }
  return "?";
}

inline double component_value(const QualityMeasures& q, QualityComponent c) {
  switch (c) {
    case QualityComponent::Accuracy: return q.accuracy;
    case QualityComponent::Type1: return q.type1_rate;
    case QualityComponent::Type2: return q.type2_rate;
  }
  return 0.0;
}

inline constexpr double kQualityClamp = 1e-3;
// Latent samples are clipped here so inverse_logit stays strictly inside (0,1)
// in double precision.
inline constexpr double kMaxLogit = 30.0;

inline double clamp_quality(double q) { return std::clamp(q, kQualityClamp, 1.0 - kQualityClamp); }
inline double logit(double q) { return std::log(q / (1.0 - q)); }
inline double inverse_logit(double z) {
  z = std::clamp(z, -kMaxLogit, kMaxLogit);
  return 1.0 / (1.0 + std::exp(-z));
}

struct TrainingRecord {
  AlgorithmId algorithm = AlgorithmId::StatAlign;
  std::string pseudo_target_id;
  std::vector<std::string> source_ids;  // empty: the no-transfer pair
  SimilarityVector similarity;
  QualityMeasures quality;
};

struct RecordOptions {
  int n_modes = 0;  // 0: default_mode_count
  unsigned jobs = 1;
};

namespace detail {

// Majority-class prediction for `target` with the majority taken over the
// pooled labels of `others`.
inline QualityMeasures majority_baseline(const Domain& target, std::span<const Domain* const> others) {
  std::vector<int> pooled;
  for (const Domain* d : others) pooled.insert(pooled.end(), d->labels->begin(), d->labels->end());
  const int majority = majority_class(pooled);
  const std::vector<int> pred(target.labels->size(), majority);
  return evaluate_quality(pred, *target.labels);
}

inline void require_labelled_sources(std::span<const Domain> sources, const char* where) {
  for (const auto& d : sources) {
    if (!d.labelled()) throw ValidationError(std::string(where) + ": source '" + d.id + "' is unlabelled");
    if (d.n_features() != sources.front().n_features())
      throw ValidationError(std::string(where) + ": source '" + d.id + "' has mismatched feature dimension");
  }
}

}  // namespace detail

/// Runs every (pseudo-target, source subset) pair from the constraints with
/// every non-null algorithm and scores the result against the hidden
/// pseudo-target labels. Records come out pair-major, algorithm-minor;
/// NULL entries in `algorithms` are skipped (the no-transfer strategy has no
/// transfer to learn). Empty subsets (full mode only) record the
/// majority-class baseline with a similarity of 0.
inline std::vector<TrainingRecord> generate_training_records(std::span<const Domain> sources,
                                                             std::span<const AlgorithmId> algorithms,
                                                             const EnumerationConstraints& constraints,
                                                             SimilarityMeasure measure, const AlgorithmParams& params,
                                                             std::uint64_t seed, const RecordOptions& options = {}) {
  require_multiple_sources(sources.size(), "generate_training_records");
  detail::require_labelled_sources(sources, "generate_training_records");
  validate(params);
  std::vector<AlgorithmId> algs;
  for (AlgorithmId a : algorithms)
    if (a != AlgorithmId::Null && std::find(algs.begin(), algs.end(), a) == algs.end()) algs.push_back(a);

  const std::vector<TrainingPair> pairs = enumerate_training_pairs(sources.size(), constraints);
  const std::size_t n_tasks = pairs.size() * algs.size();

  return parallel_map(n_tasks, options.jobs, [&](std::size_t task) {
    const TrainingPair& pair = pairs[task / algs.size()];
    const AlgorithmId alg = algs[task % algs.size()];
    const Domain& pseudo = sources[pair.pseudo_target];

    TrainingRecord rec;
    rec.algorithm = alg;
    rec.pseudo_target_id = pseudo.id;
    rec.similarity.measure = measure;

    std::vector<const Domain*> subset;
    for (std::size_t s : pair.sources) {
      subset.push_back(&sources[s]);
      rec.source_ids.push_back(sources[s].id);
    }
    if (subset.empty()) {
      std::vector<const Domain*> others;
      for (std::size_t s = 0; s < sources.size(); ++s)
        if (s != pair.pseudo_target) others.push_back(&sources[s]);
      rec.quality = detail::majority_baseline(pseudo, others);
      return rec;
    }

    const auto hidden = hide_labels(pseudo);
    const Domain merged = merge_sources(std::span<const Domain* const>(subset));
    const auto adapted = apply_transfer(alg, merged, hidden.domain.features, params, derive_seed(seed, task));
    const auto predicted = train_classify(adapted.source_features, adapted.source_labels, adapted.target_features, params);
    rec.quality = evaluate_quality(predicted, hidden.labels);
    rec.similarity = similarity_features(hidden.domain.representation,
                                         std::span<const Representation>(merged.constituents), measure,
                                         options.n_modes);
    return rec;
  });
}

struct QualityModelOptions {
  bool include_min_max = false;  // regress on (mean, min, max) instead of mean
};

/// P(Q | S, A) for one algorithm: an independent logit-space GP per quality
/// component.
struct QualityModel {
  AlgorithmId algorithm = AlgorithmId::StatAlign;
  bool include_min_max = false;
  std::array<GaussianProcessRegressor, 3> components;

  const GaussianProcessRegressor& component(QualityComponent c) const {
    return components[static_cast<std::size_t>(c)];
  }
};

inline Eigen::RowVectorXd regressor_input(const SimilarityVector& s, bool include_min_max) {
  if (include_min_max) return Eigen::RowVector3d(s.mean, s.min, s.max);
  return Eigen::RowVectorXd::Constant(1, s.mean);
}

/// Fits the model for `algorithm` from its transfer records (records of other
/// algorithms and no-transfer records are ignored). Fitting is deterministic;
/// `seed` is reserved for stochastic fitting schemes.
inline QualityModel fit_quality_model(std::span<const TrainingRecord> records, AlgorithmId algorithm,
                                      std::uint64_t /*seed*/, const QualityModelOptions& options = {}) {
  std::vector<const TrainingRecord*> used;
  for (const auto& r : records)
    if (r.algorithm == algorithm && !r.source_ids.empty()) used.push_back(&r);
  if (used.size() < 3)
    throw PreconditionError(std::string("fit_quality_model: need at least 3 transfer records for ") +
                            to_string(algorithm) + ", got " + std::to_string(used.size()));

  const Eigen::Index n = static_cast<Eigen::Index>(used.size());
  const Eigen::Index p = options.include_min_max ? 3 : 1;
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i)
    x.row(i) = regressor_input(used[static_cast<std::size_t>(i)]->similarity, options.include_min_max);

  QualityModel model;
  model.algorithm = algorithm;
  model.include_min_max = options.include_min_max;
  for (QualityComponent c : kQualityComponents) {
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i)
      y(i) = logit(clamp_quality(component_value(used[static_cast<std::size_t>(i)]->quality, c)));
    model.components[static_cast<std::size_t>(c)] = GaussianProcessRegressor::fit(x, y);
  }
  return model;
}

struct QualityDistribution {
  QualityComponent component = QualityComponent::Accuracy;
  std::vector<double> samples;
  double mean = 0.0;
  double variance = 0.0;
};

inline QualityDistribution make_distribution(QualityComponent c, std::vector<double> samples) {
  QualityDistribution d;
  d.component = c;
  d.samples = std::move(samples);
  if (!d.samples.empty()) {
    const double n = static_cast<double>(d.samples.size());
    d.mean = std::accumulate(d.samples.begin(), d.samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : d.samples) ss += (s - d.mean) * (s - d.mean);
    d.variance = ss / n;
  }
  return d;
}

/// Accuracy, type-I and type-II distributions with index-paired samples.
struct QualityDistributions {
  std::array<QualityDistribution, 3> components;

  const QualityDistribution& operator[](QualityComponent c) const { return components[static_cast<std::size_t>(c)]; }
  std::size_t size() const { return components[0].samples.size(); }
  QualityMeasures sample(std::size_t i) const {
    QualityMeasures q;
    q.accuracy = components[0].samples[i];
    q.type1_rate = components[1].samples[i];
    q.type2_rate = components[2].samples[i];
    return q;
  }
};

/// Monte Carlo push-forward of each component's Gaussian predictive through
/// the inverse logit. Component c always draws from stream (seed, c), so
/// calls sharing a seed use common random numbers.
inline QualityDistributions predict_quality(const QualityModel& model, const SimilarityVector& similarity, int n_mc,
                                            std::uint64_t seed) {
  if (n_mc < 1) throw ValidationError("predict_quality: n_mc must be positive");
  const Eigen::RowVectorXd x = regressor_input(similarity, model.include_min_max);
  QualityDistributions out;
  for (QualityComponent c : kQualityComponents) {
    const auto pred = model.component(c).predict(x);
    const double sd = std::sqrt(pred.variance);
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> samples(static_cast<std::size_t>(n_mc));
    for (double& s : samples) s = inverse_logit(pred.mean + sd * gauss(rng));
    out.components[static_cast<std::size_t>(c)] = make_distribution(c, std::move(samples));
  }
  return out;
}

/// Leave-one-out quality of the majority-class predictor: for each source,
/// the majority label of all other sources is predicted for every sample.
inline std::vector<QualityMeasures> null_baseline_measures(std::span<const Domain> sources) {
  require_multiple_sources(sources.size(), "null_quality_distribution");
  detail::require_labelled_sources(sources, "null_quality_distribution");
  std::vector<QualityMeasures> out;
  for (std::size_t p = 0; p < sources.size(); ++p) {
    std::vector<const Domain*> others;
    for (std::size_t s = 0; s < sources.size(); ++s)
      if (s != p) others.push_back(&sources[s]);
    out.push_back(detail::majority_baseline(sources[p], others));
  }
  return out;
}

/// Quality distribution of the no-transfer strategy: the leave-one-out
/// baseline measures resampled (jointly across components) to n_mc draws.
/// Samples lie in [0,1]; exact 0 and 1 are possible here.
inline QualityDistributions null_quality_distribution(std::span<const Domain> sources, int n_mc, std::uint64_t seed) {
  if (n_mc < 1) throw ValidationError("null_quality_distribution: n_mc must be positive");
  const auto measures = null_baseline_measures(sources);
  Rng rng(derive_seed(seed, "null-baseline"));
  std::uniform_int_distribution<std::size_t> pick(0, measures.size() - 1);
  std::array<std::vector<double>, 3> samples;
  for (int i = 0; i < n_mc; ++i) {
    const QualityMeasures& q = measures[pick(rng)];
    for (QualityComponent c : kQualityComponents) samples[static_cast<std::size_t>(c)].push_back(component_value(q, c));
  }
  QualityDistributions out;
  for (QualityComponent c : kQualityComponents)
    out.components[static_cast<std::size_t>(c)] = make_distribution(c, std::move(samples[static_cast<std::size_t>(c)]));
  return out;
}

}  // namespace evit
