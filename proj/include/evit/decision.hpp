#pragma once

// Transfer-strategy enumeration, utilities, EVIT and the optimal-strategy
// search: T* = argmax_T [EVIT(T) + U(T)].

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "evit/domain.hpp"
#include "evit/enumeration.hpp"
#include "evit/error.hpp"
#include "evit/parallel.hpp"
#include "evit/quality_model.hpp"
#include "evit/similarity.hpp"
#include "evit/transfer.hpp"

namespace evit {

/// A (source subset, algorithm) pair. The empty subset with NULL is the
/// no-transfer strategy T_0 and is the only strategy allowed to use NULL.
struct TransferStrategy {
  std::set<std::string> source_ids;
  AlgorithmId algorithm = AlgorithmId::Null;

  static TransferStrategy none() { return {}; }
  bool is_null() const { return source_ids.empty(); }
  bool operator==(const TransferStrategy&) const = default;
};

inline void validate(const TransferStrategy& t) {
  if (t.source_ids.empty() != (t.algorithm == AlgorithmId::Null))
    throw ValidationError("transfer strategy: the NULL algorithm goes with the empty source set and only with it");
}

inline std::string describe(const TransferStrategy& t) {
  if (t.is_null()) return "T0 (no transfer)";
  std::string s = std::string(to_string(t.algorithm)) + " from {";
  bool first = true;
  for (const auto& id : t.source_ids) {
    s += first ? "" : ",";
    s += id;
    first = false;
  }
  return s + "}";
}

/// Tie-break order among equal objectives: fewer sources, then NULL-first
/// algorithm order, then lexicographic source ids.
inline bool tie_break_less(const TransferStrategy& a, const TransferStrategy& b) {
  return std::forward_as_tuple(a.source_ids.size(), a.algorithm, a.source_ids) <
         std::forward_as_tuple(b.source_ids.size(), b.algorithm, b.source_ids);
}

namespace detail {

inline std::vector<AlgorithmId> transfer_algorithms(std::span<const AlgorithmId> algorithms) {
  std::vector<AlgorithmId> out;
  for (AlgorithmId a : algorithms)
    if (a != AlgorithmId::Null && std::find(out.begin(), out.end(), a) == out.end()) out.push_back(a);
  return out;
}

}  // namespace detail

/// T_0 first, then per constraints:
///  full:          every non-empty subset x every non-null algorithm,
///  single_source: singleton subsets only,
///  random_cap:    `cap` strategies sampled uniformly from the full list.
/// Subsets follow bitmask order over `source_ids`; algorithms vary fastest.
inline std::vector<TransferStrategy> enumerate_strategies(std::span<const std::string> source_ids,
                                                          std::span<const AlgorithmId> algorithms,
                                                          const EnumerationConstraints& constraints) {
  validate(constraints);
  require_multiple_sources(source_ids.size(), "enumerate_strategies");
  if (std::set<std::string>(source_ids.begin(), source_ids.end()).size() != source_ids.size())
    throw ValidationError("enumerate_strategies: duplicate source ids");
  const auto algs = detail::transfer_algorithms(algorithms);
  const std::size_t n = source_ids.size();

  std::vector<TransferStrategy> candidates;
  if (constraints.mode == EnumerationMode::SingleSource) {
    for (std::size_t i = 0; i < n; ++i)
      for (AlgorithmId a : algs) candidates.push_back({{source_ids[i]}, a});
  } else {
    if (n > kMaxFullSources)
      throw PreconditionError("enumerate_strategies: " + std::to_string(n) +
                              " sources is too many for subset enumeration; use single_source");
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
      std::set<std::string> subset;
      for (std::size_t i = 0; i < n; ++i)
        if (mask >> i & 1u) subset.insert(source_ids[i]);
      for (AlgorithmId a : algs) candidates.push_back({subset, a});
    }
    if (constraints.mode == EnumerationMode::RandomCap)
      candidates = detail::sample_in_order(candidates, static_cast<std::size_t>(constraints.cap),
                                           derive_seed(constraints.seed, "strategies"));
  }

  std::vector<TransferStrategy> out{TransferStrategy::none()};
  out.insert(out.end(), candidates.begin(), candidates.end());
  return out;
}

struct UtilitySpec {
  double prior_damage = 0.01;    // pi_d
  double cost_inspection = 0.0;  // cost of a false alarm
  double cost_failure = 0.0;     // cost of a missed damage
  double accuracy_weight = 0.0;  // utility per unit accuracy
  double utility_offset = 0.0;   // constant added to U(Q); cancels in EVIT
  double cost_per_source = 0.0;
  std::map<AlgorithmId, double> cost_per_algorithm;
  int n_mc = 2000;
};

inline void validate(const UtilitySpec& s) {
  if (!(s.prior_damage >= 0.0 && s.prior_damage <= 1.0)) throw ValidationError("prior_damage must lie in [0,1]");
  if (!(s.cost_inspection >= 0.0) || !(s.cost_failure >= 0.0) || !(s.cost_per_source >= 0.0))
    throw ValidationError("utility costs must be non-negative");
  for (const auto& [a, c] : s.cost_per_algorithm) {
    if (!(c >= 0.0)) throw ValidationError("algorithm costs must be non-negative");
    if (a == AlgorithmId::Null && c != 0.0) throw ValidationError("the NULL algorithm must cost 0");
  }
  if (s.n_mc < 1) throw ValidationError("n_mc must be positive");
}

/// U(Q) = offset + w*accuracy - (1-pi_d)*type1*C_ins - pi_d*type2*C_fail.
inline double utility_of_quality(const QualityMeasures& q, const UtilitySpec& s) {
  return s.utility_offset + s.accuracy_weight * q.accuracy -
         (1.0 - s.prior_damage) * q.type1_rate * s.cost_inspection - s.prior_damage * q.type2_rate * s.cost_failure;
}

/// Monte Carlo estimate of E[U(Q)] over index-paired component samples.
inline double expected_utility(const QualityDistributions& q, const UtilitySpec& s) {
  const std::size_t n = q.size();
  for (const auto& c : q.components)
    if (c.samples.size() != n) throw ValidationError("expected_utility: component sample counts differ");
  if (n == 0) throw ValidationError("expected_utility: empty distributions");
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += utility_of_quality(q.sample(i), s);
  return sum / static_cast<double>(n);
}

/// EU(Q|T) - EU(Q|T_0); exactly 0 for T_0.
inline double evit(const TransferStrategy& strategy, double eu_strategy, double eu_null) {
  if (strategy.is_null()) return 0.0;
  return eu_strategy - eu_null;
}

/// U(T) = -(algorithm cost + per-source cost * |sources|); U(T_0) = 0.
inline double transfer_cost(const TransferStrategy& strategy, const UtilitySpec& s) {
  if (strategy.is_null()) return 0.0;
  const auto it = s.cost_per_algorithm.find(strategy.algorithm);
  if (it == s.cost_per_algorithm.end())
    throw ConfigError(std::string("no transfer cost configured for algorithm ") + to_string(strategy.algorithm));
  return -(it->second + s.cost_per_source * static_cast<double>(strategy.source_ids.size()));
}

struct RankedStrategy {
  TransferStrategy strategy;
  double evit = 0.0;
  double expected_utility_quality = 0.0;
  double transfer_cost = 0.0;
  double objective = 0.0;
  bool negative_transfer = false;
  std::optional<SimilarityVector> similarity;  // absent for T_0
  QualityMeasures predicted_mean;              // Monte Carlo means of Q
};

struct Recommendation {
  std::vector<RankedStrategy> ranked;
  TransferStrategy best;
};

/// Sorts by objective (descending) with the tie_break_less order, and sets
/// best to the first entry.
inline void rank(Recommendation& r) {
  std::sort(r.ranked.begin(), r.ranked.end(), [](const RankedStrategy& a, const RankedStrategy& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    return tie_break_less(a.strategy, b.strategy);
  });
  if (!r.ranked.empty()) r.best = r.ranked.front().strategy;
}

struct RecommendOptions {
  int n_modes = 0;  // 0: default_mode_count
  unsigned jobs = 1;
};

/// Scores every enumerated strategy through similarity -> predicted quality
/// -> expected utility -> EVIT and returns them ranked by EVIT + U(T).
/// Every strategy's Monte Carlo draws use the same seed (common random
/// numbers), so EVIT differences carry no independent sampling noise.
inline Recommendation recommend(const Population& population, const std::map<AlgorithmId, QualityModel>& models,
                                const QualityDistributions& null_dist, const UtilitySpec& spec,
                                const EnumerationConstraints& constraints, SimilarityMeasure measure,
                                std::uint64_t seed, const RecommendOptions& options = {}) {
  require_multiple_sources(population.n_sources(), "recommend");
  validate(population);
  validate(spec);

  std::vector<AlgorithmId> algorithms;
  for (const auto& [a, m] : models) {
    if (a == AlgorithmId::Null) continue;
    if (m.algorithm != a)
      throw ValidationError(std::string("recommend: model keyed ") + to_string(a) + " was fitted for " +
                            to_string(m.algorithm));
    algorithms.push_back(a);
  }
  if (algorithms.empty()) throw PreconditionError("recommend: no fitted quality models for any transfer algorithm");

  std::vector<std::string> ids;
  for (const auto& d : population.source_domains) ids.push_back(d.id);
  const auto strategies = enumerate_strategies(ids, algorithms, constraints);
  const double eu_null = expected_utility(null_dist, spec);

  Recommendation rec;
  rec.ranked = parallel_map(strategies.size(), options.jobs, [&](std::size_t i) {
    RankedStrategy r;
    r.strategy = strategies[i];
    if (r.strategy.is_null()) {
      r.expected_utility_quality = eu_null;
      for (QualityComponent c : kQualityComponents) {
        const double m = null_dist[c].mean;
        if (c == QualityComponent::Accuracy) r.predicted_mean.accuracy = m;
        if (c == QualityComponent::Type1) r.predicted_mean.type1_rate = m;
        if (c == QualityComponent::Type2) r.predicted_mean.type2_rate = m;
      }
      return r;  // evit, cost and objective are exactly 0
    }
    std::vector<const Representation*> reps;
    for (const auto& id : r.strategy.source_ids) reps.push_back(&population.source(id).representation);
    r.similarity = similarity_features(population.target_domain.representation,
                                       std::span<const Representation* const>(reps), measure, options.n_modes);
    const auto q = predict_quality(models.at(r.strategy.algorithm), *r.similarity, spec.n_mc, seed);
    r.predicted_mean = {q[QualityComponent::Accuracy].mean, q[QualityComponent::Type1].mean,
                        q[QualityComponent::Type2].mean};
    r.expected_utility_quality = expected_utility(q, spec);
    r.evit = evit(r.strategy, r.expected_utility_quality, eu_null);
    r.transfer_cost = transfer_cost(r.strategy, spec);
    r.objective = r.evit + r.transfer_cost;
    r.negative_transfer = r.evit < 0.0;
    return r;
  });
  rank(rec);
  return rec;
}

}  // namespace evit
