#pragma once

// Oracle-mode validation: the simulator knows the target's true labels, so
// realised post-transfer quality and regret can be measured directly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evit/decision.hpp"
#include "evit/domain.hpp"
#include "evit/error.hpp"
#include "evit/parallel.hpp"
#include "evit/transfer.hpp"

namespace evit {

struct OracleResult {
  TransferStrategy strategy;
  QualityMeasures realised;
  double realised_utility = 0.0;
};

/// Runs the strategy end-to-end on the target and scores it against the
/// hidden labels. T_0 is scored as the population majority-class predictor.
/// Uses the same merge/transfer/classify path as record generation.
inline OracleResult oracle_quality(const TransferStrategy& strategy, const Population& population,
                                   const AlgorithmParams& params, const UtilitySpec& spec, std::uint64_t seed) {
  validate(strategy);
  if (!population.hidden_target_labels)
    throw PreconditionError("oracle_quality: target '" + population.target_domain.id + "' has no hidden labels");
  const auto& truth = *population.hidden_target_labels;

  OracleResult out;
  out.strategy = strategy;
  if (strategy.is_null()) {
    std::vector<int> pooled;
    for (const auto& d : population.source_domains) pooled.insert(pooled.end(), d.labels->begin(), d.labels->end());
    const std::vector<int> pred(truth.size(), majority_class(pooled));
    out.realised = evaluate_quality(pred, truth);
  } else {
    // Merge in population order so results match the order-free strategy.
    std::vector<const Domain*> subset;
    for (const auto& d : population.source_domains)
      if (strategy.source_ids.count(d.id)) subset.push_back(&d);
    if (subset.size() != strategy.source_ids.size())
      throw ValidationError("oracle_quality: strategy names an unknown source (" + describe(strategy) + ")");
    const Domain merged = merge_sources(std::span<const Domain* const>(subset));
    const auto adapted = apply_transfer(strategy.algorithm, merged, population.target_domain.features, params, seed);
    const auto pred = train_classify(adapted.source_features, adapted.source_labels, adapted.target_features, params);
    out.realised = evaluate_quality(pred, truth);
  }
  out.realised_utility = utility_of_quality(out.realised, spec);
  return out;
}

/// Oracle results for every ranked strategy of a recommendation, in rank order.
inline std::vector<OracleResult> oracle_sweep(const Recommendation& rec, const Population& population,
                                              const AlgorithmParams& params, const UtilitySpec& spec,
                                              std::uint64_t seed, unsigned jobs = 1) {
  return parallel_map(rec.ranked.size(), jobs, [&](std::size_t i) {
    return oracle_quality(rec.ranked[i].strategy, population, params, spec, seed);
  });
}

struct RegretReport {
  TransferStrategy recommended;
  TransferStrategy oracle_best;
  double regret = 0.0;  // oracle-best utility - recommended utility
  bool avoided_negative_transfer = false;
  double recommended_utility = 0.0;
  double oracle_best_utility = 0.0;
  double null_utility = 0.0;
  // Expected regret of picking a transfer strategy (non-null) uniformly at random.
  double random_transfer_regret = 0.0;
};

/// Compares the recommendation with the oracle ranking. Utilities are
/// recomputed from the realised measures with `spec`; the oracle best is the
/// highest realised utility, ties broken like the recommendation ranking.
inline RegretReport regret_report(const Recommendation& rec, std::span<const OracleResult> oracle_results,
                                  const UtilitySpec& spec) {
  auto find = [&](const TransferStrategy& t) -> const OracleResult& {
    for (const auto& o : oracle_results)
      if (o.strategy == t) return o;
    throw ValidationError("regret_report: no oracle result for " + describe(t));
  };
  if (rec.ranked.empty()) throw ValidationError("regret_report: empty recommendation");

  RegretReport r;
  r.recommended = rec.best;
  r.recommended_utility = utility_of_quality(find(rec.best).realised, spec);
  r.null_utility = utility_of_quality(find(TransferStrategy::none()).realised, spec);

  bool first = true;
  double transfer_regret_sum = 0.0;
  std::size_t n_transfer = 0;
  for (const auto& entry : rec.ranked) {
    const double u = utility_of_quality(find(entry.strategy).realised, spec);
    if (first || u > r.oracle_best_utility ||
        (u == r.oracle_best_utility && tie_break_less(entry.strategy, r.oracle_best))) {
      r.oracle_best = entry.strategy;
      r.oracle_best_utility = u;
      first = false;
    }
  }
  for (const auto& entry : rec.ranked) {
    if (entry.strategy.is_null()) continue;
    transfer_regret_sum += r.oracle_best_utility - utility_of_quality(find(entry.strategy).realised, spec);
    ++n_transfer;
  }
  r.regret = r.oracle_best_utility - r.recommended_utility;
  r.avoided_negative_transfer = r.recommended_utility >= r.null_utility;
  r.random_transfer_regret = n_transfer ? transfer_regret_sum / static_cast<double>(n_transfer) : 0.0;
  return r;
}

}  // namespace evit
