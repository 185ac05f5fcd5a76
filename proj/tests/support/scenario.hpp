#pragma once

// A small fitted decision context: population, quality models and null
// baseline, built through the same library calls the pipeline uses.

#include <map>

#include "evit/decision.hpp"
#include "evit/population_sim.hpp"
#include "evit/quality_model.hpp"
#include "support/generators.hpp"

namespace evit::testing {

struct Scenario {
  Population population;
  std::map<AlgorithmId, QualityModel> models;
  QualityDistributions null_dist;
  UtilitySpec spec;
  EnumerationConstraints constraints;
};

inline UtilitySpec reference_utility(int n_mc = 500) {
  UtilitySpec s;
  s.prior_damage = 0.3;
  s.cost_inspection = 50.0;
  s.cost_failure = 100.0;
  s.accuracy_weight = 100.0;
  s.cost_per_source = 1.0;
  s.cost_per_algorithm = {{AlgorithmId::Null, 0.0}, {AlgorithmId::StatAlign, 1.0}, {AlgorithmId::Tca, 2.0}};
  s.n_mc = n_mc;
  return s;
}

/// `n_free` fixed-free and `n_fixed` fixed-fixed sources plus a fixed-free
/// target named "target".
inline Scenario make_scenario(std::uint64_t seed, int n_free = 3, int n_fixed = 2, EnumerationMode mode =
                                                                                       EnumerationMode::Full) {
  auto cfg = small_population(n_free, n_fixed, 6, 5);
  cfg.structures.push_back({"target", Boundary::FixedFree, 0.98});
  Scenario s;
  s.population = make_population(generate_population(cfg, seed), "target");
  s.constraints.mode = mode;
  s.constraints.seed = seed;
  const std::vector<AlgorithmId> algs{AlgorithmId::StatAlign, AlgorithmId::Tca};
  const auto records = generate_training_records(s.population.source_domains, algs, s.constraints,
                                                 SimilarityMeasure::MAC, {}, derive_seed(seed, "records"));
  for (AlgorithmId a : algs) s.models[a] = fit_quality_model(records, a, seed);
  s.spec = reference_utility();
  s.null_dist = null_quality_distribution(s.population.source_domains, s.spec.n_mc, seed);
  return s;
}

inline Recommendation recommend_for(const Scenario& s, const UtilitySpec& spec, std::uint64_t seed = 99) {
  return recommend(s.population, s.models, s.null_dist, spec, s.constraints, SimilarityMeasure::MAC, seed);
}

inline UtilitySpec scaled(UtilitySpec s, double a) {
  s.accuracy_weight *= a;
  s.cost_inspection *= a;
  s.cost_failure *= a;
  s.utility_offset *= a;
  s.cost_per_source *= a;
  for (auto& [alg, c] : s.cost_per_algorithm) c *= a;
  return s;
}

}  // namespace evit::testing
