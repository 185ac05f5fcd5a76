// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "evit/evit.hpp"
#include "evit/pipeline.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/scenario.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;
using namespace evit;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

struct Criterion {
  int number;
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

// ---------------------------------------------------------------------------

Outcome evit_identity() {
  Outcome o;
  Rng rng(101);
  int contexts = 0;
  for (std::uint64_t scenario_seed = 1; scenario_seed <= 5; ++scenario_seed) {
    const auto s = testing::make_scenario(scenario_seed, 2, 2);
    for (int k = 0; k < 10; ++k, ++contexts) {
      UtilitySpec spec = s.spec;
      spec.prior_damage = testing::uniform(rng, 0.0, 1.0);
      spec.cost_inspection = testing::uniform(rng, 0.0, 200.0);
      spec.cost_failure = testing::uniform(rng, 0.0, 2000.0);
      spec.accuracy_weight = testing::uniform(rng, 0.0, 200.0);
      spec.utility_offset = testing::uniform(rng, -500.0, 500.0);
      spec.cost_per_source = testing::uniform(rng, 0.0, 5.0);
      spec.cost_per_algorithm[AlgorithmId::StatAlign] = testing::uniform(rng, 0.0, 5.0);
      spec.cost_per_algorithm[AlgorithmId::Tca] = testing::uniform(rng, 0.0, 5.0);
      spec.n_mc = 200;
      const auto rec = testing::recommend_for(s, spec, rng());
      const RankedStrategy* null_row = nullptr;
      for (const auto& r : rec.ranked)
        if (r.strategy.is_null()) null_row = &r;
      o.check(null_row != nullptr, "T0 missing from the ranking");
      if (!null_row) return o;
      o.check(null_row->evit == 0.0 && null_row->objective == 0.0 && !null_row->negative_transfer,
              "EVIT(T0) is not exactly 0");
      for (const auto& r : rec.ranked) {
        o.check(r.negative_transfer == (r.evit < 0.0), "negative-transfer flag disagrees with sign(EVIT)");
        if (!r.strategy.is_null())
          o.check(r.evit == r.expected_utility_quality - null_row->expected_utility_quality,
                  "EVIT differs from EU(T) - EU(T0)");
      }
    }
  }
  o.detail = o.pass ? std::to_string(contexts) + " contexts" : o.detail;
  return o;
}

Outcome enumeration_counts() {
  Outcome o;
  for (int n = 2; n <= 5; ++n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("s" + std::to_string(i));
    for (const auto& algs : {std::vector<AlgorithmId>{AlgorithmId::StatAlign},
                             std::vector<AlgorithmId>{AlgorithmId::StatAlign, AlgorithmId::Tca}}) {
      const int n_alg = static_cast<int>(algs.size());
      EnumerationConstraints full, single;
      single.mode = EnumerationMode::SingleSource;
      const auto f = enumerate_strategies(ids, algs, full).size();
      const auto s = enumerate_strategies(ids, algs, single).size();
      o.check(f == oracle::brute_force_strategy_count(n, n_alg, false) &&
                  f == 1 + ((std::size_t{1} << n) - 1) * static_cast<std::size_t>(n_alg),
              "full strategy count wrong for N_s=" + std::to_string(n));
      o.check(s == oracle::brute_force_strategy_count(n, n_alg, true),
              "single-source strategy count wrong for N_s=" + std::to_string(n));
    }
    for (bool single_source : {false, true}) {
      EnumerationConstraints c;
      if (single_source) c.mode = EnumerationMode::SingleSource;
      std::multiset<std::pair<int, std::vector<int>>> expected, actual;
      for (auto& p : oracle::brute_force_pairs(n, single_source)) expected.insert(p);
      for (const auto& tp : enumerate_training_pairs(static_cast<std::size_t>(n), c))
        actual.insert({static_cast<int>(tp.pseudo_target), std::vector<int>(tp.sources.begin(), tp.sources.end())});
      o.check(actual == expected, "training pairs differ from brute force for N_s=" + std::to_string(n));
      const std::size_t want = single_source ? static_cast<std::size_t>(n * (n - 1))
                                             : static_cast<std::size_t>(n) << (n - 1);
      o.check(actual.size() == want, "training pair count wrong for N_s=" + std::to_string(n));
    }
  }
  if (o.pass) o.detail = "N_s = 2..5, full and single_source";
  return o;
}

Outcome modal_correctness() {
  Outcome o;
  const auto modes = modal_analysis(build_structure(testing::uniform_chain(2, Boundary::FixedFree), {}));
  const double lo = (3.0 - std::sqrt(5.0)) / 2.0, hi = (3.0 + std::sqrt(5.0)) / 2.0;
  const double e0 = std::abs(std::pow(modes.natural_frequencies(0), 2) - lo);
  const double e1 = std::abs(std::pow(modes.natural_frequencies(1), 2) - hi);
  o.check(e0 <= 1e-9 && e1 <= 1e-9, "2-DOF eigenvalues off");

  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto model = build_structure(testing::random_chain(rng, 10), {});
    const auto m = modal_analysis(model);
    for (Eigen::Index j = 0; j < m.modeshapes.cols(); ++j) {
      const Eigen::VectorXd phi = m.modeshapes.col(j);
      const double w2 = m.natural_frequencies(j) * m.natural_frequencies(j);
      worst = std::max(worst, (model.stiffness_matrix * phi - w2 * model.mass_matrix * phi).norm());
    }
  }
  o.check(worst <= 1e-8, "residual above 1e-8");
  std::ostringstream d;
  d << "eig err " << std::max(e0, e1) << ", worst residual " << worst;
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome similarity_properties() {
  Outcome o;
  Rng rng(404);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = testing::uniform_int(rng, 1, 12);
    const Eigen::VectorXd a = testing::random_vector(rng, n);
    const Eigen::VectorXd b = testing::random_vector(rng, n);
    const double m = mac(a, b);
    const double sa = testing::uniform(rng, -10.0, 10.0), sb = testing::uniform(rng, 0.1, 10.0);
    const Eigen::VectorXd as = (std::abs(sa) < 0.1 ? 1.0 : sa) * a;
    const Eigen::VectorXd bs = sb * b;
    o.check(m >= -1e-12 && m <= 1.0 + 1e-12, "MAC outside [0,1]");
    worst = std::max({worst, std::abs(m - mac(b, a)), std::abs(m - mac(as, bs)),
                      std::abs(m - oracle::mac({a.begin(), a.end()}, {b.begin(), b.end()}))});
  }
  o.check(worst <= 1e-12, "MAC symmetry/scale/oracle deviation above 1e-12");
  const EdgeSet x{{0, 1}, {1, 2}, {2, 3}};
  const EdgeSet y{{1, 2}, {2, 3}, {3, 4}};
  o.check(jaccard(x, y) == 0.5 && oracle::jaccard({"ab", "bc", "cd"}, {"bc", "cd", "de"}) == 0.5,
          "Jaccard fixture is not 0.5");
  std::ostringstream d;
  d << "1000 pairs, worst deviation " << worst << ", Jaccard fixture 0.5";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome transfer_properties() {
  Outcome o;
  Rng rng(505);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index d = testing::uniform_int(rng, 1, 6);
    auto src = testing::labelled_domain("src", testing::balanced_labels(3, 6), 3, d);
    src.features = testing::random_matrix(rng, src.n_samples(), d, -5.0, 20.0);
    const Eigen::MatrixXd xt = testing::random_matrix(rng, testing::uniform_int(rng, 2, 15), d, 5.0, 50.0);

    const auto id = apply_transfer(AlgorithmId::Null, src, xt, {}, 0);
    o.check(id.source_features == src.features && id.target_features == xt && id.source_labels == *src.labels,
            "NULL is not a bitwise identity");

    const auto sa = apply_transfer(AlgorithmId::StatAlign, src, xt, {}, 0);
    for (const Eigen::MatrixXd* z : {&sa.source_features, &sa.target_features})
      for (Eigen::Index j = 0; j < z->cols(); ++j) {
        const double mean = z->col(j).mean();
        const double sd = std::sqrt((z->col(j).array() - mean).square().mean());
        o.check(std::abs(mean) <= 1e-9 && std::abs(sd - 1.0) <= 1e-9, "STAT_ALIGN column not standardised");
      }
  }

  auto standardised_gap = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
    pooled << a, b;
    Eigen::MatrixXd s(pooled.rows(), pooled.cols());
    for (Eigen::Index j = 0; j < pooled.cols(); ++j) {
      const auto col = oracle::standardise({pooled.col(j).begin(), pooled.col(j).end()});
      for (Eigen::Index i = 0; i < pooled.rows(); ++i) s(i, j) = col[static_cast<std::size_t>(i)];
    }
    return (s.topRows(a.rows()).colwise().mean() - s.bottomRows(b.rows()).colwise().mean()).norm();
  };
  Rng fixture(8);
  const Eigen::MatrixXd xs = testing::random_matrix(fixture, 30, 2);
  const Eigen::MatrixXd xt = xs.rowwise() + Eigen::RowVector2d(1.5, -1.0);
  const double before = standardised_gap(xs, xt);
  const auto z = tca(xs, xt, {});
  const double after = standardised_gap(z.source, z.target);
  o.check(after < before, "TCA did not reduce the standardised mean-embedding distance");
  std::ostringstream d;
  d << "TCA gap " << before << " -> " << after;
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome meta_model_sanity() {
  Outcome o;
  const SimilarityMeasure mac_measure = SimilarityMeasure::MAC;
  auto constant = testing::synthetic_records(AlgorithmId::StatAlign, 12,
                                             [](double) { return QualityMeasures{0.8, 0.8, 0.8}; });
  const auto flat = fit_quality_model(constant, AlgorithmId::StatAlign, 0);
  double worst_flat = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double s = i / 10.0;
    const auto q = predict_quality(flat, {mac_measure, s, s, s}, 2000, 5);
    for (QualityComponent c : kQualityComponents) worst_flat = std::max(worst_flat, std::abs(q[c].mean - 0.8));
  }
  o.check(worst_flat <= 0.02, "constant fixture mean off by more than 0.02");

  auto rising = testing::synthetic_records(AlgorithmId::StatAlign, 15, [](double s) {
    const double q = 0.3 + 0.6 * s;
    return QualityMeasures{q, 1.0 - q, 1.0 - q};
  });
  const auto mono = fit_quality_model(rising, AlgorithmId::StatAlign, 0);
  double previous = -1.0;
  bool inside = true;
  for (int i = 0; i <= 20; ++i) {
    const double s = i / 20.0;
    const auto q = predict_quality(mono, {mac_measure, s, s, s}, 2000, 21);
    o.check(q[QualityComponent::Accuracy].mean >= previous - 0.02, "monotone fixture not monotone within 0.02");
    previous = q[QualityComponent::Accuracy].mean;
    for (QualityComponent c : kQualityComponents)
      for (double x : q[c].samples) inside = inside && x > 0.0 && x < 1.0;
  }
  auto step = testing::synthetic_records(AlgorithmId::Tca, 10, [](double s) {
    return QualityMeasures{s < 0.5 ? 0.0 : 1.0, s < 0.5 ? 1.0 : 0.0, 0.5};
  });
  const auto harsh = fit_quality_model(step, AlgorithmId::Tca, 0);
  for (double s : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto q = predict_quality(harsh, {mac_measure, s, s, s}, 2000, 11);
    for (QualityComponent c : kQualityComponents)
      for (double x : q[c].samples) inside = inside && x > 0.0 && x < 1.0;
  }
  o.check(inside, "predictive sample outside (0,1)");
  std::ostringstream d;
  d << "constant fixture worst |mean-0.8| " << worst_flat;
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome decision_invariances() {
  Outcome o;
  const auto s = testing::make_scenario(7);
  const auto base = testing::recommend_for(s, s.spec, 5);
  double worst = 0.0;
  for (double a : {0.001, 0.5, 3.0, 1000.0}) {
    const auto rec = testing::recommend_for(s, testing::scaled(s.spec, a), 5);
    o.check(rec.best == base.best, "argmax changed under cost scaling");
    for (const auto& r : base.ranked)
      for (const auto& q : rec.ranked)
        if (q.strategy == r.strategy && r.evit != 0.0) worst = std::max(worst, std::abs(q.evit - a * r.evit) / std::abs(a * r.evit));
  }
  o.check(worst <= 1e-9, "EVIT scaling deviates beyond rel 1e-9");
  const auto again = testing::recommend_for(s, s.spec, 5);
  o.check(io::to_json(again).dump() == io::to_json(base).dump(), "same-seed Recommendation JSON differs");
  std::ostringstream d;
  d << "worst relative EVIT deviation " << worst << ", JSON identical";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome end_to_end() {
  Outcome o;
  testing::TempDir dir;
  const fs::path config = fs::path(EVIT_CONFIG_DIR) / "run.json";
  int avoided = 0;
  double regret = 0.0, random_regret = 0.0;
  const int n_seeds = 20;
  for (std::uint64_t seed = 1; seed <= static_cast<std::uint64_t>(n_seeds); ++seed) {
    CliOverrides ov;
    ov.seed = seed;
    ov.output_dir = dir.path() / ("s" + std::to_string(seed));
    const RunConfig c = load_run_config(config, ov);
    std::ostringstream sink;
    cmd_generate(c, sink);
    cmd_simulate_records(c, sink);
    cmd_fit(c, sink);
    cmd_recommend(c, sink);
    const auto r = cmd_evaluate(c, sink);
    avoided += r.avoided_negative_transfer ? 1 : 0;
    regret += r.regret;
    random_regret += r.random_transfer_regret;
  }
  regret /= n_seeds;
  random_regret /= n_seeds;
  o.check(avoided >= 16, "avoidance below 16/20");
  o.check(regret <= random_regret, "mean regret above the random-source baseline");
  std::ostringstream d;
  d << "avoided " << avoided << "/" << n_seeds << ", mean regret " << regret << " vs random-source "
    << random_regret;
  o.detail = (o.pass ? "" : o.detail + "; ") + d.str();
  return o;
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run_cli(const std::string& args) {
  const std::string cmd = quote(EVIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_text(e.path());
  return files;
}

Outcome cli_contract() {
  Outcome o;
  testing::TempDir dir;
  const fs::path reference = fs::path(EVIT_CONFIG_DIR) / "run.json";
  const std::string stages[] = {"generate", "simulate-records", "fit", "recommend", "evaluate"};

  o.check(run_cli("generate --config " + quote(dir.path() / "absent.json")) == kExitConfig, "missing config != 2");
  o.check(run_cli("generate") == kExitConfig, "missing --config != 2");
  o.check(run_cli("generate --config " + quote(reference) + " --jobs 0") == kExitConfig, "bad --jobs != 2");
  o.check(run_cli("--help") == kExitOk, "--help != 0");

  io::write_text(dir.path() / "bad.json", "{ not json");
  o.check(run_cli("generate --config " + quote(dir.path() / "bad.json")) == kExitConfig, "malformed config != 2");

  auto single = io::read_json(fs::path(EVIT_CONFIG_DIR) / "population.json");
  single["structures"] = io::Json::parse(R"([{"id": "only", "boundary": "fixed-free"},
                                             {"id": "target", "boundary": "fixed-free"}])");
  io::write_json(dir.path() / "population.json", single);
  auto run = io::read_json(reference);
  run["output_dir"] = "single-out";
  io::write_json(dir.path() / "run.json", run);
  const std::string single_cfg = " --config " + quote(dir.path() / "run.json");
  o.check(run_cli("generate" + single_cfg) == kExitOk, "N_s=1 generate failed");
  o.check(run_cli("simulate-records" + single_cfg) == kExitPrecondition, "N_s=1 simulate-records != 3");
  o.check(run_cli("recommend" + single_cfg) == kExitPrecondition, "N_s=1 recommend != 3");

  const std::string ref_cfg = " --config " + quote(reference);
  const fs::path out = dir.path() / "ref";
  const std::string env = "EVIT_OUT=" + quote(out) + " ";
  auto run_env = [&](const std::string& args) {
    const std::string cmd = env + quote(EVIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  o.check(run_env("evaluate" + ref_cfg) == kExitConfig, "evaluate before generate != 2");
  for (const auto& s : stages) o.check(run_env(s + ref_cfg + " --seed 3") == kExitOk, s + " failed");
  if (!o.pass) return o;
  const auto first = snapshot(out);
  for (const auto& s : stages) o.check(run_env(s + ref_cfg + " --seed 3 --jobs 2") == kExitOk, s + " rerun failed");
  o.check(snapshot(out) == first, "rerun is not byte-identical");
  if (o.pass) o.detail = "exit codes 0/2/3 honoured, " + std::to_string(first.size()) + " artifacts byte-identical";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "EVIT identity", 10, evit_identity},
      {2, "enumeration counts", 5, enumeration_counts},
      {3, "modal correctness", 5, modal_correctness},
      {4, "similarity properties", 0, similarity_properties},
      {5, "transfer properties", 10, transfer_properties},
      {6, "meta-model sanity", 30, meta_model_sanity},
      {7, "utility/decision invariances", 0, decision_invariances},
      {8, "end-to-end negative-transfer avoidance", 300, end_to_end},
      {9, "CLI contract", 0, cli_contract},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0 && secs > c.budget_seconds) {
      o.detail += (o.pass ? "" : "; ") + std::string("over the time budget");
      o.pass = false;
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << c.number << "] " << c.name << ": " << o.detail << " ("
              << std::fixed << std::setprecision(2) << secs << " s)" << std::defaultfloat << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << '\n';
  return failures ? 1 : 0;
}
