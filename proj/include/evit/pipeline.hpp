#pragma once

// Five-stage file-based pipeline behind the `evit` command line:
//   generate -> simulate-records -> fit -> recommend -> evaluate
// Each stage reads the previous stage's artifacts from the output directory
// and is idempotent for identical inputs and seed.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evit/decision.hpp"
#include "evit/domain.hpp"
#include "evit/enumeration.hpp"
#include "evit/error.hpp"
#include "evit/evaluation.hpp"
#include "evit/io.hpp"
#include "evit/population_sim.hpp"
#include "evit/quality_model.hpp"
#include "evit/random.hpp"
#include "evit/similarity.hpp"
#include "evit/transfer.hpp"

namespace evit {

namespace fs = std::filesystem;

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitPrecondition = 3,
  kExitNumerical = 4,
};

struct RunConfig {
  fs::path population_config;
  std::vector<AlgorithmId> algorithms{AlgorithmId::StatAlign, AlgorithmId::Tca};
  AlgorithmParams params;
  SimilarityMeasure measure = SimilarityMeasure::MAC;
  int n_modes = 0;
  bool include_min_max = false;
  EnumerationConstraints constraints;
  UtilitySpec utility;
  std::uint64_t seed = 0;
  fs::path output_dir = "out";
  unsigned jobs = 1;
};

struct CliOverrides {
  std::optional<unsigned> jobs;
  std::optional<std::uint64_t> seed;
  std::optional<fs::path> output_dir;  // EVIT_OUT
};

/// Relative paths in the run config resolve against the config's directory.
inline RunConfig load_run_config(const fs::path& path, const CliOverrides& overrides = {}) {
  using io::get;
  using io::get_or;
  if (!fs::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  const std::string where = path.string();
  const io::Json j = io::read_json(path);
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  auto resolve = [&](const fs::path& p) { return p.is_absolute() ? p : base / p; };

  RunConfig c;
  c.population_config = resolve(get<std::string>(j, "population_config", where));
  if (!fs::exists(c.population_config))
    throw ConfigError(where + ": population config '" + c.population_config.string() + "' does not exist");
  if (j.contains("algorithms")) {
    c.algorithms.clear();
    for (const auto& name : get<std::vector<std::string>>(j, "algorithms", where))
      c.algorithms.push_back(parse_algorithm(name));
  }
  if (j.contains("params")) c.params = io::params_from_json(j.at("params"), where);
  c.measure = parse_measure(get_or<std::string>(j, "measure", "MAC", where));
  c.n_modes = get_or<int>(j, "n_modes", 0, where);
  c.include_min_max = get_or<bool>(j, "include_min_max", false, where);
  c.seed = get_or<std::uint64_t>(j, "seed", 0, where);
  if (overrides.seed) c.seed = *overrides.seed;
  c.utility = io::utility_from_json(get<io::Json>(j, "utility", where), where);
  if (j.contains("constraints")) {
    c.constraints = io::constraints_from_json(j.at("constraints"), where);
    if (!j.at("constraints").contains("seed")) c.constraints.seed = derive_seed(c.seed, "constraints");
  } else {
    c.constraints.seed = derive_seed(c.seed, "constraints");
  }
  c.output_dir = resolve(get_or<std::string>(j, "output_dir", "out", where));
  if (overrides.output_dir) c.output_dir = *overrides.output_dir;
  if (overrides.jobs) c.jobs = std::max(1u, *overrides.jobs);

  bool any_transfer = false;
  for (AlgorithmId a : c.algorithms) {
    if (a == AlgorithmId::Null) continue;
    any_transfer = true;
    if (!c.utility.cost_per_algorithm.count(a))
      throw ConfigError(where + ": utility.cost_per_algorithm has no entry for " + to_string(a));
  }
  if (!any_transfer) throw ConfigError(where + ": no transfer algorithm configured");
  return c;
}

/// Artifact locations inside the output directory.
struct RunLayout {
  fs::path root;
  fs::path manifest() const { return root / "manifest.json"; }
  fs::path domains() const { return root / "domains"; }
  fs::path oracle_labels(const std::string& target) const { return root / "oracle" / (target + "_labels.csv"); }
  fs::path records() const { return root / "records.csv"; }
  fs::path model(AlgorithmId a) const { return root / "models" / (std::string(to_string(a)) + ".json"); }
  fs::path recommendation() const { return root / "recommendation.json"; }
  fs::path regret_report() const { return root / "regret_report.json"; }
  fs::path sweep() const { return root / "sweep.csv"; }
};

struct Manifest {
  std::vector<std::string> source_ids;
  std::string target_id;
};

inline Manifest read_manifest(const RunLayout& layout) {
  if (!fs::exists(layout.manifest()))
    throw ConfigError("no population manifest at '" + layout.manifest().string() + "'; run `evit generate` first");
  const std::string where = layout.manifest().string();
  const auto j = io::read_json(layout.manifest());
  Manifest m;
  m.source_ids = io::get<std::vector<std::string>>(j, "source_ids", where);
  m.target_id = io::get<std::string>(j, "target_id", where);
  return m;
}

inline std::vector<Domain> read_sources(const RunLayout& layout, const Manifest& m) {
  std::vector<Domain> out;
  for (const auto& id : m.source_ids) out.push_back(io::read_domain(layout.domains(), id));
  return out;
}

inline Population read_population(const RunLayout& layout, const Manifest& m, bool with_oracle_labels) {
  Population p;
  p.source_domains = read_sources(layout, m);
  p.target_domain = io::read_domain(layout.domains(), m.target_id);
  if (with_oracle_labels) {
    const auto path = layout.oracle_labels(m.target_id);
    if (!fs::exists(path)) throw ConfigError("no oracle labels at '" + path.string() + "'");
    p.hidden_target_labels = io::read_labels(path);
  }
  validate(p);
  return p;
}

// --- stages ---------------------------------------------------------------

inline void cmd_generate(const RunConfig& c, std::ostream& out) {
  const auto where = c.population_config.string();
  const auto pop_cfg = io::population_config_from_json(io::read_json(c.population_config), where);
  const auto domains = generate_population(pop_cfg, derive_seed(c.seed, "population"));
  const std::string target_id = pop_cfg.target_id.empty() ? domains.back().id : pop_cfg.target_id;
  const RunLayout layout{c.output_dir};

  io::Json manifest{{"seed", c.seed}, {"n_dof", pop_cfg.n_dof}, {"n_classes", domains.front().n_classes}};
  std::vector<std::string> sources;
  for (const auto& d : domains) {
    if (d.id == target_id) {
      auto hidden = hide_labels(d);
      io::write_domain(layout.domains(), hidden.domain);
      io::write_labels(layout.oracle_labels(d.id), hidden.labels);
    } else {
      io::write_domain(layout.domains(), d);
      sources.push_back(d.id);
    }
  }
  manifest["source_ids"] = sources;
  manifest["target_id"] = target_id;
  manifest["domains_dir"] = "domains";
  manifest["oracle_labels"] = "oracle/" + target_id + "_labels.csv";
  io::write_json(layout.manifest(), manifest);
  out << "generated " << domains.size() << " domains (" << sources.size() << " sources, target " << target_id
      << ") in " << layout.root.string() << '\n';
}

inline void cmd_simulate_records(const RunConfig& c, std::ostream& out) {
  const RunLayout layout{c.output_dir};
  const Manifest m = read_manifest(layout);
  require_multiple_sources(m.source_ids.size(), "simulate-records");
  const auto sources = read_sources(layout, m);
  const auto records = generate_training_records(sources, c.algorithms, c.constraints, c.measure, c.params,
                                                 derive_seed(c.seed, "records"), {c.n_modes, c.jobs});
  io::write_records(layout.records(), records);
  out << "wrote " << records.size() << " training records to " << layout.records().string() << '\n';
}

inline void cmd_fit(const RunConfig& c, std::ostream& out) {
  const RunLayout layout{c.output_dir};
  if (!fs::exists(layout.records()))
    throw ConfigError("no training records at '" + layout.records().string() + "'; run `evit simulate-records` first");
  const auto records = io::read_records(layout.records());
  for (AlgorithmId a : c.algorithms) {
    if (a == AlgorithmId::Null) continue;
    const auto model = fit_quality_model(records, a, derive_seed(c.seed, "fit"), {c.include_min_max});
    io::write_json(layout.model(a), io::to_json(model));
    out << "fitted " << to_string(a) << " quality model -> " << layout.model(a).string() << '\n';
  }
}

inline Recommendation cmd_recommend(const RunConfig& c, std::ostream& out) {
  const RunLayout layout{c.output_dir};
  const Manifest m = read_manifest(layout);
  require_multiple_sources(m.source_ids.size(), "recommend");
  const Population population = read_population(layout, m, false);

  std::map<AlgorithmId, QualityModel> models;
  for (AlgorithmId a : c.algorithms) {
    if (a == AlgorithmId::Null) continue;
    if (!fs::exists(layout.model(a)))
      throw ConfigError("no quality model at '" + layout.model(a).string() + "'; run `evit fit` first");
    models[a] = io::quality_model_from_json(io::read_json(layout.model(a)), layout.model(a).string());
  }
  const std::uint64_t seed = derive_seed(c.seed, "recommend");
  const auto null_dist = null_quality_distribution(population.source_domains, c.utility.n_mc, seed);
  const auto rec = recommend(population, models, null_dist, c.utility, c.constraints, c.measure, seed,
                             {c.n_modes, c.jobs});
  io::write_json(layout.recommendation(), io::to_json(rec));
  out << io::render_table(rec);
  return rec;
}

inline std::string strategy_key(const TransferStrategy& t) {
  return std::string(to_string(t.algorithm)) + ":" +
         io::join(std::vector<std::string>(t.source_ids.begin(), t.source_ids.end()), '|');
}

/// Inserts or replaces the row for `seed` in the sweep CSV.
inline void upsert_sweep_row(const fs::path& path, std::uint64_t seed, const RegretReport& r) {
  const std::string header = "seed,regret,avoided_negative_transfer,recommended_strategy,random_transfer_regret";
  const std::string key = std::to_string(seed);
  const std::string row = key + ',' + io::format_double(r.regret) + ',' + (r.avoided_negative_transfer ? "1" : "0") +
                          ',' + strategy_key(r.recommended) + ',' + io::format_double(r.random_transfer_regret);
  std::vector<std::string> rows;
  if (fs::exists(path)) {
    const auto t = io::read_csv(path);
    if (io::join(t.header, ',') != header) throw ConfigError(path.string() + ": unexpected sweep header");
    for (const auto& cells : t.rows)
      if (cells[0] != key) rows.push_back(io::join(cells, ','));
  }
  rows.push_back(row);
  std::string text = header + '\n';
  for (const auto& r2 : rows) text += r2 + '\n';
  io::write_text(path, text);
}

inline RegretReport cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const RunLayout layout{c.output_dir};
  if (!fs::exists(layout.recommendation()))
    throw ConfigError("no recommendation at '" + layout.recommendation().string() + "'; run `evit recommend` first");
  const auto rec = io::recommendation_from_json(io::read_json(layout.recommendation()), layout.recommendation().string());
  const Manifest m = read_manifest(layout);
  const Population population = read_population(layout, m, true);
  const auto oracle = oracle_sweep(rec, population, c.params, c.utility, derive_seed(c.seed, "oracle"), c.jobs);
  const auto report = regret_report(rec, oracle, c.utility);
  io::write_json(layout.regret_report(), io::to_json(report, oracle));
  upsert_sweep_row(layout.sweep(), c.seed, report);
  out << "recommended: " << describe(report.recommended) << " (realised utility " << report.recommended_utility
      << ")\noracle best: " << describe(report.oracle_best) << " (realised utility " << report.oracle_best_utility
      << ")\nregret: " << report.regret << "\nnegative transfer avoided: "
      << (report.avoided_negative_transfer ? "yes" : "no") << '\n';
  return report;
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e)) return kExitConfig;
  if (dynamic_cast<const PreconditionError*>(&e)) return kExitPrecondition;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return kExitInternal;
}

/// Runs one subcommand; errors are reported on `err` and mapped to exit codes.
inline int run_command(const std::string& command, const fs::path& config_path, CliOverrides overrides,
                       std::ostream& out, std::ostream& err) {
  try {
    if (!overrides.output_dir)
      if (const char* env = std::getenv("EVIT_OUT"); env && *env) overrides.output_dir = fs::path(env);
    const RunConfig c = load_run_config(config_path, overrides);
    if (command == "generate")
      cmd_generate(c, out);
    else if (command == "simulate-records")
      cmd_simulate_records(c, out);
    else if (command == "fit")
      cmd_fit(c, out);
    else if (command == "recommend")
      cmd_recommend(c, out);
    else if (command == "evaluate")
      cmd_evaluate(c, out);
    else
      throw ConfigError("unknown command '" + command + "'");
    return kExitOk;
  } catch (const nlohmann::json::exception& e) {
    err << "evit " << command << ": malformed configuration: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "evit " << command << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace evit
