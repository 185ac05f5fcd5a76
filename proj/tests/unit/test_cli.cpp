#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sstream>

#include "evit/pipeline.hpp"
#include "support/temp_dir.hpp"

namespace evit {
namespace {

namespace fs = std::filesystem;

const char* kPopulation = R"({
  "n_dof": 6, "nominal_masses": 1.0, "nominal_stiffnesses": 1000.0, "perturbation_std": 0.02,
  "structures": [
    {"id": "a", "boundary": "fixed-free"}, {"id": "b", "boundary": "fixed-free", "temperature_factor": 1.05},
    {"id": "c", "boundary": "fixed-fixed"}, {"id": "t", "boundary": "fixed-free", "temperature_factor": 0.97}],
  "damage_states": [{"class_label": 0}, {"class_label": 1, "spring_index": 1, "reduction": 0.4},
                    {"class_label": 2, "spring_index": 5, "reduction": 0.4}],
  "n_per_class": 5, "noise_std": 0.005, "target_id": "t"})";

const char* kSingleSourcePopulation = R"({
  "n_dof": 4, "nominal_masses": 1.0, "nominal_stiffnesses": 100.0, "n_structures": 2,
  "damage_states": [{"class_label": 0}, {"class_label": 1, "spring_index": 1, "reduction": 0.4}],
  "n_per_class": 3, "noise_std": 0.01})";

const char* kRun = R"({
  "population_config": "population.json", "algorithms": ["STAT_ALIGN", "TCA"], "measure": "MAC",
  "constraints": {"mode": "full"},
  "utility": {"prior_damage": 0.3, "cost_inspection": 50, "cost_failure": 100, "accuracy_weight": 100,
              "cost_per_source": 1, "cost_per_algorithm": {"STAT_ALIGN": 1, "TCA": 2}, "n_mc": 300},
  "seed": 11, "output_dir": "out"})";

const std::vector<std::string> kStages{"generate", "simulate-records", "fit", "recommend", "evaluate"};

struct Workspace {
  testing::TempDir dir;
  fs::path config;

  explicit Workspace(const char* population = kPopulation) {
    io::write_text(dir.path() / "population.json", population);
    config = dir.path() / "run.json";
    io::write_text(config, kRun);
  }

  int run(const std::string& command, CliOverrides o = {}) const {
    std::ostringstream out, err;
    return run_command(command, config, o, out, err);
  }
  fs::path out() const { return dir.path() / "out"; }
};

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = io::read_text(e.path());
  return files;
}

TEST(Cli, GenerateWritesManifest) {
  Workspace w;
  ASSERT_EQ(w.run("generate"), kExitOk);
  const auto m = io::read_json(w.out() / "manifest.json");
  EXPECT_EQ(m["source_ids"], io::Json::parse(R"(["a","b","c"])"));
  EXPECT_EQ(m["target_id"], "t");
  EXPECT_FALSE(io::read_domain(w.out() / "domains", "t").labelled());
  EXPECT_TRUE(fs::exists(w.out() / "oracle" / "t_labels.csv"));
}

TEST(Cli, MissingConfigIsConfigError) {
  std::ostringstream out, err;
  EXPECT_EQ(run_command("generate", "/nonexistent/run.json", {}, out, err), kExitConfig);
  EXPECT_FALSE(err.str().empty());
}

TEST(Cli, MalformedConfigIsConfigError) {
  Workspace w;
  io::write_text(w.config, "{ not json");
  EXPECT_EQ(w.run("generate"), kExitConfig);
  io::write_text(w.config, R"({"population_config": "population.json", "utility": {"prior_damage": "x"}})");
  EXPECT_EQ(w.run("generate"), kExitConfig);
}

TEST(Cli, StagesNeedPriorOutputs) {
  Workspace w;
  EXPECT_EQ(w.run("simulate-records"), kExitConfig);
  ASSERT_EQ(w.run("generate"), kExitOk);
  EXPECT_EQ(w.run("fit"), kExitConfig);
  EXPECT_EQ(w.run("recommend"), kExitConfig);
  EXPECT_EQ(w.run("evaluate"), kExitConfig);
}

TEST(Cli, SingleSourcePopulationIsPreconditionFailure) {
  Workspace w(kSingleSourcePopulation);
  ASSERT_EQ(w.run("generate"), kExitOk);
  std::ostringstream out, err;
  EXPECT_EQ(run_command("recommend", w.config, {}, out, err), kExitPrecondition);
  EXPECT_NE(err.str().find("greater than 1"), std::string::npos);
  EXPECT_EQ(w.run("simulate-records"), kExitPrecondition);
}

TEST(Cli, FullPipelineIsByteIdenticalOnRerun) {
  Workspace w;
  for (const auto& s : kStages) ASSERT_EQ(w.run(s), kExitOk) << s;
  const auto first = snapshot(w.out());
  for (const auto& s : kStages) ASSERT_EQ(w.run(s), kExitOk) << s;
  EXPECT_EQ(snapshot(w.out()), first);

  const auto rec = io::read_json(w.out() / "recommendation.json");
  bool found_null = false;
  for (const auto& row : rec["ranked"])
    if (row["strategy"]["source_ids"].empty()) {
      found_null = true;
      EXPECT_EQ(row["evit"].get<double>(), 0.0);
    }
  EXPECT_TRUE(found_null);
  EXPECT_TRUE(fs::exists(w.out() / "regret_report.json"));
}

TEST(Cli, JobsDoNotChangeOutputs) {
  Workspace w;
  for (const auto& s : kStages) ASSERT_EQ(w.run(s), kExitOk);
  const auto serial = snapshot(w.out());
  fs::remove_all(w.out());
  CliOverrides o;
  o.jobs = 3;
  for (const auto& s : kStages) ASSERT_EQ(w.run(s, o), kExitOk);
  EXPECT_EQ(snapshot(w.out()), serial);
}

TEST(Cli, SeedOverrideAndSweepUpsert) {
  Workspace w;
  CliOverrides o;
  for (std::uint64_t seed : {1u, 2u, 1u}) {
    o.seed = seed;
    for (const auto& s : kStages) ASSERT_EQ(w.run(s, o), kExitOk);
  }
  const auto sweep = io::read_csv(w.out() / "sweep.csv");
  ASSERT_EQ(sweep.rows.size(), 2u);
  EXPECT_EQ(sweep.rows[0][0], "2");
  EXPECT_EQ(sweep.rows[1][0], "1");
  EXPECT_EQ(io::read_json(w.out() / "manifest.json")["seed"], 1);
}

TEST(Cli, OutputOverride) {
  Workspace w;
  CliOverrides o;
  o.output_dir = w.dir.path() / "elsewhere";
  ASSERT_EQ(w.run("generate", o), kExitOk);
  EXPECT_TRUE(fs::exists(w.dir.path() / "elsewhere" / "manifest.json"));
  EXPECT_FALSE(fs::exists(w.out()));
}

TEST(Cli, ExitCodeTable) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), kExitConfig);
  EXPECT_EQ(exit_code_for(ValidationError("x")), kExitConfig);
  EXPECT_EQ(exit_code_for(PreconditionError("x")), kExitPrecondition);
  EXPECT_EQ(exit_code_for(NumericalError("x")), kExitNumerical);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitInternal);
}

std::string shell_quote(const fs::path& p) { return "'" + p.string() + "'"; }

int run_binary(const std::string& args, const fs::path& env_out = {}) {
  std::string cmd;
  if (!env_out.empty()) cmd += "EVIT_OUT=" + shell_quote(env_out) + " ";
  cmd += shell_quote(EVIT_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(CliBinary, ExitCodesAndEnvOverride) {
  Workspace w;
  const std::string cfg = " --config " + shell_quote(w.config);
  EXPECT_EQ(run_binary("generate --config /nonexistent.json"), kExitConfig);
  EXPECT_EQ(run_binary("bogus" + cfg), kExitConfig);
  EXPECT_EQ(run_binary("generate"), kExitConfig);
  EXPECT_EQ(run_binary("generate" + cfg + " --jobs 0"), kExitConfig);
  EXPECT_EQ(run_binary("--help"), kExitOk);
  EXPECT_EQ(run_binary("generate" + cfg, w.dir.path() / "env"), kExitOk);
  EXPECT_TRUE(fs::exists(w.dir.path() / "env" / "manifest.json"));
  EXPECT_EQ(run_binary("evaluate" + cfg, w.dir.path() / "env"), kExitConfig);

  Workspace single(kSingleSourcePopulation);
  const std::string cfg1 = " --config " + shell_quote(single.config);
  EXPECT_EQ(run_binary("generate" + cfg1), kExitOk);
  EXPECT_EQ(run_binary("recommend" + cfg1), kExitPrecondition);
}

}  // namespace
}  // namespace evit
