// evit: transfer-strategy selection by expected value of information transfer.
//
//   evit generate|simulate-records|fit|recommend|evaluate --config <path>
//        [--jobs N] [--seed S]
//
// EVIT_OUT overrides the configured output directory.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "evit/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Select information-transfer strategies for population-based SHM by expected value of information "
               "transfer"};
  app.require_subcommand(1);

  std::string config;
  unsigned jobs = 0;
  std::uint64_t seed = 0;

  const char* kCommands[][2] = {
      {"generate", "Simulate the structure population and write domains + manifest"},
      {"simulate-records", "Run pseudo-target transfers and write similarity/quality training records"},
      {"fit", "Fit per-algorithm quality meta-models from the training records"},
      {"recommend", "Rank candidate transfer strategies by EVIT + transfer cost"},
      {"evaluate", "Score the recommendation against the oracle target labels"},
  };
  for (const auto& [name, help] : kCommands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "Run configuration JSON")->required();
    sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Override the master seed");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : evit::kExitConfig;
  }

  const auto* sub = app.get_subcommands().front();
  evit::CliOverrides overrides;
  if (sub->count("--jobs")) overrides.jobs = jobs;
  if (sub->count("--seed")) overrides.seed = seed;
  return evit::run_command(sub->get_name(), config, overrides, std::cout, std::cerr);
}
