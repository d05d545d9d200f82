// nfl — numerical laboratory for Neumann heat-flow rate experiments.
//
// Subcommands:
//   nfl run <config.json>       run one experiment, write CSV + JSON summary
//   nfl list-experiments        print the available experiment names
//   nfl validate <config.json>  check a config without running anything
//
// Exit codes: 0 all bands passed (or nothing to check), 1 a band failed,
// 2 invalid config, 3 runtime error.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "nfl/experiments.hpp"

namespace {

void print_report(const nfl::ExperimentReport& r) {
  std::printf("experiment: %s\n", r.experiment.c_str());
  std::printf("fitted: S_hat=%.6g C_hat=%.6g", r.S_hat, r.C_hat);
  for (const auto& [k, v] : r.fitted_extra) std::printf(" %s=%.6g", k.c_str(), v);
  std::printf("\n");
  for (const auto& b : r.bands)
    std::printf("  [%s] %-24s value=%-12.6g band=[%.6g, %.6g]\n",
                b.pass ? "PASS" : "FAIL", b.name.c_str(), b.value, b.lo, b.hi);
  std::printf("csv: %s\nsummary: %s\n", r.csv_path.c_str(), r.json_path.c_str());
  std::printf("%s\n", r.pass ? "PASS" : "FAIL");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for Neumann heat-flow rate experiments"};
  app.require_subcommand(1);

  std::string run_config, validate_config;
  CLI::App* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("config", run_config, "path to config JSON")->required();
  CLI::App* list = app.add_subcommand("list-experiments", "print available experiments");
  CLI::App* validate = app.add_subcommand("validate", "check a config without running");
  validate->add_option("config", validate_config, "path to config JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& [name, blurb] : nfl::list_experiments())
        std::printf("%-18s %s\n", name.c_str(), blurb.c_str());
      return 0;
    }
    if (validate->parsed()) {
      nfl::ExperimentConfig::from_json_file(validate_config);
      std::printf("ok\n");
      return 0;
    }
    const auto cfg = nfl::ExperimentConfig::from_json_file(run_config);
    const auto report = nfl::run_experiment(cfg);
    print_report(report);
    return report.pass ? 0 : 1;
  } catch (const nfl::ConfigInvalid& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
