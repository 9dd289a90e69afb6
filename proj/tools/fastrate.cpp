#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "fastrate/errors.hpp"
#include "fastrate/experiment.hpp"

namespace {

struct CliOverrides {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool fast = false;
};

fastrate::ExperimentConfig resolve_config(const CliOverrides& cli) {
  fastrate::ExperimentConfig cfg;
  if (cli.config_path) cfg = fastrate::load_config(*cli.config_path);
  if (cli.seed) cfg.seed = *cli.seed;
  if (cli.out_dir) cfg.out_dir = *cli.out_dir;
  if (cli.fast) cfg.fast = true;
  return cfg;
}

int print_oracle_report(const fastrate::OracleCheckReport& report) {
  for (const auto& row : report.rows) {
    const char* status = row.skipped ? "SKIP" : (row.pass ? "PASS" : "FAIL");
    std::printf("[%s] %-32s %s\n", status, row.name.c_str(), row.detail.c_str());
  }
  std::printf("%s\n", report.all_pass ? "all checks passed" : "some checks FAILED");
  return report.all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalization-bound experiment toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOverrides cli;
  app.add_option("--config", cli.config_path, "Experiment config file");
  app.add_option("--seed", cli.seed, "Master RNG seed override");
  app.add_option("--out", cli.out_dir, "Output directory override");
  app.add_flag("--fast", cli.fast, "Reduced replicate counts for CI");

  auto* sim = app.add_subcommand("simulate", "Run replicates and dump them per n");
  auto* ana = app.add_subcommand("analyze", "Estimate risks, MI and bounds; write CSV");
  auto* plot = app.add_subcommand("plot", "Render SVG plots from an analysis CSV");
  std::string plot_csv;
  plot->add_option("csv", plot_csv, "Analysis CSV (defaults to the analyze output)");
  auto* oracle = app.add_subcommand("oracle-check", "Run the calibration suite");
  auto* all = app.add_subcommand("all", "simulate + analyze + plot + oracle-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a config error
  }

  try {
    const fastrate::ExperimentConfig cfg = resolve_config(cli);
    if (sim->parsed()) {
      fastrate::cmd_simulate(cfg);
      std::printf("wrote replicate dumps to %s\n", cfg.out_dir.c_str());
      return 0;
    }
    if (ana->parsed()) {
      const auto result = fastrate::cmd_analyze(cfg);
      std::printf("wrote %s (%zu rows)\n", result.csv_path.c_str(),
                  result.rows.size());
      return 0;
    }
    if (plot->parsed()) {
      const std::string csv = plot_csv.empty()
                                  ? cfg.out_dir + "/analysis_" + cfg.problem + ".csv"
                                  : plot_csv;
      fastrate::cmd_plot(cfg, csv);
      std::printf("wrote plots to %s\n", cfg.out_dir.c_str());
      return 0;
    }
    if (oracle->parsed()) {
      return print_oracle_report(fastrate::run_oracle_check(cfg));
    }
    if (all->parsed()) {
      fastrate::cmd_simulate(cfg);
      const auto result = fastrate::cmd_analyze(cfg);
      fastrate::cmd_plot(cfg, result.csv_path);
      return print_oracle_report(fastrate::run_oracle_check(cfg));
    }
  } catch (const fastrate::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
