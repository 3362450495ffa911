// Command-line runner for the experiment scenarios.
//
//   torpsi list
//   torpsi run <config-file> [--out DIR] [--plot] [--seed N]
//
// Exit codes: 0 all verdicts pass, 1 usage or configuration error, 2 a verdict
// failed, 3 numerical abort.

#include <iostream>

#include "CLI11.hpp"
#include "torpsi/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Toroidal pseudo-differential operators and hyperbolic solver experiments"};
  app.require_subcommand(1);

  auto* list = app.add_subcommand("list", "list scenarios, what they exercise and their CSV columns");
  auto* run = app.add_subcommand("run", "run the scenario described by a config file");
  std::string config_path;
  std::string out_dir;
  bool plot = false;
  long long seed = 0;
  run->add_option("config", config_path, "key = value configuration file")->required();
  auto* out_opt = run->add_option("--out", out_dir, "output directory (default: config 'out' or ./out)");
  run->add_flag("--plot", plot, "also write SVG line plots");
  auto* seed_opt = run->add_option("--seed", seed, "seed for randomized inputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (list->parsed()) {
    std::cout << torpsi::list_scenarios();
    return 0;
  }

  torpsi::RunOptions options;
  options.plot = plot;
  if (*out_opt) options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  try {
    const auto config = torpsi::ExperimentConfig::load(config_path);
    const auto report = torpsi::run(config, options);
    torpsi::print_report(std::cout, report);
    return torpsi::exit_code(report);
  } catch (const torpsi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const torpsi::Error& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return 3;
  }
}
