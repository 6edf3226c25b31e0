#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thcsim/config.hpp"
#include "thcsim/error.hpp"
#include "thcsim_cli/cli.hpp"

using namespace thcsim;

namespace {

const std::map<std::string, GoalController> kControllers{{"pic", GoalController::kPic},
                                                         {"pid", GoalController::kPid}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Multi-UAV occlusion-aware viewpoint simulator.\n"
      "Without a subcommand, runs one scenario and writes history.csv, report.json,\n"
      "volume_series.csv and distance_series.csv to --out.\n"
      "Exit codes: 0 ok, 1 usage, 2 invalid config, 3 divergent rollouts, 4 run or I/O failure."};
  app.set_version_flag("--version", "thcsim 0.1.0");

  cli::RunRequest req;
  std::string scenario, config_path;
  std::uint64_t seed = 0;
  bool disable_task2 = false, disable_task3 = false;
  auto* scenario_opt = app.add_option("--scenario", scenario, "Builtin scenario id (1-5)");
  auto* config_opt = app.add_option("--config", config_path, "Scenario configuration JSON file")
                         ->check(CLI::ExistingFile);
  scenario_opt->excludes(config_opt);
  auto* seed_opt = app.add_option("--seed", seed, "Override the configuration seed");
  app.add_flag("--disable-task2", disable_task2, "Switch off distance keeping");
  app.add_flag("--disable-task3", disable_task3, "Switch off line-of-sight avoidance");
  app.add_option("--controller", req.controller, "Goal controller")
      ->transform(CLI::CheckedTransformer(kControllers, CLI::ignore_case))
      ->default_str("pic");
  app.add_option("--out", req.out_dir, "Output directory")->default_str("out");
  app.add_option("--volume-resolution", req.volume_resolution,
                 "Voxels per metre for intersection volumes")
      ->check(CLI::PositiveNumber)
      ->default_val(kDefaultVoxelsPerMeter);

  cli::AblationRequest grid;
  std::vector<std::string> grid_scenarios{"1", "2", "3", "4", "5"};
  std::vector<std::uint64_t> grid_seeds{7};
  auto* ablation = app.add_subcommand(
      "ablation", "Run the 2x2x2 toggle grid (Task 2, Task 3, PIC/PID) per scenario and seed");
  ablation->add_option("--scenarios", grid_scenarios, "Builtin ids or config files")
      ->default_str("1 2 3 4 5");
  ablation->add_option("--seeds", grid_seeds, "Seeds")->default_str("7");
  ablation->add_option("--out", grid.out_dir, "Output directory")->default_str("ablation");
  ablation->add_option("--volume-resolution", grid.volume_resolution,
                       "Voxels per metre for intersection volumes")
      ->check(CLI::PositiveNumber)
      ->default_val(kDefaultVoxelsPerMeter);
  ablation->add_option("--jobs", grid.workers, "Worker threads (0: one per core)")
      ->default_val(0);

  std::string validate_path;
  auto* validate = app.add_subcommand("validate", "Check a configuration file and list violations");
  validate->add_option("config", validate_path, "Configuration JSON file")->required();

  int export_id = 1;
  std::string export_path;
  auto* export_cmd =
      app.add_subcommand("export-scenario", "Write a builtin scenario as canonical JSON");
  export_cmd->add_option("id", export_id, "Builtin scenario id (1-5)")->required();
  export_cmd->add_option("--out", export_path, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  if (ablation->parsed()) {
    grid.scenarios = grid_scenarios;
    grid.seeds = grid_seeds;
    return cli::run_ablation(grid, std::cout);
  }

  if (validate->parsed()) {
    try {
      const auto violations = validate_config(load_config(validate_path));
      for (const auto& v : violations) {
        std::cout << v.code << " at " << v.path << ": " << v.message << '\n';
      }
      if (violations.empty()) std::cout << "ok\n";
      return violations.empty() ? cli::kExitOk : cli::kExitBadConfig;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::kExitBadConfig;
    }
  }

  if (export_cmd->parsed()) {
    try {
      const std::string text = serialize_config(builtin_scenario(export_id));
      if (export_path.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(export_path, std::ios::binary);
        out << text;
        if (!out) {
          std::cerr << "error: cannot write " << export_path << '\n';
          return cli::kExitRunFailed;
        }
      }
      return cli::kExitOk;
    } catch (const Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return cli::kExitUsage;
    }
  }

  if (scenario.empty() && config_path.empty()) {
    std::cerr << "error: one of --scenario or --config is required\n" << app.help();
    return cli::kExitUsage;
  }
  req.scenario = config_path.empty() ? scenario : config_path;
  if (*seed_opt) req.seed = seed;
  req.task2 = !disable_task2;
  req.task3 = !disable_task3;
  const int code = cli::run_single(req, std::cerr);
  if (code == cli::kExitOk) std::cout << "wrote " << req.out_dir.string() << '\n';
  return code;
}
