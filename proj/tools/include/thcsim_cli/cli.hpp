#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "thcsim/config.hpp"
#include "thcsim/geometry.hpp"

namespace thcsim::cli {

// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitBadConfig = 2,
  kExitDivergent = 3,
  kExitRunFailed = 4,  // I/O failure, or some ablation run did not complete
};

struct RunRequest {
  std::string scenario;  // builtin id "1".."5" or path to a JSON config
  bool task2 = true;
  bool task3 = true;
  GoalController controller = GoalController::kPic;
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::filesystem::path out_dir = "out";
  double volume_resolution = kDefaultVoxelsPerMeter;
};

// Builtin id or file path. Throws Error(kUnknownScenario / kInvalidConfig).
ScenarioConfig resolve_scenario(const std::string& scenario);

// Applies the request toggles and seed on top of the loaded configuration.
ScenarioConfig request_config(const RunRequest& req);

// Writes history.csv, report.json, volume_series.csv and distance_series.csv
// into req.out_dir. Diagnostics go to `log`.
int run_single(const RunRequest& req, std::ostream& log);

struct AblationRequest {
  std::vector<std::string> scenarios;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir = "ablation";
  double volume_resolution = kDefaultVoxelsPerMeter;
  unsigned workers = 0;  // 0: hardware concurrency
};

// 2 x 2 x 2 toggle grid per (scenario, seed). Each run writes to its own
// subdirectory; summary.csv and checks.csv land in out_dir.
int run_ablation(const AblationRequest& req, std::ostream& log);

// The eight toggle combinations in grid order.
std::vector<AblationToggles> ablation_grid();

// Subdirectory name of one grid cell, e.g. "s1_seed7_t2on_t3off_pic".
std::string run_directory_name(const std::string& scenario, std::uint64_t seed,
                               const AblationToggles& toggles);

}  // namespace thcsim::cli
