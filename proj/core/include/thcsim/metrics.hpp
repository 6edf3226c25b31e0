#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "thcsim/geometry.hpp"
#include "thcsim/sim.hpp"

namespace thcsim {

// Share of records in which any auxiliary UAV's view cone meets any obstacle.
double occlusion_time_pct(const SimHistory& history);
std::vector<double> occlusion_time_pct_per_aux(const SimHistory& history);

// Per record: sum over (aux, obstacle) of the cone/obstacle overlap volume.
std::vector<double> intersection_volume_series(
    const SimHistory& history, double voxels_per_meter = kDefaultVoxelsPerMeter);

struct DistanceErrorStats {
  double max = 0.0;
  double mean = 0.0;
};

// | |q_aux - q_main| - alpha | per auxiliary UAV, over all records.
std::vector<DistanceErrorStats> distance_error_stats(const SimHistory& history,
                                                     double viewpoint_distance);

// uav == 0 is the main UAV, 1..n_aux the auxiliaries.
double path_length(const SimHistory& history, int uav);
double path_length(const SimHistory& history, int uav, int first_step,
                   int last_step);

struct AblationReport {
  std::string scenario_id;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  AblationToggles toggles;
  double occlusion_time_pct = 0.0;
  std::vector<double> occlusion_time_pct_per_aux;
  std::vector<double> intersection_volume_series;
  std::vector<DistanceErrorStats> distance_error;
  std::vector<double> path_length;  // main first, then auxiliaries
};

AblationReport make_report(const SimHistory& history,
                           double voxels_per_meter = kDefaultVoxelsPerMeter);

std::string report_to_json(const AblationReport& report);

// step,time,volume_m3
void write_volume_series_csv(const SimHistory& history,
                             const AblationReport& report, std::ostream& out);
// step,time,aux1_distance,aux1_error,...
void write_distance_series_csv(const SimHistory& history, std::ostream& out);

}  // namespace thcsim
