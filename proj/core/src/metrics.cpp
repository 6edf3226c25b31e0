#include "thcsim/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include <json.hpp>

namespace thcsim {

namespace {

bool any_occluded(const AuxRecord& a) {
  for (bool o : a.occluded) {
    if (o) return true;
  }
  return false;
}

double record_count(const SimHistory& history) {
  return static_cast<double>(history.steps.size());
}

void write_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

double occlusion_time_pct(const SimHistory& history) {
  if (history.steps.empty()) return 0.0;
  std::size_t hits = 0;
  for (const StepRecord& rec : history.steps) {
    for (const AuxRecord& a : rec.aux) {
      if (any_occluded(a)) {
        ++hits;
        break;
      }
    }
  }
  return 100.0 * static_cast<double>(hits) / record_count(history);
}

std::vector<double> occlusion_time_pct_per_aux(const SimHistory& history) {
  const std::size_t n = static_cast<std::size_t>(history.config.n_aux);
  std::vector<double> pct(n, 0.0);
  if (history.steps.empty()) return pct;
  for (const StepRecord& rec : history.steps) {
    for (std::size_t u = 0; u < n; ++u) {
      if (any_occluded(rec.aux[u])) pct[u] += 1.0;
    }
  }
  for (double& p : pct) p = 100.0 * p / record_count(history);
  return pct;
}

std::vector<double> intersection_volume_series(const SimHistory& history,
                                               double voxels_per_meter) {
  const auto& cfg = history.config;
  std::vector<double> series;
  series.reserve(history.steps.size());
  for (const StepRecord& rec : history.steps) {
    double total = 0.0;
    for (const AuxRecord& a : rec.aux) {
      for (std::size_t o = 0; o < cfg.obstacles.size(); ++o) {
        if (!a.occluded[o]) continue;
        const ViewCone cone{a.state.position, rec.main.position, cfg.params.fov_apex_angle};
        total += fov_obstacle_intersection_volume(cone, cfg.obstacles[o], voxels_per_meter);
      }
    }
    series.push_back(total);
  }
  return series;
}

std::vector<DistanceErrorStats> distance_error_stats(const SimHistory& history,
                                                     double viewpoint_distance) {
  const std::size_t n = static_cast<std::size_t>(history.config.n_aux);
  std::vector<DistanceErrorStats> stats(n);
  if (history.steps.empty()) return stats;
  for (const StepRecord& rec : history.steps) {
    for (std::size_t u = 0; u < n; ++u) {
      const double e = std::abs(
          (rec.aux[u].state.position - rec.main.position).norm() - viewpoint_distance);
      stats[u].max = std::max(stats[u].max, e);
      stats[u].mean += e;
    }
  }
  for (auto& s : stats) s.mean /= record_count(history);
  return stats;
}

double path_length(const SimHistory& history, int uav, int first_step, int last_step) {
  auto position = [&](const StepRecord& rec) -> const Vec3& {
    return uav == 0 ? rec.main.position
                    : rec.aux[static_cast<std::size_t>(uav - 1)].state.position;
  };
  double total = 0.0;
  for (int k = first_step; k < last_step; ++k) {
    total += (position(history.steps[static_cast<std::size_t>(k + 1)]) -
              position(history.steps[static_cast<std::size_t>(k)]))
                 .norm();
  }
  return total;
}

double path_length(const SimHistory& history, int uav) {
  if (history.steps.empty()) return 0.0;
  return path_length(history, uav, 0, static_cast<int>(history.steps.size()) - 1);
}

AblationReport make_report(const SimHistory& history, double voxels_per_meter) {
  const auto& cfg = history.config;
  AblationReport r;
  r.scenario_id = cfg.id;
  r.config_hash = config_hash(cfg);
  r.seed = cfg.seed;
  r.toggles = cfg.ablation;
  r.occlusion_time_pct = occlusion_time_pct(history);
  r.occlusion_time_pct_per_aux = occlusion_time_pct_per_aux(history);
  r.intersection_volume_series = intersection_volume_series(history, voxels_per_meter);
  r.distance_error = distance_error_stats(history, cfg.params.viewpoint_distance);
  for (int uav = 0; uav <= cfg.n_aux; ++uav) r.path_length.push_back(path_length(history, uav));
  return r;
}

std::string report_to_json(const AblationReport& report) {
  using json = nlohmann::ordered_json;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(report.config_hash));

  json distance = json::array();
  for (std::size_t u = 0; u < report.distance_error.size(); ++u) {
    distance.push_back({{"aux", u + 1},
                        {"max", report.distance_error[u].max},
                        {"mean", report.distance_error[u].mean}});
  }
  double volume_max = 0.0, volume_sum = 0.0;
  for (double v : report.intersection_volume_series) {
    volume_max = std::max(volume_max, v);
    volume_sum += v;
  }
  json paths;
  paths["main"] = report.path_length.empty() ? 0.0 : report.path_length.front();
  json aux_paths = json::array();
  for (std::size_t i = 1; i < report.path_length.size(); ++i) aux_paths.push_back(report.path_length[i]);
  paths["aux"] = aux_paths;

  json j;
  j["metadata"] = {{"scenario", report.scenario_id},
                   {"config_hash", hash},
                   {"seed", report.seed},
                   {"toggles",
                    {{"task1", report.toggles.task1},
                     {"task2", report.toggles.task2},
                     {"task3", report.toggles.task3},
                     {"controller", to_string(report.toggles.controller)}}}};
  j["occlusion_time_pct"] = {{"combined", report.occlusion_time_pct},
                             {"per_aux", report.occlusion_time_pct_per_aux}};
  j["intersection_volume"] = {{"max_m3", volume_max},
                              {"mean_m3", report.intersection_volume_series.empty()
                                              ? 0.0
                                              : volume_sum / static_cast<double>(
                                                                 report.intersection_volume_series.size())},
                              {"series_m3", report.intersection_volume_series}};
  j["distance_error_m"] = distance;
  j["path_length_m"] = paths;
  return j.dump(2) + "\n";
}

void write_volume_series_csv(const SimHistory& history, const AblationReport& report,
                             std::ostream& out) {
  out << "step,time,volume_m3\n";
  for (std::size_t k = 0; k < history.steps.size(); ++k) {
    out << history.steps[k].step << ',';
    write_double(out, history.steps[k].time);
    out << ',';
    write_double(out, report.intersection_volume_series[k]);
    out << '\n';
  }
}

void write_distance_series_csv(const SimHistory& history, std::ostream& out) {
  const int n = history.config.n_aux;
  const double alpha = history.config.params.viewpoint_distance;
  out << "step,time";
  for (int u = 1; u <= n; ++u) out << ",aux" << u << "_distance,aux" << u << "_error";
  out << '\n';
  for (const StepRecord& rec : history.steps) {
    out << rec.step << ',';
    write_double(out, rec.time);
    for (const AuxRecord& a : rec.aux) {
      const double d = (a.state.position - rec.main.position).norm();
      out << ',';
      write_double(out, d);
      out << ',';
      write_double(out, std::abs(d - alpha));
    }
    out << '\n';
  }
}

}  // namespace thcsim
