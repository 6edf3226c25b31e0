#include "thcsim/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "thcsim/error.hpp"
#include "thcsim/viewpoints.hpp"

namespace thcsim {

using json = nlohmann::ordered_json;

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateSegment: return "DegenerateSegment";
    case ErrorCode::kAxialObstacle: return "AxialObstacle";
    case ErrorCode::kSingularField: return "SingularField";
    case ErrorCode::kDivergentRollouts: return "DivergentRollouts";
    case ErrorCode::kUnknownScenario: return "UnknownScenario";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

const char* to_string(MainActivity activity) {
  return activity == MainActivity::kReachability ? "reachability"
                                                 : "manipulability";
}

const char* to_string(GoalController controller) {
  return controller == GoalController::kPic ? "pic" : "pid";
}

Vec3 clamp_norm(const Vec3& v, double limit) {
  const double n = v.norm();
  if (!(n > limit) || n == 0.0) return v;
  Vec3 out = v * (limit / n);
  // Rounding can leave the scaled norm one ulp above the limit.
  double scale = 1.0;
  while (out.norm() > limit) {
    scale = std::nextafter(scale, 0.0);
    out = v * (limit / n) * scale;
  }
  return out;
}

MainActivity ScenarioConfig::activity_at(int step) const {
  MainActivity activity = MainActivity::kReachability;
  for (const auto& sw : main_task_schedule) {
    if (sw.step > step) break;
    activity = sw.activity;
  }
  return activity;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class ViolationSink {
 public:
  void add(std::string code, std::string path, std::string message) {
    out_.push_back({std::move(code), std::move(path), std::move(message)});
  }

  void positive(double v, const std::string& path) {
    if (!std::isfinite(v) || v <= 0.0) add("not_positive", path, "must be > 0");
  }

  void nonnegative(double v, const std::string& path) {
    if (!std::isfinite(v) || v < 0.0) add("negative", path, "must be >= 0");
  }

  void finite(const Vec3& v, const std::string& path) {
    if (!all_finite(v)) add("non_finite", path, "components must be finite");
  }

  void in_bounds(const Vec3& v, const Bounds& b, const std::string& path) {
    if (!all_finite(v)) {
      add("non_finite", path, "components must be finite");
    } else if (!b.contains(v)) {
      add("out_of_bounds", path, "lies outside the environment bounds");
    }
  }

  std::vector<Violation> take() { return std::move(out_); }

 private:
  std::vector<Violation> out_;
};

std::string index_path(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

}  // namespace

std::vector<Violation> validate_config(const ScenarioConfig& cfg) {
  ViolationSink sink;
  const Bounds& b = cfg.bounds;

  sink.finite(b.lower, "bounds.lower");
  sink.finite(b.upper, "bounds.upper");
  if (all_finite(b.lower) && all_finite(b.upper) &&
      !(b.upper.array() > b.lower.array()).all()) {
    sink.add("empty_bounds", "bounds", "upper must exceed lower on every axis");
  }

  for (std::size_t i = 0; i < cfg.obstacles.size(); ++i) {
    const auto base = index_path("obstacles", i);
    sink.in_bounds(cfg.obstacles[i].center, b, base + ".center");
    sink.positive(cfg.obstacles[i].radius, base + ".radius");
  }

  if (cfg.n_aux < 1) sink.add("not_positive", "n_aux", "at least one auxiliary UAV");
  if (cfg.aux_start.size() != static_cast<std::size_t>(std::max(cfg.n_aux, 0))) {
    sink.add("size_mismatch", "aux_start", "needs one start position per auxiliary UAV");
  }
  for (std::size_t i = 0; i < cfg.aux_start.size(); ++i) {
    sink.in_bounds(cfg.aux_start[i], b, index_path("aux_start", i));
    for (const auto& obs : cfg.obstacles) {
      if ((cfg.aux_start[i] - obs.center).norm() <= obs.radius) {
        sink.add("inside_obstacle", index_path("aux_start", i), "starts inside an obstacle");
        break;
      }
    }
  }

  if (!cfg.waypoint_schedule.empty() &&
      cfg.waypoint_schedule.size() != static_cast<std::size_t>(std::max(cfg.n_aux, 0))) {
    sink.add("size_mismatch", "waypoint_schedule",
             "must be empty or hold one list per auxiliary UAV");
  }
  for (std::size_t u = 0; u < cfg.waypoint_schedule.size(); ++u) {
    for (std::size_t i = 0; i < cfg.waypoint_schedule[u].size(); ++i) {
      sink.in_bounds(cfg.waypoint_schedule[u][i], b,
                     index_path(index_path("waypoint_schedule", u), i));
    }
  }

  const auto& traj = cfg.main_trajectory;
  if (traj.kind == TrajectoryScript::Kind::kPolyline) {
    if (traj.waypoints.empty()) {
      sink.add("empty", "main_trajectory.waypoints", "polyline needs a vertex");
    }
    for (std::size_t i = 0; i < traj.waypoints.size(); ++i) {
      sink.in_bounds(traj.waypoints[i], b, index_path("main_trajectory.waypoints", i));
    }
    sink.nonnegative(traj.speed, "main_trajectory.speed");
  } else {
    sink.in_bounds(traj.center, b, "main_trajectory.center");
    sink.finite(traj.amplitude, "main_trajectory.amplitude");
    sink.positive(traj.period, "main_trajectory.period");
    if (all_finite(traj.center) && all_finite(traj.amplitude)) {
      const Vec3 reach = traj.amplitude.cwiseAbs();
      if (!b.contains(traj.center + reach) || !b.contains(traj.center - reach)) {
        sink.add("out_of_bounds", "main_trajectory.amplitude",
                 "figure-eight leaves the environment bounds");
      }
    }
  }
  const double v_max = cfg.params.speed_limit;
  if (std::isfinite(v_max) && traj.max_speed() > v_max + 1e-12) {
    sink.add("too_fast", "main_trajectory", "main UAV speed exceeds params.speed_limit");
  }

  for (std::size_t i = 0; i < cfg.main_task_schedule.size(); ++i) {
    const auto path = index_path("main_task_schedule", i);
    if (cfg.main_task_schedule[i].step < 0) {
      sink.add("negative", path + ".step", "must be >= 0");
    }
    if (i > 0 && cfg.main_task_schedule[i].step < cfg.main_task_schedule[i - 1].step) {
      sink.add("unsorted", path + ".step", "schedule must be sorted by step");
    }
  }

  const SimParams& p = cfg.params;
  sink.positive(p.sampling_time, "params.sampling_time");
  if (p.step_count < 1) sink.add("not_positive", "params.step_count", "must be >= 1");
  if (!(p.fov_apex_angle > 0.0 && p.fov_apex_angle < std::numbers::pi)) {
    sink.add("out_of_range", "params.fov_apex_angle", "must lie in (0, pi)");
  }
  sink.positive(p.los_margin, "params.los_margin");
  sink.positive(p.viewpoint_distance, "params.viewpoint_distance");
  sink.positive(p.collision_influence_radius, "params.collision_influence_radius");
  sink.positive(p.accel_limit, "params.accel_limit");
  sink.positive(p.speed_limit, "params.speed_limit");
  sink.nonnegative(p.dls_damping, "params.dls_damping");
  sink.positive(p.waypoint_radius, "params.waypoint_radius");
  if (p.waypoint_refresh_steps < 1) {
    sink.add("not_positive", "params.waypoint_refresh_steps", "must be >= 1");
  }
  sink.nonnegative(p.goal_bounds_margin, "params.goal_bounds_margin");

  const ControllerGains& g = p.gains;
  sink.nonnegative(g.k_p, "params.gains.k_p");
  sink.nonnegative(g.k_d, "params.gains.k_d");
  sink.nonnegative(g.k_i, "params.gains.k_i");
  if (std::isfinite(g.k_p) && std::isfinite(g.k_d) && g.k_p <= 0.0 && g.k_d <= 0.0) {
    sink.add("no_feedback", "params.gains", "one of k_p, k_d must be > 0");
  }
  sink.nonnegative(g.integral_limit, "params.gains.integral_limit");
  sink.nonnegative(g.distance.k_p, "params.gains.distance.k_p");
  sink.nonnegative(g.distance.k_d, "params.gains.distance.k_d");
  sink.positive(g.repulsion_gain, "params.gains.repulsion_gain");
  sink.nonnegative(g.pid_goal.k_p, "params.gains.pid_goal.k_p");
  sink.nonnegative(g.pid_goal.k_d, "params.gains.pid_goal.k_d");

  const PicParams& pic = g.pic;
  if (pic.horizon < 1) sink.add("not_positive", "params.gains.pic.horizon", "must be >= 1");
  if (pic.samples < 1) sink.add("not_positive", "params.gains.pic.samples", "must be >= 1");
  sink.nonnegative(pic.noise_sigma, "params.gains.pic.noise_sigma");
  sink.positive(pic.temperature, "params.gains.pic.temperature");
  sink.nonnegative(pic.control_cost, "params.gains.pic.control_cost");
  sink.nonnegative(pic.obstacle_penalty, "params.gains.pic.obstacle_penalty");
  sink.positive(pic.goal_weight, "params.gains.pic.goal_weight");

  return sink.take();
}

// ---------------------------------------------------------------------------
// JSON

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::kInvalidConfig, "expected [x, y, z], got " + j.dump());
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json vec_list_to_json(const std::vector<Vec3>& list) {
  json out = json::array();
  for (const auto& v : list) out.push_back(vec_to_json(v));
  return out;
}

std::vector<Vec3> vec_list_from_json(const json& j) {
  std::vector<Vec3> out;
  for (const auto& item : j) out.push_back(vec_from_json(item));
  return out;
}

MainActivity activity_from_string(const std::string& s) {
  if (s == "reachability") return MainActivity::kReachability;
  if (s == "manipulability") return MainActivity::kManipulability;
  throw Error(ErrorCode::kInvalidConfig, "unknown activity '" + s + "'");
}

GoalController controller_from_string(const std::string& s) {
  if (s == "pic") return GoalController::kPic;
  if (s == "pid") return GoalController::kPid;
  throw Error(ErrorCode::kInvalidConfig, "unknown controller '" + s + "'");
}

TrajectoryScript::Kind trajectory_kind_from_string(const std::string& s) {
  if (s == "polyline") return TrajectoryScript::Kind::kPolyline;
  if (s == "figure_eight") return TrajectoryScript::Kind::kFigureEight;
  throw Error(ErrorCode::kInvalidConfig, "unknown trajectory kind '" + s + "'");
}

json to_json(const ScenarioConfig& cfg) {
  json j;
  // Builtin ids are written as integers, anything else as a string.
  if (cfg.id.size() == 1 && cfg.id[0] >= '1' && cfg.id[0] <= '5') {
    j["id"] = cfg.id[0] - '0';
  } else {
    j["id"] = cfg.id;
  }
  j["bounds"] = {{"lower", vec_to_json(cfg.bounds.lower)},
                 {"upper", vec_to_json(cfg.bounds.upper)}};
  json obstacles = json::array();
  for (const auto& o : cfg.obstacles) {
    obstacles.push_back({{"center", vec_to_json(o.center)}, {"radius", o.radius}});
  }
  j["obstacles"] = obstacles;
  j["n_aux"] = cfg.n_aux;
  j["aux_start"] = vec_list_to_json(cfg.aux_start);

  const auto& t = cfg.main_trajectory;
  json traj;
  traj["kind"] = to_string(t.kind);
  if (t.kind == TrajectoryScript::Kind::kPolyline) {
    traj["waypoints"] = vec_list_to_json(t.waypoints);
    traj["speed"] = t.speed;
  } else {
    traj["center"] = vec_to_json(t.center);
    traj["amplitude"] = vec_to_json(t.amplitude);
    traj["period"] = t.period;
  }
  j["main_trajectory"] = traj;

  json schedule = json::array();
  for (const auto& list : cfg.waypoint_schedule) schedule.push_back(vec_list_to_json(list));
  j["waypoint_schedule"] = schedule;

  json tasks = json::array();
  for (const auto& sw : cfg.main_task_schedule) {
    tasks.push_back({{"step", sw.step}, {"activity", to_string(sw.activity)}});
  }
  j["main_task_schedule"] = tasks;

  const SimParams& p = cfg.params;
  const ControllerGains& g = p.gains;
  const PicParams& pic = g.pic;
  j["params"] = {
      {"sampling_time", p.sampling_time},
      {"step_count", p.step_count},
      {"fov_apex_angle", p.fov_apex_angle},
      {"los_margin", p.los_margin},
      {"viewpoint_distance", p.viewpoint_distance},
      {"collision_influence_radius", p.collision_influence_radius},
      {"accel_limit", p.accel_limit},
      {"speed_limit", p.speed_limit},
      {"dls_damping", p.dls_damping},
      {"waypoint_radius", p.waypoint_radius},
      {"waypoint_refresh_steps", p.waypoint_refresh_steps},
      {"goal_bounds_margin", p.goal_bounds_margin},
      {"gains",
       {{"k_p", g.k_p},
        {"k_d", g.k_d},
        {"k_i", g.k_i},
        {"integral_limit", g.integral_limit},
        {"distance", {{"k_p", g.distance.k_p}, {"k_d", g.distance.k_d}}},
        {"repulsion_gain", g.repulsion_gain},
        {"pic",
         {{"horizon", pic.horizon},
          {"samples", pic.samples},
          {"noise_sigma", pic.noise_sigma},
          {"temperature", pic.temperature},
          {"control_cost", pic.control_cost},
          {"obstacle_penalty", pic.obstacle_penalty},
          {"goal_weight", pic.goal_weight}}},
        {"pid_goal", {{"k_p", g.pid_goal.k_p}, {"k_d", g.pid_goal.k_d}}}}},
  };
  j["ablation"] = {{"task1", cfg.ablation.task1},
                   {"task2", cfg.ablation.task2},
                   {"task3", cfg.ablation.task3},
                   {"controller", to_string(cfg.ablation.controller)}};
  j["seed"] = cfg.seed;
  return j;
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

ScenarioConfig from_json(const json& j) {
  ScenarioConfig cfg;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");

  const json& id = j.at("id");
  cfg.id = id.is_number_integer() ? std::to_string(id.get<int>()) : id.get<std::string>();
  cfg.bounds.lower = vec_from_json(j.at("bounds").at("lower"));
  cfg.bounds.upper = vec_from_json(j.at("bounds").at("upper"));
  for (const auto& o : j.at("obstacles")) {
    cfg.obstacles.push_back({vec_from_json(o.at("center")), o.at("radius").get<double>()});
  }
  cfg.n_aux = j.at("n_aux").get<int>();
  cfg.aux_start = vec_list_from_json(j.at("aux_start"));

  const json& traj = j.at("main_trajectory");
  auto& t = cfg.main_trajectory;
  t.kind = trajectory_kind_from_string(traj.at("kind").get<std::string>());
  if (t.kind == TrajectoryScript::Kind::kPolyline) {
    t.waypoints = vec_list_from_json(traj.at("waypoints"));
    t.speed = traj.at("speed").get<double>();
  } else {
    t.center = vec_from_json(traj.at("center"));
    t.amplitude = vec_from_json(traj.at("amplitude"));
    t.period = traj.at("period").get<double>();
  }

  if (j.contains("waypoint_schedule")) {
    for (const auto& list : j.at("waypoint_schedule")) {
      cfg.waypoint_schedule.push_back(vec_list_from_json(list));
    }
  }
  if (j.contains("main_task_schedule")) {
    for (const auto& sw : j.at("main_task_schedule")) {
      cfg.main_task_schedule.push_back(
          {sw.at("step").get<int>(), activity_from_string(sw.at("activity").get<std::string>())});
    }
  }

  if (j.contains("params")) {
    const json& pj = j.at("params");
    SimParams& p = cfg.params;
    read_opt(pj, "sampling_time", p.sampling_time);
    read_opt(pj, "step_count", p.step_count);
    read_opt(pj, "fov_apex_angle", p.fov_apex_angle);
    read_opt(pj, "los_margin", p.los_margin);
    read_opt(pj, "viewpoint_distance", p.viewpoint_distance);
    read_opt(pj, "collision_influence_radius", p.collision_influence_radius);
    read_opt(pj, "accel_limit", p.accel_limit);
    read_opt(pj, "speed_limit", p.speed_limit);
    read_opt(pj, "dls_damping", p.dls_damping);
    read_opt(pj, "waypoint_radius", p.waypoint_radius);
    read_opt(pj, "waypoint_refresh_steps", p.waypoint_refresh_steps);
    read_opt(pj, "goal_bounds_margin", p.goal_bounds_margin);
    if (pj.contains("gains")) {
      const json& gj = pj.at("gains");
      ControllerGains& g = p.gains;
      read_opt(gj, "k_p", g.k_p);
      read_opt(gj, "k_d", g.k_d);
      read_opt(gj, "k_i", g.k_i);
      read_opt(gj, "integral_limit", g.integral_limit);
      if (gj.contains("distance")) {
        read_opt(gj.at("distance"), "k_p", g.distance.k_p);
        read_opt(gj.at("distance"), "k_d", g.distance.k_d);
      }
      read_opt(gj, "repulsion_gain", g.repulsion_gain);
      if (gj.contains("pic")) {
        const json& cj = gj.at("pic");
        read_opt(cj, "horizon", g.pic.horizon);
        read_opt(cj, "samples", g.pic.samples);
        read_opt(cj, "noise_sigma", g.pic.noise_sigma);
        read_opt(cj, "temperature", g.pic.temperature);
        read_opt(cj, "control_cost", g.pic.control_cost);
        read_opt(cj, "obstacle_penalty", g.pic.obstacle_penalty);
        read_opt(cj, "goal_weight", g.pic.goal_weight);
      }
      if (gj.contains("pid_goal")) {
        read_opt(gj.at("pid_goal"), "k_p", g.pid_goal.k_p);
        read_opt(gj.at("pid_goal"), "k_d", g.pid_goal.k_d);
      }
    }
  }
  if (j.contains("ablation")) {
    const json& aj = j.at("ablation");
    read_opt(aj, "task1", cfg.ablation.task1);
    read_opt(aj, "task2", cfg.ablation.task2);
    read_opt(aj, "task3", cfg.ablation.task3);
    if (aj.contains("controller")) {
      cfg.ablation.controller = controller_from_string(aj.at("controller").get<std::string>());
    }
  }
  read_opt(j, "seed", cfg.seed);
  return cfg;
}

}  // namespace

std::string serialize_config(const ScenarioConfig& cfg) {
  return to_json(cfg).dump(2) + "\n";
}

ScenarioConfig parse_config(std::string_view json_text) {
  try {
    return from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("malformed config: ") + e.what());
  }
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : serialize_config(cfg)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Builtin scenarios
//
// Environment: 22 m cube with the ground at z = 0. The main UAV cruises at
// 4 m; auxiliary UAVs hold viewpoints 5 m away from it.

namespace {

constexpr double kMainAltitude = 4.0;

std::vector<Vec3> cruise_path() {
  return {{3.0, 6.0, kMainAltitude}, {11.0, 11.0, kMainAltitude}, {19.0, 8.0, kMainAltitude}};
}

// Ground trees resting on the ground beside the cruise path; their tops sit
// kTreeClearance below the cruise altitude. Scenario 3 raises them so that
// gap is halved. Placed so the main UAV stays clear of them on both the
// polyline and the figure-eight.
constexpr double kTreeRadius = 1.6;
constexpr double kTreeClearance = kMainAltitude - 2.0 * kTreeRadius;

std::vector<Obstacle> trees(double raise) {
  const double z = kTreeRadius + raise;
  return {
      {{6.5, 3.0, z}, kTreeRadius},
      {{11.0, 15.0, z}, kTreeRadius},
      {{16.0, 3.0, z}, kTreeRadius},
  };
}

// Flying obstacles hovering above points of the cruise path, inside the
// auxiliary UAVs' lines of sight.
std::vector<Obstacle> flying_obstacles() {
  constexpr double kAltitude = kMainAltitude + 3.4;
  return {
      {{7.2, 8.7, kAltitude}, 1.0},
      {{9.8, 10.2, kAltitude}, 1.0},
      {{15.3, 9.4, kAltitude}, 1.0},
  };
}

void place_aux_at_viewpoints(ScenarioConfig& cfg) {
  const UavState main0 = cfg.main_trajectory.evaluate(0.0);
  HeadingTracker heading;
  heading.update(main0.velocity);
  cfg.aux_start.clear();
  for (int u = 0; u < cfg.n_aux; ++u) {
    const auto goal = viewpoint_goal(main0.position, heading.heading(),
                                     cfg.activity_at(0),
                                     cfg.params.viewpoint_distance, u);
    cfg.aux_start.push_back(cfg.bounds.clamp(goal.position, cfg.params.goal_bounds_margin));
  }
}

}  // namespace

ScenarioConfig builtin_scenario(int id) {
  if (id < 1 || id > 5) {
    throw Error(ErrorCode::kUnknownScenario, "unknown builtin scenario " + std::to_string(id));
  }
  ScenarioConfig cfg;
  cfg.id = std::to_string(id);
  cfg.bounds = {Vec3::Zero(), Vec3::Constant(22.0)};
  cfg.n_aux = 2;
  cfg.seed = 7;
  cfg.main_trajectory.kind = TrajectoryScript::Kind::kPolyline;
  cfg.main_trajectory.waypoints = cruise_path();
  cfg.main_trajectory.speed = 0.5;
  cfg.main_task_schedule = {{0, MainActivity::kReachability}};
  cfg.waypoint_schedule.assign(cfg.n_aux, {});

  switch (id) {
    case 1:
      cfg.obstacles = trees(0.0);
      break;
    case 2:
      cfg.obstacles = flying_obstacles();
      break;
    case 3:
      cfg.obstacles = trees(0.5 * kTreeClearance);
      break;
    case 4:
      cfg.obstacles = trees(0.0);
      cfg.main_task_schedule.push_back(
          {cfg.params.step_count / 2, MainActivity::kManipulability});
      break;
    case 5:
      cfg.obstacles = trees(0.0);
      cfg.params.step_count = 600;
      cfg.main_trajectory.kind = TrajectoryScript::Kind::kFigureEight;
      cfg.main_trajectory.waypoints.clear();
      cfg.main_trajectory.center = {11.0, 10.0, kMainAltitude};
      cfg.main_trajectory.amplitude = {7.0, 3.5, 0.0};
      cfg.main_trajectory.period = 60.0;
      break;
  }
  place_aux_at_viewpoints(cfg);
  return cfg;
}

}  // namespace thcsim
