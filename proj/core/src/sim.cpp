#include "thcsim/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "thcsim/error.hpp"
#include "thcsim/pic.hpp"
#include "thcsim/rng.hpp"
#include "thcsim/tasks.hpp"
#include "thcsim/thc.hpp"
#include "thcsim/viewpoints.hpp"

namespace thcsim {

UavState integrate(const UavState& state, const Vec3& accel, double sampling_time,
                   double speed_limit) {
  UavState next;
  next.velocity = clamp_norm(state.velocity + accel * sampling_time, speed_limit);
  next.position = state.position + next.velocity * sampling_time;
  return next;
}

namespace {

struct AuxRuntime {
  UavState state;
  int waypoint_index = -1;
  Vec3 waypoint = Vec3::Zero();
  int waypoint_age = 0;
  MainActivity waypoint_activity = MainActivity::kReachability;
  LosControllerState los;
  std::vector<Vec3> nominal;
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& cfg)
      : cfg_(cfg), params_(cfg.params), model_(rollout_model(cfg.params)) {
    history_.config = cfg;
    history_.steps.reserve(static_cast<std::size_t>(params_.step_count) + 1);
    aux_.resize(static_cast<std::size_t>(cfg.n_aux));
    for (std::size_t u = 0; u < aux_.size(); ++u) {
      aux_[u].state.position = cfg.aux_start[u];
      aux_[u].nominal.assign(static_cast<std::size_t>(params_.gains.pic.horizon), Vec3::Zero());
    }
    los_alarm_.assign(aux_.size(), false);
  }

  SimHistory run() {
    main_ = cfg_.main_trajectory.evaluate(0.0);
    heading_.update(main_.velocity);
    record(0);
    for (int k = 0; k < params_.step_count; ++k) {
      const MainActivity activity = cfg_.activity_at(k);
      StepRecord& rec = history_.steps.back();
      rec.activity = activity;

      std::vector<Vec3> commands(aux_.size());
      for (std::size_t u = 0; u < aux_.size(); ++u) {
        commands[u] = control(k, u, activity, rec.aux[u]);
      }
      for (std::size_t u = 0; u < aux_.size(); ++u) {
        UavState next = integrate(aux_[u].state, commands[u], params_.sampling_time,
                                  params_.speed_limit);
        confine(next);
        aux_[u].state = next;
      }
      main_ = cfg_.main_trajectory.evaluate((k + 1) * params_.sampling_time);
      heading_.update(main_.velocity);
      record(k + 1);
    }
    history_.steps.back().activity = cfg_.activity_at(params_.step_count);
    return std::move(history_);
  }

 private:
  void advance_waypoint(int k, std::size_t u, MainActivity activity) {
    AuxRuntime& a = aux_[u];
    const auto& schedule = u < cfg_.waypoint_schedule.size()
                               ? cfg_.waypoint_schedule[u]
                               : std::vector<Vec3>{};
    const bool scripted = a.waypoint_index >= 0 &&
                          static_cast<std::size_t>(a.waypoint_index) < schedule.size();
    bool advance = a.waypoint_index < 0 ||
                   (a.state.position - a.waypoint).norm() < params_.waypoint_radius;
    if (!scripted) {
      advance = advance || a.waypoint_age >= params_.waypoint_refresh_steps ||
                a.waypoint_activity != activity;
    }
    if (!advance) {
      ++a.waypoint_age;
      return;
    }
    ++a.waypoint_index;
    a.waypoint_age = 0;
    a.waypoint_activity = activity;
    if (static_cast<std::size_t>(a.waypoint_index) < schedule.size()) {
      a.waypoint = schedule[static_cast<std::size_t>(a.waypoint_index)];
    } else {
      const ViewpointGoal goal =
          viewpoint_goal(main_.position, heading_.heading(), activity,
                         params_.viewpoint_distance, static_cast<int>(u));
      a.waypoint = cfg_.bounds.clamp(goal.position, params_.goal_bounds_margin);
    }
    // A new waypoint starts a fresh control horizon.
    std::fill(a.nominal.begin(), a.nominal.end(), Vec3::Zero());
    (void)k;
  }

  Vec3 control(int k, std::size_t u, MainActivity activity, AuxRecord& rec) {
    advance_waypoint(k, u, activity);
    AuxRuntime& a = aux_[u];
    const auto& toggles = cfg_.ablation;

    std::vector<Vec3> others;
    others.reserve(aux_.size());
    others.push_back(main_.position);
    for (std::size_t v = 0; v < aux_.size(); ++v) {
      if (v != u) others.push_back(aux_[v].state.position);
    }

    PriorityStack stack;
    stack.push(toggles.task1
                   ? task1_collision(a.state, cfg_.obstacles, others, params_)
                   : TaskOutput::inactive(TaskId::kCollision));
    stack.push(toggles.task2
                   ? task2_distance(a.state, main_, params_.viewpoint_distance, params_)
                   : TaskOutput::inactive(TaskId::kDistance));
    if (toggles.task3) {
      stack.push(task3_los(a.state, main_, cfg_.obstacles, params_, a.los));
    } else {
      a.los.reset();
      stack.push(TaskOutput::inactive(TaskId::kLineOfSight));
    }

    Vec3 goal_accel;
    if (toggles.controller == GoalController::kPic) {
      try {
        const PicResult pic =
            pic_step(a.state, a.nominal, a.waypoint, cfg_.obstacles, params_.gains.pic,
                     model_, derive_key(cfg_.seed, static_cast<std::uint64_t>(k), u));
        a.nominal = pic.nominal;
        goal_accel = pic.accel;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kDivergentRollouts) throw;
        throw Error(ErrorCode::kDivergentRollouts,
                    "step " + std::to_string(k) + ", aux " + std::to_string(u + 1) + ": " +
                        e.what());
      }
    } else {
      goal_accel = pid_step(a.state, a.waypoint, params_.gains.pid_goal, params_.accel_limit);
    }
    stack.push(task4_goto(a.state, a.waypoint, goal_accel, params_.accel_limit));

    const Vec3 accel = compose(stack, params_.dls_damping, params_.accel_limit);
    rec.accel = accel;
    rec.goal = a.waypoint;
    rec.waypoint_index = a.waypoint_index;
    for (const TaskOutput& t : stack.tasks()) {
      rec.active[static_cast<std::size_t>(t.priority() - 1)] = t.active;
    }
    return accel;
  }

  // Walls of the environment are hard: stop motion into them.
  void confine(UavState& s) const {
    for (int i = 0; i < 3; ++i) {
      if (s.position[i] < cfg_.bounds.lower[i]) {
        s.position[i] = cfg_.bounds.lower[i];
        s.velocity[i] = std::max(0.0, s.velocity[i]);
      } else if (s.position[i] > cfg_.bounds.upper[i]) {
        s.position[i] = cfg_.bounds.upper[i];
        s.velocity[i] = std::min(0.0, s.velocity[i]);
      }
    }
  }

  void record(int k) {
    StepRecord rec;
    rec.step = k;
    rec.time = k * params_.sampling_time;
    rec.main = main_;
    rec.activity = cfg_.activity_at(k);
    rec.aux.resize(aux_.size());
    for (std::size_t u = 0; u < aux_.size(); ++u) {
      AuxRecord& ar = rec.aux[u];
      ar.state = aux_[u].state;
      ar.goal = aux_[u].waypoint;
      ar.waypoint_index = std::max(aux_[u].waypoint_index, 0);
      ar.los.reserve(cfg_.obstacles.size());
      ar.occluded.reserve(cfg_.obstacles.size());
      const bool degenerate = (ar.state.position - main_.position).norm() == 0.0;
      int penetrating = 0;
      for (const auto& obs : cfg_.obstacles) {
        if (degenerate) {
          ar.los.push_back({});
          ar.occluded.push_back(false);
          continue;
        }
        const LosGeometry g = los_geometry_tiebreak(ar.state.position, main_.position, obs,
                                                    params_.fov_apex_angle, params_.los_margin);
        if (g.los_case == LosCase::kPenetrating && g.p1_interior) ++penetrating;
        ar.los.push_back(g);
        ar.occluded.push_back(
            occludes(ViewCone{ar.state.position, main_.position, params_.fov_apex_angle}, obs));
      }
      // Two obstacles cutting the same line of sight: the avoidance problem
      // may have no admissible solution.
      const bool alarm = penetrating >= 2;
      if (alarm && !los_alarm_[u]) {
        history_.warnings.push_back("step " + std::to_string(k) + ": aux " +
                                    std::to_string(u + 1) +
                                    " line of sight blocked by several obstacles at once;"
                                    " occlusion avoidance may be infeasible");
      }
      los_alarm_[u] = alarm;
    }
    history_.steps.push_back(std::move(rec));
  }

  const ScenarioConfig& cfg_;
  const SimParams& params_;
  RolloutModel model_;
  UavState main_;
  HeadingTracker heading_;
  std::vector<AuxRuntime> aux_;
  std::vector<bool> los_alarm_;
  SimHistory history_;
};

void write_double(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, res.ptr - buf);
}

}  // namespace

SimHistory run(const ScenarioConfig& cfg) {
  const auto violations = validate_config(cfg);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid config:";
    for (const auto& v : violations) msg << " [" << v.code << " at " << v.path << "]";
    throw Error(ErrorCode::kInvalidConfig, msg.str());
  }
  return Simulation(cfg).run();
}

std::vector<std::string> history_csv_columns() {
  return {"step", "time", "uav", "role", "activity", "px", "py", "pz", "vx", "vy", "vz",
          "ax", "ay", "az", "goal_x", "goal_y", "goal_z", "waypoint_index", "task1",
          "task2", "task3", "task4", "occluded", "min_clearance"};
}

void write_history_csv(const SimHistory& history, std::ostream& out) {
  const auto columns = history_csv_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';

  auto vec = [&](const Vec3& v) {
    for (int i = 0; i < 3; ++i) {
      out << ',';
      write_double(out, v[i]);
    }
  };
  for (const StepRecord& rec : history.steps) {
    out << rec.step << ',';
    write_double(out, rec.time);
    out << ",0,main," << to_string(rec.activity);
    vec(rec.main.position);
    vec(rec.main.velocity);
    out << std::string(columns.size() - 11, ',') << '\n';
    for (std::size_t u = 0; u < rec.aux.size(); ++u) {
      const AuxRecord& a = rec.aux[u];
      out << rec.step << ',';
      write_double(out, rec.time);
      out << ',' << (u + 1) << ",aux," << to_string(rec.activity);
      vec(a.state.position);
      vec(a.state.velocity);
      vec(a.accel);
      vec(a.goal);
      out << ',' << a.waypoint_index;
      for (bool act : a.active) out << ',' << (act ? 1 : 0);
      bool occluded = false;
      double min_clearance = std::numeric_limits<double>::infinity();
      for (std::size_t o = 0; o < a.los.size(); ++o) {
        occluded = occluded || a.occluded[o];
        min_clearance = std::min(min_clearance, a.los[o].clearance);
      }
      out << ',' << (occluded ? 1 : 0) << ',';
      if (std::isfinite(min_clearance)) write_double(out, min_clearance);
      out << '\n';
    }
  }
}

}  // namespace thcsim
