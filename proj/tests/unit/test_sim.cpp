#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "thcsim/error.hpp"
#include "thcsim/metrics.hpp"
#include "thcsim/sim.hpp"
#include "thcsim/viewpoints.hpp"

using namespace thcsim;

namespace {

UavState at(const Vec3& p, const Vec3& v = Vec3::Zero()) {
  UavState s;
  s.position = p;
  s.velocity = v;
  return s;
}

std::string csv(const SimHistory& h) {
  std::ostringstream out;
  write_history_csv(h, out);
  return out.str();
}

ScenarioConfig shortened(int id, int steps) {
  ScenarioConfig cfg = builtin_scenario(id);
  cfg.params.step_count = steps;
  cfg.main_task_schedule.erase(
      std::remove_if(cfg.main_task_schedule.begin(), cfg.main_task_schedule.end(),
                     [&](const TaskSwitch& s) { return s.step > steps; }),
      cfg.main_task_schedule.end());
  return cfg;
}

}  // namespace

TEST(Integrate, Examples) {
  const UavState a = integrate(at(Vec3::Zero(), {1, 0, 0}), Vec3::Zero(), 0.1, 3.0);
  EXPECT_EQ(a.velocity, Vec3(1, 0, 0));
  EXPECT_NEAR(a.position.x(), 0.1, 1e-15);
  const UavState b = integrate(at(Vec3::Zero(), {1, 0, 0}), {1, 0, 0}, 0.1, 3.0);
  EXPECT_NEAR(b.velocity.x(), 1.1, 1e-15);
  EXPECT_NEAR(b.position.x(), 0.11, 1e-15);
}

TEST(Integrate, BallisticIsExactlyLinear) {
  UavState s = at({0.5, 0, 0}, {0.25, 0.5, -1});
  for (int k = 1; k <= 1000; ++k) {
    s = integrate(s, Vec3::Zero(), 0.125, 3.0);
    EXPECT_EQ(s.position, Vec3(0.5, 0, 0) + k * 0.125 * Vec3(0.25, 0.5, -1));
  }
}

TEST(Integrate, MatchesClosedFormAndRespectsSpeedLimit) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10000; ++i) {
    const UavState s = at(oracle::random_in_box(rng, -10, 10), oracle::random_in_box(rng, -3, 3));
    const Vec3 a = oracle::random_in_box(rng, -5, 5);
    const UavState got = integrate(s, a, 0.1, 3.0);
    const UavState ref = oracle::closed_form_step(s, a, 0.1, 3.0);
    EXPECT_LE((got.position - ref.position).norm(), 1e-12);
    EXPECT_LE((got.velocity - ref.velocity).norm(), 1e-12);
    EXPECT_LE(got.velocity.norm(), 3.0 + 1e-12);
  }
}

TEST(Run, RejectsInvalidConfig) {
  ScenarioConfig cfg = builtin_scenario(1);
  cfg.obstacles[0].radius = -1.0;
  try {
    run(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
}

TEST(Run, StaticMainWithoutObstaclesStaysPut) {
  ScenarioConfig cfg = builtin_scenario(1);
  cfg.obstacles.clear();
  cfg.params.step_count = 300;
  const Vec3 main(11, 11, 6);
  cfg.main_trajectory = TrajectoryScript{};
  cfg.main_trajectory.waypoints = {main};
  cfg.aux_start.clear();
  for (int u = 0; u < cfg.n_aux; ++u) {
    cfg.aux_start.push_back(viewpoint_goal(main, Vec3::UnitX(), MainActivity::kReachability,
                                           cfg.params.viewpoint_distance, u)
                                .position);
  }
  const SimHistory h = run(cfg);
  ASSERT_EQ(h.steps.size(), 301u);
  for (const StepRecord& rec : h.steps) {
    for (int u = 0; u < cfg.n_aux; ++u) {
      EXPECT_LT((rec.aux[u].state.position - cfg.aux_start[u]).norm(), 0.05) << rec.step;
    }
  }
}

TEST(Run, FlyingObstaclesOccludeWithoutLosTask) {
  ScenarioConfig cfg = builtin_scenario(2);
  cfg.ablation.task3 = false;
  const SimHistory h = run(cfg);
  bool any = false;
  for (const auto& rec : h.steps)
    for (const auto& a : rec.aux)
      for (bool o : a.occluded) any = any || o;
  EXPECT_TRUE(any);
}

TEST(Run, DeterministicHistories) {
  const ScenarioConfig cfg = shortened(2, 120);
  EXPECT_EQ(csv(run(cfg)), csv(run(cfg)));
  ScenarioConfig other = cfg;
  other.seed += 1;
  EXPECT_NE(csv(run(cfg)), csv(run(other)));
}

TEST(Run, CsvHasStableColumns) {
  const SimHistory h = run(shortened(1, 5));
  const std::string text = csv(h);
  const std::string header = text.substr(0, text.find('\n'));
  EXPECT_EQ(header,
            "step,time,uav,role,activity,px,py,pz,vx,vy,vz,ax,ay,az,goal_x,goal_y,goal_z,"
            "waypoint_index,task1,task2,task3,task4,occluded,min_clearance");
  std::istringstream in(text);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 23) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 1 + 6 * (1 + h.config.n_aux));
}

// Every builtin scenario under every toggle combination, shortened to keep
// the suite fast; the full-length grid runs in the acceptance binary.
class AllCombinations : public ::testing::TestWithParam<int> {};

TEST_P(AllCombinations, InvariantsHold) {
  const int id = GetParam();
  for (int mask = 0; mask < 8; ++mask) {
    ScenarioConfig cfg = shortened(id, 150);
    cfg.ablation.task2 = mask & 1;
    cfg.ablation.task3 = mask & 2;
    cfg.ablation.controller = mask & 4 ? GoalController::kPid : GoalController::kPic;
    const SimHistory h = run(cfg);
    ASSERT_EQ(h.steps.size(), static_cast<std::size_t>(cfg.params.step_count) + 1);
    std::vector<int> last_index(static_cast<std::size_t>(cfg.n_aux), 0);
    for (const StepRecord& rec : h.steps) {
      ASSERT_TRUE(rec.main.position.allFinite());
      for (std::size_t u = 0; u < rec.aux.size(); ++u) {
        const AuxRecord& a = rec.aux[u];
        ASSERT_TRUE(a.state.position.allFinite() && a.state.velocity.allFinite() &&
                    a.accel.allFinite())
            << "scenario " << id << " mask " << mask << " step " << rec.step;
        EXPECT_LE(a.state.velocity.norm(), cfg.params.speed_limit + 1e-12);
        EXPECT_LE(a.accel.norm(), cfg.params.accel_limit + 1e-12);
        for (const auto& o : cfg.obstacles) {
          EXPECT_GT((a.state.position - o.center).norm() - o.radius, 0.0)
              << "scenario " << id << " mask " << mask << " step " << rec.step;
        }
        EXPECT_GE(a.waypoint_index, last_index[u]);
        last_index[u] = a.waypoint_index;
        // The final record carries no control step.
        if (rec.step < cfg.params.step_count) {
          EXPECT_EQ(a.active[1], cfg.ablation.task2);
          EXPECT_TRUE(a.active[3]);
        }
        if (!cfg.ablation.task3) EXPECT_FALSE(a.active[2]);
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Builtin, AllCombinations, ::testing::Values(1, 2, 3, 4, 5));

TEST(Run, ScheduledWaypointsAreVisitedInOrder) {
  ScenarioConfig cfg = shortened(1, 200);
  cfg.ablation.task2 = false;
  cfg.ablation.task3 = false;
  cfg.waypoint_schedule = {{cfg.aux_start[0] + Vec3(1, 0, 0), cfg.aux_start[0] + Vec3(1, 1, 0)},
                           {}};
  const SimHistory h = run(cfg);
  int reached = 0;
  for (const auto& rec : h.steps) reached = std::max(reached, rec.aux[0].waypoint_index);
  EXPECT_GE(reached, 2);
  EXPECT_EQ(h.steps[1].aux[0].goal, cfg.waypoint_schedule[0][0]);
}
