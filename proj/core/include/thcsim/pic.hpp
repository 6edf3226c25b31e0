#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "thcsim/config.hpp"
#include "thcsim/types.hpp"

namespace thcsim {

// Dynamics and safety constants shared by rollouts and the real plant.
struct RolloutModel {
  double sampling_time = 0.1;
  double accel_limit = 3.0;
  double speed_limit = 3.0;
  double influence_radius = 1.5;  // d0 of the obstacle penalty
};

RolloutModel rollout_model(const SimParams& params);

struct Rollout {
  std::vector<Vec3> controls;     // H
  std::vector<UavState> states;   // H + 1
  double cost = 0.0;
};

// Simulates `controls` from `start` under the double-integrator plant.
Rollout simulate_rollout(const UavState& start, std::vector<Vec3> controls,
                         const RolloutModel& model);

// w_goal |x_H - goal|^2 + sum_k [w_obs max(0, d0 - dist_k)^2 + R |u_k|^2]
double rollout_cost(const Rollout& rollout, const Vec3& goal,
                    std::span<const Obstacle> obstacles,
                    const PicParams& params, const RolloutModel& model);

struct PicResult {
  Vec3 accel = Vec3::Zero();
  std::vector<Vec3> nominal;     // shifted one step, zero padded
  std::vector<double> weights;   // one per sample, sums to 1
  std::vector<double> costs;
};

// One receding-horizon update. `nominal` must hold params.horizon controls.
// Rollouts are spread over `threads` workers; the weighted reduction always
// runs in sample order, so the result does not depend on `threads`.
// Throws kDivergentRollouts if no rollout cost is finite.
PicResult pic_step(const UavState& state, std::span<const Vec3> nominal,
                   const Vec3& goal, std::span<const Obstacle> obstacles,
                   const PicParams& params, const RolloutModel& model,
                   std::uint64_t rng_key, int threads = 1);

// Normalized exp(-(S_i - min S)/lambda).
std::vector<double> cost_weights(std::span<const double> costs,
                                 double temperature);

// k_p (goal - q) - k_d v, clamped.
Vec3 pid_step(const UavState& state, const Vec3& goal, const PdGains& gains,
              double accel_limit);

}  // namespace thcsim
