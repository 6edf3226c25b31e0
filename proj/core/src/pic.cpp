#include "thcsim/pic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include "thcsim/error.hpp"
#include "thcsim/rng.hpp"
#include "thcsim/sim.hpp"

namespace thcsim {

// ---------------------------------------------------------------------------
// Counter-based normals (splitmix64 finalizer + Box-Muller)

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  return mix64(key_ ^ mix64(counter));
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t step, std::uint64_t stream) {
  return mix64(mix64(mix64(seed) ^ step) + stream);
}

// ---------------------------------------------------------------------------

RolloutModel rollout_model(const SimParams& params) {
  return {params.sampling_time, params.accel_limit, params.speed_limit,
          params.collision_influence_radius};
}

Rollout simulate_rollout(const UavState& start, std::vector<Vec3> controls,
                         const RolloutModel& model) {
  Rollout r;
  r.states.reserve(controls.size() + 1);
  r.states.push_back(start);
  for (auto& u : controls) {
    u = clamp_norm(u, model.accel_limit);
    r.states.push_back(integrate(r.states.back(), u, model.sampling_time, model.speed_limit));
  }
  r.controls = std::move(controls);
  return r;
}

namespace {

double nearest_surface_distance(const Vec3& p, std::span<const Obstacle> obstacles) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& o : obstacles) best = std::min(best, (p - o.center).norm() - o.radius);
  return best;
}

}  // namespace

double rollout_cost(const Rollout& rollout, const Vec3& goal,
                    std::span<const Obstacle> obstacles, const PicParams& params,
                    const RolloutModel& model) {
  double cost = params.goal_weight * (rollout.states.back().position - goal).squaredNorm();
  for (std::size_t k = 0; k < rollout.controls.size(); ++k) {
    const double intrusion = std::max(
        0.0, model.influence_radius -
                 nearest_surface_distance(rollout.states[k + 1].position, obstacles));
    cost += params.obstacle_penalty * intrusion * intrusion +
            params.control_cost * rollout.controls[k].squaredNorm();
  }
  return cost;
}

std::vector<double> cost_weights(std::span<const double> costs, double temperature) {
  double min_cost = std::numeric_limits<double>::infinity();
  for (double c : costs) {
    if (std::isfinite(c)) min_cost = std::min(min_cost, c);
  }
  if (!std::isfinite(min_cost)) {
    throw Error(ErrorCode::kDivergentRollouts, "no rollout has a finite cost");
  }
  std::vector<double> w(costs.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    if (std::isfinite(costs[i])) w[i] = std::exp(-(costs[i] - min_cost) / temperature);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

PicResult pic_step(const UavState& state, std::span<const Vec3> nominal, const Vec3& goal,
                   std::span<const Obstacle> obstacles, const PicParams& params,
                   const RolloutModel& model, std::uint64_t rng_key, int threads) {
  const auto horizon = static_cast<std::size_t>(params.horizon);
  const auto samples = static_cast<std::size_t>(params.samples);
  if (nominal.size() != horizon) {
    throw std::invalid_argument("nominal sequence length must equal the PIC horizon");
  }
  const CounterRng rng(rng_key);

  // noise[(i * H + t)] is the perturbation of sample i at horizon step t.
  std::vector<Vec3> noise(samples * horizon);
  std::vector<double> costs(samples);

  auto evaluate = [&](std::size_t begin, std::size_t end) {
    std::vector<Vec3> controls(horizon);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t t = 0; t < horizon; ++t) {
        Vec3& eps = noise[i * horizon + t];
        for (int axis = 0; axis < 3; ++axis) {
          const std::uint64_t counter = (i * horizon + t) * 3 + static_cast<std::uint64_t>(axis);
          eps[axis] = params.noise_sigma == 0.0 ? 0.0 : params.noise_sigma * rng.normal(counter);
        }
        controls[t] = nominal[t] + eps;
      }
      const Rollout r = simulate_rollout(state, controls, model);
      costs[i] = rollout_cost(r, goal, obstacles, params, model);
    }
  };

  const auto workers = static_cast<std::size_t>(std::clamp(threads, 1, static_cast<int>(samples)));
  if (workers == 1) {
    evaluate(0, samples);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (samples + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(samples, begin + chunk);
      if (begin < end) pool.emplace_back(evaluate, begin, end);
    }
    for (auto& t : pool) t.join();
  }

  PicResult result;
  result.weights = cost_weights(costs, params.temperature);
  result.costs = std::move(costs);

  // u* = nominal + sum_i w_i eps_i, reduced in sample order.
  std::vector<Vec3> updated(nominal.begin(), nominal.end());
  std::vector<Vec3> correction(horizon, Vec3::Zero());
  for (std::size_t i = 0; i < samples; ++i) {
    const double w = result.weights[i];
    if (w == 0.0) continue;
    for (std::size_t t = 0; t < horizon; ++t) correction[t] += w * noise[i * horizon + t];
  }
  for (std::size_t t = 0; t < horizon; ++t) updated[t] += correction[t];

  result.accel = clamp_norm(updated.front(), model.accel_limit);
  result.nominal.assign(updated.begin() + 1, updated.end());
  result.nominal.push_back(Vec3::Zero());
  return result;
}

Vec3 pid_step(const UavState& state, const Vec3& goal, const PdGains& gains,
              double accel_limit) {
  return clamp_norm(gains.k_p * (goal - state.position) - gains.k_d * state.velocity,
                    accel_limit);
}

}  // namespace thcsim
