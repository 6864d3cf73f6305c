#include "memesim/task.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "memesim/external_env.hpp"
#include "memesim/neural.hpp"

namespace memesim {

Observation SurrogateWalker::reset(std::uint64_t seed) {
  RngStream rng(seed, 0, 0, Purpose::kTaskReset);
  for (double& theta : phases_) theta = 2.0 * std::numbers::pi * rng.uniform01();
  torques_.fill(0.0);
  velocity_ = 0.0;
  position_ = 0.0;
  energy_ = 0.0;
  return observe();
}

EnvStep SurrogateWalker::step(const Actions& actions) {
  double drive = 0.0;
  double effort = 0.0;
  for (int j = 0; j < kActionChannels; ++j) {
    if (actions[j] < 0 || actions[j] >= kActionBins) {
      throw std::invalid_argument("action bin out of range: " + std::to_string(actions[j]));
    }
    const double u = torque(actions[j]);
    torques_[j] = u;
    phases_[j] += kRates[j] + kTorqueCoupling * u;
    drive += u * std::sin(phases_[j]);
    effort += u * u;
  }
  velocity_ = kVelocityRetention * velocity_ + (1.0 - kVelocityRetention) * drive / kActionChannels;
  position_ += velocity_;
  energy_ += kEnergyCost * effort;
  return {observe(), position_ - energy_, false};
}

Observation SurrogateWalker::observe() const {
  Observation obs{};
  for (int j = 0; j < kActionChannels; ++j) {
    obs[j] = std::sin(phases_[j]);
    obs[kActionChannels + j] = std::cos(phases_[j]);
    obs[10 + j] = torques_[j];
  }
  obs[8] = velocity_;
  obs[9] = position_ / kPositionScale;
  return obs;
}

double rollout_fitness(const Genome& genome, const GlobalState& h_g, Environment& env, int max_steps,
                       RngStream& rng, std::uint64_t reset_seed) {
  const TaskPolicy policy(genome, h_g);
  Observation obs = env.reset(reset_seed);
  TaskState h_t = TaskState::Zero();
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < max_steps; ++t) {
    const TaskStep s = policy.step(h_t, obs, rng);
    h_t = s.state;
    const EnvStep r = env.step(s.actions);
    best = std::max(best, r.metric);
    obs = r.obs;
    if (r.done) break;
  }
  return best;
}

std::unique_ptr<Environment> make_environment(const std::string& task_env, double timeout_s) {
  if (task_env == "surrogate") return std::make_unique<SurrogateWalker>();
  constexpr std::string_view prefix = "external:";
  if (task_env.rfind(prefix, 0) == 0) {
    return std::make_unique<ExternalEnvironment>(task_env.substr(prefix.size()), timeout_s);
  }
  throw ConfigError("unknown task_env '" + task_env + "'");
}

}  // namespace memesim
