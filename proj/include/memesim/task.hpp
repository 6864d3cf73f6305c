#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>

#include "memesim/genome.hpp"
#include "memesim/rng.hpp"
#include "memesim/types.hpp"

namespace memesim {

/// Raised by environments that fail mid-rollout (external processes only).
class EnvironmentFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvStep {
  Observation obs{};
  double metric = 0.0;
  bool done = false;
};

class Environment {
 public:
  virtual ~Environment() = default;
  virtual Observation reset(std::uint64_t seed) = 0;
  /// Each action is a bin in [0, 19] for one of the four channels.
  virtual EnvStep step(const Actions& actions) = 0;
};

/// Four phase oscillators driven by torques; forward progress rewards torque aligned with
/// sin(theta) and every step pays an energy cost. The metric is position minus energy.
class SurrogateWalker final : public Environment {
 public:
  static constexpr std::array<double, kActionChannels> kRates{0.10, 0.15, 0.20, 0.25};
  static constexpr double kTorqueCoupling = 0.2;
  static constexpr double kVelocityRetention = 0.9;
  static constexpr double kEnergyCost = 0.005;
  static constexpr double kPositionScale = 400.0;

  Observation reset(std::uint64_t seed) override;
  EnvStep step(const Actions& actions) override;

  double velocity() const { return velocity_; }
  double position() const { return position_; }
  double energy() const { return energy_; }
  const std::array<double, kActionChannels>& phases() const { return phases_; }

  /// Torque in [-1, 1] for an action bin.
  static double torque(int bin) { return static_cast<double>(bin) / 19.0 * 2.0 - 1.0; }

 private:
  Observation observe() const;

  std::array<double, kActionChannels> phases_{};
  std::array<double, kActionChannels> torques_{};
  double velocity_ = 0.0;
  double position_ = 0.0;
  double energy_ = 0.0;
};

/// Runs the task network for up to `max_steps` with h_g held fixed, starting from h_t = 0.
/// Returns the best per-step metric seen (not the final one).
double rollout_fitness(const Genome& genome, const GlobalState& h_g, Environment& env, int max_steps,
                       RngStream& rng, std::uint64_t reset_seed);

/// Builds the environment named by a `task_env` setting ("surrogate" or "external:<cmd>").
std::unique_ptr<Environment> make_environment(const std::string& task_env, double timeout_s);

}  // namespace memesim
