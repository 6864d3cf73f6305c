#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "memesim/census.hpp"
#include "memesim/evolution.hpp"
#include "memesim/memetics.hpp"
#include "memesim/parallel.hpp"
#include "memesim/task.hpp"

namespace memesim {

struct EnvironmentFaultRecord {
  int agent = 0;
  std::string what;
};

/// Everything observable about one completed step.
struct StepRecord {
  std::int64_t step = 0;
  std::vector<MemeKey> keys;  // broadcast key per site, row-major
  std::vector<ReplicationEvent> events;
  std::vector<EnvironmentFaultRecord> faults;
};

/// Grid plus meme registry, advanced one full step at a time:
/// communication, task rollouts (when enabled), evolution, census.
class Simulation {
 public:
  explicit Simulation(const GridConfig& config, int workers = 0);
  Simulation(World world, MemeRegistry registry, int workers = 0);
  ~Simulation();

  Simulation(Simulation&&) noexcept;
  Simulation& operator=(Simulation&&) noexcept;

  StepRecord step();

  const World& world() const { return world_; }
  World& world() { return world_; }
  const GridConfig& config() const { return world_.config; }
  const MemeRegistry& registry() const { return registry_; }
  std::int64_t current_step() const { return world_.step; }
  int workers() const;

  /// Mean over agents with at least one rollout of their lifetime mean fitness.
  double mean_fitness() const;

 private:
  void run_rollouts(std::uint32_t step, std::vector<EnvironmentFaultRecord>& faults);

  World world_;
  MemeRegistry registry_;
  std::unique_ptr<WorkerPool> pool_;
  std::vector<std::unique_ptr<Environment>> envs_;  // one per worker
};

/// Seed handed to the environment's reset for one rollout.
std::uint64_t rollout_reset_seed(std::uint64_t root_seed, int agent, std::uint32_t step);

}  // namespace memesim
