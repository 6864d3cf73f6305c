#include "memesim/simulation.hpp"

namespace memesim {

namespace {

int resolve_workers(int requested) { return requested > 0 ? requested : WorkerPool::default_workers(); }

}  // namespace

std::uint64_t rollout_reset_seed(std::uint64_t root_seed, int agent, std::uint32_t step) {
  RngStream rng(root_seed, static_cast<std::uint32_t>(agent), step, Purpose::kTaskReset);
  return rng.next_u64();
}

Simulation::Simulation(const GridConfig& config, int workers)
    : Simulation(World::create(config), MemeRegistry{}, workers) {}

Simulation::Simulation(World world, MemeRegistry registry, int workers)
    : world_(std::move(world)),
      registry_(std::move(registry)),
      pool_(std::make_unique<WorkerPool>(resolve_workers(workers > 0 ? workers : world_.config.workers))) {
  envs_.resize(static_cast<std::size_t>(pool_->size()));
}

Simulation::~Simulation() = default;
Simulation::Simulation(Simulation&&) noexcept = default;
Simulation& Simulation::operator=(Simulation&&) noexcept = default;

int Simulation::workers() const { return pool_->size(); }

void Simulation::run_rollouts(std::uint32_t step, std::vector<EnvironmentFaultRecord>& faults) {
  const GridConfig& cfg = world_.config;
  std::vector<std::string> errors(world_.agents.size());
  pool_->parallel_for(world_.agents.size(), [&](std::size_t i, int worker) {
    auto& env = envs_[static_cast<std::size_t>(worker)];
    if (!env) env = make_environment(cfg.task_env, cfg.env_timeout_s);
    AgentRuntime& agent = world_.agents[i];
    RngStream rng(cfg.seed, static_cast<std::uint32_t>(i), step, Purpose::kTaskAction);
    try {
      agent.fitness.add(rollout_fitness(agent.genome, agent.global, *env, cfg.task_max_steps, rng,
                                        rollout_reset_seed(cfg.seed, static_cast<int>(i), step)));
    } catch (const EnvironmentFault& e) {
      errors[i] = e.what();
      env.reset();
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) faults.push_back({static_cast<int>(i), std::move(errors[i])});
  }
}

StepRecord Simulation::step() {
  const auto step = static_cast<std::uint32_t>(world_.step);
  StepRecord rec;
  rec.step = world_.step;

  grid_step(world_, *pool_);
  if (world_.config.task_on) run_rollouts(step, rec.faults);
  rec.events = evolution_step(world_, step, *pool_);

  rec.keys.reserve(world_.broadcasts.size());
  for (const Message& m : world_.broadcasts) rec.keys.push_back(canonical_key(m));
  registry_.update(take_census(rec.keys), rec.step);

  ++world_.step;
  return rec;
}

double Simulation::mean_fitness() const {
  double sum = 0.0;
  std::size_t n = 0;
  for (const AgentRuntime& a : world_.agents) {
    if (a.fitness.count > 0) {
      sum += a.fitness.mean;
      ++n;
    }
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace memesim
