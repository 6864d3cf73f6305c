#include "memesim/evolution.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "memesim/neural.hpp"

namespace memesim {

int choose_promotee_slot(const SelectionCounts& counts, const GridConfig& config, RngStream& rng) {
  const int slots = counts.slots();
  const bool weighted = config.selection_on && rng.uniform01() >= config.gamma_s;
  const double total = counts.total();
  if (!weighted || total <= 0.0) return rng.uniform_int(slots);
  const double target = rng.uniform01() * total;
  double cumulative = 0.0;
  int last_positive = 0;
  for (int k = 0; k < slots; ++k) {
    const double w = counts.weight(k);
    if (w <= 0.0) continue;
    cumulative += w;
    last_positive = k;
    if (target < cumulative) return k;
  }
  return last_positive;
}

std::vector<Promotion> promotion_step(const World& world, std::uint32_t step) {
  std::vector<Promotion> out;
  const GridConfig& config = world.config;
  const double p = config.effective_promote_prob();
  if (p <= 0.0) return out;
  for (int i = 0; i < world.dims().size(); ++i) {
    RngStream rng(config.seed, static_cast<std::uint32_t>(i), step, Purpose::kPromotion);
    if (rng.uniform01() >= p) continue;
    const int slot = choose_promotee_slot(world.agents[static_cast<std::size_t>(i)].counts, config, rng);
    out.push_back({i, world.topology.neighbor(i, slot)});
  }
  return out;
}

FitnessRanking::FitnessRanking(const std::vector<AgentRuntime>& agents)
    : FitnessRanking([&] {
        std::vector<double> means;
        means.reserve(agents.size());
        for (const auto& a : agents) {
          means.push_back(a.fitness.count > 0 ? a.fitness.mean
                                              : -std::numeric_limits<double>::infinity());
        }
        return means;
      }()) {}

FitnessRanking::FitnessRanking(const std::vector<double>& means) : rank_(means.size()) {
  std::vector<int> order(means.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return means[static_cast<std::size_t>(a)] > means[static_cast<std::size_t>(b)];
  });
  for (std::size_t r = 0; r < order.size(); ++r) rank_[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
}

bool fitness_gate(const FitnessRanking& ranking, int promoted, const GridConfig& config, RngStream& rng) {
  if (!config.task_on) return true;
  if (rng.uniform01() < config.gamma_f) return true;
  return ranking.in_top(promoted, config.top_n);
}

void apply_replication(World& world, std::vector<ReplicationEvent>& events, std::uint32_t step,
                       WorkerPool& pool) {
  const GridConfig& config = world.config;
  const GridDims dims = world.dims();

  std::vector<std::size_t> live;
  for (std::size_t e = 0; e < events.size(); ++e) {
    if (events[e].passed_fitness_gate) live.push_back(e);
  }
  std::vector<Genome> offspring(live.size());
  std::vector<int> targets(live.size());
  pool.parallel_for(live.size(), [&](std::size_t j, int) {
    ReplicationEvent& ev = events[live[j]];
    const int promoter = site_index(dims, ev.promoter);
    const int promoted = site_index(dims, ev.promoted);
    RngStream where(config.seed, static_cast<std::uint32_t>(promoter), step, Purpose::kReplicationTarget);
    targets[j] = world.topology.moore(promoted, where.uniform_int(8));
    offspring[j] = world.agents[static_cast<std::size_t>(promoted)].genome;
    if (config.mutation_on) {
      RngStream rng(config.seed, static_cast<std::uint32_t>(promoter), step, Purpose::kMutation);
      mutate_in_place(offspring[j], config.mutation_fraction, config.weight_decay, config.mutation_std, rng);
    }
  });
  for (std::size_t j = 0; j < live.size(); ++j) {
    AgentRuntime& agent = world.agents[static_cast<std::size_t>(targets[j])];
    agent.genome = std::move(offspring[j]);
    agent.reset_state();
    events[live[j]].target = site_at(dims, targets[j]);
  }
}

std::vector<ReplicationEvent> evolution_step(World& world, std::uint32_t step, WorkerPool& pool) {
  std::vector<ReplicationEvent> events;
  if (!world.config.evolution_on) return events;
  const GridDims dims = world.dims();
  const std::vector<Promotion> promotions = promotion_step(world, step);
  std::optional<FitnessRanking> ranking;
  if (world.config.task_on) ranking.emplace(world.agents);
  events.reserve(promotions.size());
  for (const Promotion& p : promotions) {
    ReplicationEvent ev;
    ev.promoter = site_at(dims, p.promoter);
    ev.promoted = site_at(dims, p.promoted);
    ev.step = step;
    RngStream rng(world.config.seed, static_cast<std::uint32_t>(p.promoter), step, Purpose::kFitnessGate);
    ev.passed_fitness_gate = !ranking || fitness_gate(*ranking, p.promoted, world.config, rng);
    events.push_back(ev);
  }
  apply_replication(world, events, step, pool);
  return events;
}

}  // namespace memesim
