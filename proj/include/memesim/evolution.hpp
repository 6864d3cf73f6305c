#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "memesim/memetics.hpp"

namespace memesim {

struct Promotion {
  int promoter = 0;
  int promoted = 0;
};

struct ReplicationEvent {
  Site promoter;
  Site promoted;
  std::optional<Site> target;  // set once the event has been applied
  bool passed_fitness_gate = false;
  std::int64_t step = 0;
};

/// Neighbor slot an agent promotes: uniform with probability gamma_s (or when selection is
/// off, or nothing has been attended yet), otherwise proportional to its selection counts.
int choose_promotee_slot(const SelectionCounts& counts, const GridConfig& config, RngStream& rng);

/// Each agent promotes a neighbor with probability promote_prob. Ordered by promoter.
std::vector<Promotion> promotion_step(const World& world, std::uint32_t step);

/// Rank of every site by lifetime mean fitness, best first; ties go to the lower site index.
class FitnessRanking {
 public:
  explicit FitnessRanking(const std::vector<AgentRuntime>& agents);
  explicit FitnessRanking(const std::vector<double>& means);

  int rank(int site) const { return rank_[static_cast<std::size_t>(site)]; }
  bool in_top(int site, int top_n) const { return rank(site) < top_n; }

 private:
  std::vector<int> rank_;
};

/// Passes when the task is off, when a uniform draw falls below gamma_f, or when the
/// promoted agent ranks within the top_n grid-wide.
bool fitness_gate(const FitnessRanking& ranking, int promoted, const GridConfig& config, RngStream& rng);

/// Copies (possibly mutated) genomes of promoted agents into a random Moore-8 neighbor of
/// each, in promoter order. Offspring are built from the genomes as they were before this
/// call; a later event overwrites an earlier one that hit the same target.
void apply_replication(World& world, std::vector<ReplicationEvent>& events, std::uint32_t step,
                       WorkerPool& pool);

/// Promotion, gating and replication for one step. Returns every promotion, gated or not.
std::vector<ReplicationEvent> evolution_step(World& world, std::uint32_t step, WorkerPool& pool);

}  // namespace memesim
