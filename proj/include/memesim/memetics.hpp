#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "memesim/config.hpp"
#include "memesim/genome.hpp"
#include "memesim/grid.hpp"
#include "memesim/parallel.hpp"
#include "memesim/types.hpp"

namespace memesim {

/// FIFO message memory; pushing beyond capacity evicts the oldest entry.
class MessageBuffer {
 public:
  struct Entry {
    NoisyMessage message;
    int slot = 0;  // receiver-relative neighbor slot of the sender
  };

  explicit MessageBuffer(int capacity = 100) : capacity_(capacity) { ring_.reserve(capacity); }

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(ring_.size()); }
  bool empty() const { return ring_.empty(); }

  void push(Entry entry);
  void clear() {
    ring_.clear();
    head_ = 0;
  }

  /// Entry i in memory order, 0 = oldest.
  const Entry& operator[](int i) const {
    return ring_[static_cast<std::size_t>((head_ + i) % static_cast<int>(ring_.size()))];
  }

  std::vector<NoisyMessage> messages() const;

  bool operator==(const MessageBuffer& o) const;

 private:
  int capacity_;
  std::vector<Entry> ring_;
  int head_ = 0;
};

/// Exponentially decayed tally of whose messages an agent attended to, keyed by neighbor slot.
class SelectionCounts {
 public:
  explicit SelectionCounts(int slots = 24) : weights_(static_cast<std::size_t>(slots), 0.0) {}

  void decay(double factor) {
    for (double& w : weights_) w *= factor;
  }
  void add(int slot, double amount = 1.0) { weights_[static_cast<std::size_t>(slot)] += amount; }
  void clear() { std::fill(weights_.begin(), weights_.end(), 0.0); }

  double weight(int slot) const { return weights_[static_cast<std::size_t>(slot)]; }
  double total() const;
  int slots() const { return static_cast<int>(weights_.size()); }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }

  bool operator==(const SelectionCounts&) const = default;

 private:
  std::vector<double> weights_;
};

/// Lifetime running mean of rollout fitness.
struct FitnessRecord {
  double mean = 0.0;
  std::int64_t count = 0;

  void add(double fitness) {
    ++count;
    mean += (fitness - mean) / static_cast<double>(count);
  }
  void clear() { *this = {}; }
  bool operator==(const FitnessRecord&) const = default;
};

struct AgentRuntime {
  Genome genome;
  GlobalState global = GlobalState::Zero();
  TaskState task = TaskState::Zero();
  MessageBuffer buffer;
  SelectionCounts counts;
  FitnessRecord fitness;

  /// Fresh state for a newly placed genome.
  void reset_state() {
    global.setZero();
    task.setZero();
    buffer.clear();
    counts.clear();
    fitness.clear();
  }

  bool operator==(const AgentRuntime& o) const {
    return genome == o.genome && global == o.global && task == o.task && buffer == o.buffer &&
           counts == o.counts && fitness == o.fitness;
  }
};

/// Whole-grid state between steps.
struct World {
  GridConfig config;
  Topology topology;
  std::vector<AgentRuntime> agents;
  std::vector<Message> broadcasts;  // previous step's outgoing messages
  bool has_broadcasts = false;
  std::int64_t step = 0;  // index of the next step to execute

  /// Validates `config` and builds the initial population.
  static World create(const GridConfig& config);

  GridDims dims() const { return topology.dims(); }
};

/// Pushes one noisy copy of each neighbor's broadcast into `site`'s buffer, in neighbor order.
void deliver(const World& world, int site, MessageBuffer& buffer, std::uint32_t step);

struct AgentStepResult {
  Message outgoing;
  std::optional<Site> selected_source;
  int selected_slot = -1;
};

/// Attend, update h_g, and write the next broadcast for one agent.
AgentStepResult agent_step(AgentRuntime& agent, const GridConfig& config, int site,
                           std::uint32_t step);

struct GridStepResult {
  std::vector<Message> broadcasts;
  std::vector<int> selected_slots;  // -1 where the buffer was empty
};

/// Two-phase synchronous update for step `world.step`: all deliveries read the previous
/// broadcasts, then every agent steps. Leaves the new broadcasts in `world` but does not
/// advance `world.step`.
GridStepResult grid_step(World& world, WorkerPool& pool);

}  // namespace memesim
