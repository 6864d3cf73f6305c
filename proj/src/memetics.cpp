#include "memesim/memetics.hpp"

#include <numeric>

#include "memesim/neural.hpp"
#include "memesim/rng.hpp"

namespace memesim {

void MessageBuffer::push(Entry entry) {
  if (static_cast<int>(ring_.size()) < capacity_) {
    ring_.push_back(std::move(entry));
    return;
  }
  ring_[static_cast<std::size_t>(head_)] = std::move(entry);
  head_ = (head_ + 1) % capacity_;
}

std::vector<NoisyMessage> MessageBuffer::messages() const {
  std::vector<NoisyMessage> out;
  out.reserve(ring_.size());
  for (int i = 0; i < size(); ++i) out.push_back((*this)[i].message);
  return out;
}

bool MessageBuffer::operator==(const MessageBuffer& o) const {
  if (capacity_ != o.capacity_ || size() != o.size()) return false;
  for (int i = 0; i < size(); ++i) {
    const Entry& a = (*this)[i];
    const Entry& b = o[i];
    if (a.slot != b.slot || a.message.source != b.message.source ||
        a.message.values != b.message.values) {
      return false;
    }
  }
  return true;
}

double SelectionCounts::total() const { return std::accumulate(weights_.begin(), weights_.end(), 0.0); }

World World::create(const GridConfig& config) {
  config.validate();
  World world;
  world.config = config;
  world.topology = Topology(config.dims, config.neighborhood_radius);
  const int n = config.dims.size();
  world.agents.resize(static_cast<std::size_t>(n));

  std::optional<Genome> shared;
  if (config.homogeneous_init) {
    RngStream rng(config.seed, 0, kSetupStep, Purpose::kInit);
    shared = random_genome(config.message_shape, config.task_on, config.init_gain, rng);
  }
  for (int i = 0; i < n; ++i) {
    AgentRuntime& agent = world.agents[static_cast<std::size_t>(i)];
    if (shared) {
      agent.genome = *shared;
    } else {
      RngStream rng(config.seed, static_cast<std::uint32_t>(i), kSetupStep, Purpose::kInit);
      agent.genome = random_genome(config.message_shape, config.task_on, config.init_gain, rng);
    }
    agent.buffer = MessageBuffer(config.buffer_capacity);
    agent.counts = SelectionCounts(config.neighbor_count());
  }
  world.broadcasts.assign(static_cast<std::size_t>(n), Message(config.message_shape));
  return world;
}

void deliver(const World& world, int site, MessageBuffer& buffer, std::uint32_t step) {
  const GridConfig& config = world.config;
  const int symbols = config.message_shape.size();
  RngStream noise(config.seed, static_cast<std::uint32_t>(site), step, Purpose::kDeliveryNoise);
  for (int k = 0; k < world.topology.neighbor_count(); ++k) {
    const int sender = world.topology.neighbor(site, k);
    const Message& m = world.broadcasts[static_cast<std::size_t>(sender)];
    MessageBuffer::Entry entry;
    entry.slot = k;
    entry.message.source = site_at(world.dims(), sender);
    for (int j = 0; j < symbols; ++j) entry.message.values[j] = m[j] + config.noise_std * noise.gaussian();
    buffer.push(std::move(entry));
  }
}

AgentStepResult agent_step(AgentRuntime& agent, const GridConfig& config, int site,
                           std::uint32_t step) {
  AgentStepResult result;
  agent.counts.decay(config.count_decay);

  MessageValues attended{};
  if (!agent.buffer.empty()) {
    const AttentionScorer scorer(agent.genome, agent.global);
    Eigen::Matrix<double, kMessageSymbols, Eigen::Dynamic> batch(kMessageSymbols, agent.buffer.size());
    for (int i = 0; i < agent.buffer.size(); ++i) {
      batch.col(i) = Eigen::Map<const Eigen::Matrix<double, kMessageSymbols, 1>>(
          agent.buffer[i].message.values.data());
    }
    const Eigen::RowVectorXd z = scorer.logits(batch);
    const std::vector<double> logits(z.data(), z.data() + z.size());
    const std::vector<double> probs =
        adaptive_softmax(logits, config.target_entropy, config.entropy_rate, config.softmax_iters);
    RngStream rng(config.seed, static_cast<std::uint32_t>(site), step, Purpose::kAttention);
    const auto& chosen = agent.buffer[sample_index(probs, rng)];
    attended = chosen.message.values;
    agent.counts.add(chosen.slot);
    result.selected_source = chosen.message.source;
    result.selected_slot = chosen.slot;
  }

  agent.global = update_global(agent.genome, agent.global, attended);
  RngStream rng(config.seed, static_cast<std::uint32_t>(site), step, Purpose::kGeneration);
  result.outgoing =
      generate_message(agent.genome, agent.global, attended, config.skip_connection_on, config.beta, rng);
  return result;
}

GridStepResult grid_step(World& world, WorkerPool& pool) {
  const auto n = static_cast<std::size_t>(world.dims().size());
  const auto step = static_cast<std::uint32_t>(world.step);

  if (world.has_broadcasts) {
    pool.parallel_for(n, [&](std::size_t i, int) {
      deliver(world, static_cast<int>(i), world.agents[i].buffer, step);
    });
  }

  GridStepResult out;
  out.broadcasts.resize(n);
  out.selected_slots.assign(n, -1);
  pool.parallel_for(n, [&](std::size_t i, int) {
    AgentStepResult r = agent_step(world.agents[i], world.config, static_cast<int>(i), step);
    out.broadcasts[i] = r.outgoing;
    out.selected_slots[i] = r.selected_slot;
  });
  world.broadcasts = out.broadcasts;
  world.has_broadcasts = true;
  return out;
}

}  // namespace memesim
