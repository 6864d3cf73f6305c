#include <doctest.h>

#include <atomic>
#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "memesim/census.hpp"
#include "memesim/memetics.hpp"

using namespace memesim;

namespace {

GridConfig small_config(GridDims dims = {8, 8}) {
  GridConfig c;
  c.dims = dims;
  c.steps = 10;
  return c;
}

Message pattern_message(MessageShape shape, std::uint32_t bits) {
  Message m(shape);
  for (int k = 0; k < shape.size(); ++k) m[k] = (bits >> (k % 32)) & 1u ? 1 : -1;
  return m;
}

}  // namespace

TEST_CASE("one delivery round fills 24 slots in neighbor order") {
  World w = World::create(small_config());
  MessageBuffer buf(100);
  deliver(w, 0, buf, 0);
  CHECK(buf.size() == 24);
  for (int k = 0; k < 24; ++k) {
    CHECK(buf[k].slot == k);
    CHECK(site_index(w.dims(), buf[k].message.source) == w.topology.neighbor(0, k));
  }
}

TEST_CASE("five delivery rounds keep the newest 100") {
  World w = World::create(small_config());
  MessageBuffer buf(100);
  for (std::uint32_t round = 0; round < 5; ++round) deliver(w, 3, buf, round);
  CHECK(buf.size() == 100);
  // 120 pushed: the first 20 of round one are gone, so the oldest kept entry is its slot 20.
  CHECK(buf[0].slot == 20);
  CHECK(buf[3].slot == 23);
  CHECK(buf[4].slot == 0);
  CHECK(buf[99].slot == 23);
}

TEST_CASE("delivered symbols carry N(0, 0.1^2) noise") {
  World w = World::create(small_config());
  Message plus(w.config.message_shape);
  for (int k = 0; k < kMessageSymbols; ++k) plus[k] = 1;
  w.broadcasts.assign(w.broadcasts.size(), plus);
  double sum = 0.0, sq = 0.0;
  long n = 0;
  for (std::uint32_t round = 0; n < 100000; ++round) {
    MessageBuffer buf(100);
    deliver(w, static_cast<int>(round % 64), buf, round);
    for (int i = 0; i < buf.size(); ++i) {
      for (double v : buf[i].message.values) {
        sum += v;
        sq += v * v;
        ++n;
      }
    }
  }
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  CHECK(std::abs(mean - 1.0) < 0.002);
  CHECK(std::abs(sd - 0.1) < 0.002);
}

TEST_CASE("agent_step is a pure function of agent state and stream address") {
  World w = World::create(small_config());
  MessageBuffer buf(100);
  deliver(w, 5, buf, 0);
  AgentRuntime a = w.agents[5];
  a.buffer = buf;
  AgentRuntime b = a;
  const AgentStepResult ra = agent_step(a, w.config, 5, 17);
  const AgentStepResult rb = agent_step(b, w.config, 5, 17);
  CHECK(ra.outgoing == rb.outgoing);
  CHECK(ra.selected_slot == rb.selected_slot);
  CHECK(a == b);
}

TEST_CASE("zero genome with the skip term copies the attended message at sigmoid(3)") {
  GridConfig c = small_config();
  AgentRuntime agent;
  agent.genome = Genome::zeros(c.message_shape, false);
  agent.counts = SelectionCounts(24);
  const Message target = pattern_message(c.message_shape, 0x2F0B5A3u);
  agent.buffer = MessageBuffer(100);
  for (int i = 0; i < 100; ++i) {
    MessageBuffer::Entry e;
    for (int k = 0; k < kMessageSymbols; ++k) e.message.values[k] = target[k];
    e.slot = i % 24;
    agent.buffer.push(e);
  }
  long agree = 0, total = 0;
  for (std::uint32_t t = 0; t < 10000; ++t) {
    agent.global.setZero();
    const AgentStepResult r = agent_step(agent, c, 0, t);
    for (int k = 0; k < kMessageSymbols; ++k) agree += r.outgoing[k] == target[k];
    total += kMessageSymbols;
  }
  // sigmoid(3) = 0.95257; binomial sd over 3e5 symbols is 0.0004.
  CHECK(std::abs(agree / double(total) - 0.95257) < 0.002);
}

TEST_CASE("selection counts follow the decay-then-add recurrence") {
  GridConfig c = small_config();
  AgentRuntime agent;
  agent.genome = Genome::zeros(c.message_shape, false);
  agent.counts = SelectionCounts(24);
  agent.buffer = MessageBuffer(100);
  MessageBuffer::Entry e;
  e.slot = 6;
  agent.buffer.push(e);
  for (std::uint32_t t = 0; t < 3; ++t) {
    const AgentStepResult r = agent_step(agent, c, 0, t);
    REQUIRE(r.selected_slot == 6);
  }
  CHECK(agent.counts.weight(6) == doctest::Approx((1.0 * 0.99 + 1.0) * 0.99 + 1.0).epsilon(1e-14));
  agent.buffer.clear();
  for (int k = 1; k <= 5; ++k) {
    const AgentStepResult r = agent_step(agent, c, 0, 100 + k);
    CHECK_FALSE(r.selected_source.has_value());
    CHECK(agent.counts.weight(6) ==
          doctest::Approx(((1.0 * 0.99 + 1.0) * 0.99 + 1.0) * std::pow(0.99, k)).epsilon(1e-14));
  }
  CHECK(agent.counts.total() == agent.counts.weight(6));
}

TEST_CASE("grid step is identical for any worker count") {
  GridConfig c = small_config({32, 32});
  World serial = World::create(c);
  World parallel = serial;
  WorkerPool one(1), four(4);
  for (int s = 0; s < 2; ++s) {
    const GridStepResult a = grid_step(serial, one);
    const GridStepResult b = grid_step(parallel, four);
    CHECK(a.broadcasts == b.broadcasts);
    CHECK(a.selected_slots == b.selected_slots);
    ++serial.step;
    ++parallel.step;
  }
  CHECK(serial.agents == parallel.agents);
}

TEST_CASE("a uniform broadcast reaches every buffer") {
  GridConfig c = small_config({32, 32});
  World w = World::create(c);
  const Message m = pattern_message(c.message_shape, 0x155AA33u);
  w.broadcasts.assign(w.broadcasts.size(), m);
  w.has_broadcasts = true;
  const Census census = take_census(w.broadcasts);
  REQUIRE(census.size() == 1);
  CHECK(census[0].population == 1024);
  WorkerPool pool(1);
  grid_step(w, pool);
  for (const AgentRuntime& a : w.agents) {
    REQUIRE(a.buffer.size() == 24);
    for (int i = 0; i < a.buffer.size(); ++i) {
      for (int k = 0; k < kMessageSymbols; ++k) REQUIRE((a.buffer[i].message.values[k] > 0) == (m[k] > 0));
    }
  }
}

TEST_CASE("the first step has no deliveries") {
  World w = World::create(small_config());
  WorkerPool pool(1);
  const GridStepResult r = grid_step(w, pool);
  for (int s : r.selected_slots) CHECK(s == -1);
  for (const AgentRuntime& a : w.agents) CHECK(a.buffer.empty());
  CHECK(w.has_broadcasts);
}

TEST_CASE("initialization: homogeneous versus heterogeneous genomes") {
  GridConfig c = small_config();
  c.homogeneous_init = true;
  const World same = World::create(c);
  for (const AgentRuntime& a : same.agents) CHECK(a.genome == same.agents[0].genome);
  c.homogeneous_init = false;
  const World diff = World::create(c);
  CHECK_FALSE(diff.agents[0].genome == diff.agents[1].genome);
  CHECK(World::create(c).agents[7].genome == diff.agents[7].genome);
}

TEST_CASE("a world too small for the neighborhood is rejected") {
  GridConfig c = small_config({1, 1});
  CHECK_THROWS_AS(World::create(c), ConfigError);
  c.dims = {3, 3};
  CHECK_THROWS_AS(World::create(c), ConfigError);
}

TEST_CASE("worker pool covers every index once and rethrows failures") {
  WorkerPool pool(4);
  std::vector<std::atomic<int>> hits(1000);
  pool.parallel_for(hits.size(), [&](std::size_t i, int worker) {
    REQUIRE(worker >= 0);
    REQUIRE(worker < pool.size());
    ++hits[i];
  });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(pool.parallel_for(100,
                                    [](std::size_t i, int) {
                                      if (i == 37) throw std::runtime_error("boom");
                                    }),
                  std::runtime_error);
  pool.parallel_for(0, [](std::size_t, int) {});
}
