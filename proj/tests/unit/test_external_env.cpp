#include <doctest.h>

#include <chrono>
#include <string>

#include "memesim/external_env.hpp"
#include "memesim/simulation.hpp"

using namespace memesim;

namespace {

std::string mock(const std::string& args) { return std::string(MEMESIM_MOCK_ENV) + " " + args; }

}  // namespace

TEST_CASE("constant mock: protocol round trip") {
  ExternalEnvironment env(mock("constant"), 5.0);
  const Observation obs = env.reset(3);
  for (double v : obs) CHECK(v == 0.5);
  const EnvStep s = env.step({0, 5, 10, 19});
  for (double v : s.obs) CHECK(v == 0.5);
  CHECK(s.metric == 1.0);
  CHECK_FALSE(s.done);
  const Genome g = Genome::zeros({10, 3}, true);
  RngStream rng(61, 0, 0, Purpose::kTest);
  CHECK(rollout_fitness(g, GlobalState::Zero(), env, 50, rng, 4) == 1.0);
}

TEST_CASE("ramp mock: fitness is the maximum metric") {
  ExternalEnvironment env(mock("ramp"), 5.0);
  const Genome g = Genome::zeros({10, 3}, true);
  RngStream rng(62, 0, 0, Purpose::kTest);
  CHECK(rollout_fitness(g, GlobalState::Zero(), env, 40, rng, 1) == 40.0);
  ExternalEnvironment down(mock("down"), 5.0);
  CHECK(rollout_fitness(g, GlobalState::Zero(), down, 40, rng, 1) == -1.0);
}

TEST_CASE("faults: exit, garbage, short observation, timeout, dead child") {
  const Genome g = Genome::zeros({10, 3}, true);
  RngStream rng(63, 0, 0, Purpose::kTest);

  ExternalEnvironment exits(mock("exit-mid 5"), 5.0);
  CHECK_THROWS_AS(rollout_fitness(g, GlobalState::Zero(), exits, 20, rng, 1), EnvironmentFault);
  CHECK_FALSE(exits.running());
  // The next episode starts a fresh child.
  CHECK_NOTHROW(exits.reset(2));
  CHECK(exits.step({0, 0, 0, 0}).metric == 1.0);

  ExternalEnvironment garbage(mock("garbage"), 5.0);
  garbage.reset(1);
  CHECK_THROWS_AS(garbage.step({0, 0, 0, 0}), EnvironmentFault);

  ExternalEnvironment short_obs(mock("short"), 5.0);
  short_obs.reset(1);
  CHECK_THROWS_AS(short_obs.step({0, 0, 0, 0}), EnvironmentFault);

  ExternalEnvironment hang(mock("hang"), 0.3);
  hang.reset(1);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(hang.step({0, 0, 0, 0}), EnvironmentFault);
  CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));

  ExternalEnvironment dead(mock("dead"), 2.0);
  try {
    dead.reset(1);
    FAIL("expected a handshake failure");
  } catch (const EnvironmentFault& e) {
    CHECK(std::string(e.what()).find("handshake") != std::string::npos);
  }

  ExternalEnvironment missing("/nonexistent/env-binary", 2.0);
  CHECK_THROWS_AS(missing.reset(1), EnvironmentFault);
}

TEST_CASE("a faulting environment does not stop the simulation") {
  GridConfig c;
  c.dims = {5, 5};
  c.steps = 3;
  c.task_on = true;
  c.task_max_steps = 10;
  c.task_env = "external:" + mock("exit-mid 5");
  c.env_timeout_s = 5.0;
  Simulation sim(c, 1);
  for (int s = 0; s < 3; ++s) {
    const StepRecord r = sim.step();
    CHECK(r.faults.size() == 25);
  }
  CHECK(sim.current_step() == 3);
  for (const AgentRuntime& a : sim.world().agents) CHECK(a.fitness.count == 0);

  // Newborns start with no fitness record, so keep every agent in place.
  c.evolution_on = false;
  c.task_env = "external:" + mock("ramp");
  Simulation ok(c, 1);
  const StepRecord r = ok.step();
  CHECK(r.faults.empty());
  for (const AgentRuntime& a : ok.world().agents) {
    CHECK(a.fitness.count == 1);
    CHECK(a.fitness.mean == 10.0);
  }
}
