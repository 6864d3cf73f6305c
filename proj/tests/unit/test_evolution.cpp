#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "memesim/evolution.hpp"

using namespace memesim;

namespace {

GridConfig small_config() {
  GridConfig c;
  c.dims = {8, 8};
  c.steps = 10;
  return c;
}

// Applies a single event on a scratch copy and reports where it landed.
int lone_target(const World& world, Site promoter, Site promoted, std::uint32_t step) {
  World copy = world;
  std::vector<ReplicationEvent> ev{{promoter, promoted, std::nullopt, true, step}};
  WorkerPool pool(1);
  apply_replication(copy, ev, step, pool);
  return site_index(world.dims(), *ev[0].target);
}

std::size_t differing_parameters(const Genome& a, const Genome& b) {
  std::vector<double> x, y;
  a.for_each_tensor([&](const double* p, std::size_t n) { x.insert(x.end(), p, p + n); });
  b.for_each_tensor([&](const double* p, std::size_t n) { y.insert(y.end(), p, p + n); });
  std::size_t d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
  return d;
}

}  // namespace

TEST_CASE("gamma_s = 1 promotes uniformly over the neighborhood") {
  GridConfig c = small_config();
  c.gamma_s = 1.0;
  SelectionCounts counts(24);
  counts.add(3, 50.0);
  counts.add(11, 5.0);
  RngStream rng(41, 0, 0, Purpose::kTest);
  constexpr int n = 100000;
  std::vector<int> hist(24, 0);
  for (int i = 0; i < n; ++i) ++hist[choose_promotee_slot(counts, c, rng)];
  double chi2 = 0.0;
  const double e = n / 24.0;
  for (int h : hist) chi2 += (h - e) * (h - e) / e;
  // 0.99 quantile of chi-square with 23 degrees of freedom.
  CHECK(chi2 < 41.64);
}

TEST_CASE("gamma_s = 0 promotes in proportion to selection counts") {
  GridConfig c = small_config();
  c.gamma_s = 0.0;
  SelectionCounts counts(24);
  counts.add(4, 90.0);
  counts.add(17, 10.0);
  RngStream rng(42, 0, 0, Purpose::kTest);
  constexpr int n = 10000;
  int a = 0, other = 0;
  for (int i = 0; i < n; ++i) {
    const int s = choose_promotee_slot(counts, c, rng);
    a += s == 4;
    other += s != 4 && s != 17;
  }
  CHECK(std::abs(a / double(n) - 0.9) < 0.01);
  CHECK(other == 0);
}

TEST_CASE("promotion falls back to uniform without selection or history") {
  GridConfig c = small_config();
  SelectionCounts empty(24);
  RngStream rng(43, 0, 0, Purpose::kTest);
  std::vector<int> hist(24, 0);
  for (int i = 0; i < 24000; ++i) ++hist[choose_promotee_slot(empty, c, rng)];
  for (int h : hist) CHECK(h > 800);

  c.selection_on = false;
  SelectionCounts peaked(24);
  peaked.add(0, 1000.0);
  std::vector<int> hist2(24, 0);
  for (int i = 0; i < 24000; ++i) ++hist2[choose_promotee_slot(peaked, c, rng)];
  for (int h : hist2) CHECK(h > 800);
}

TEST_CASE("promotion rate and zero promotion probability") {
  GridConfig c = small_config();
  World w = World::create(c);
  std::size_t total = 0;
  for (std::uint32_t s = 0; s < 200; ++s) total += promotion_step(w, s).size();
  // 64 agents x 200 steps x 0.1; binomial sd about 24.
  CHECK(std::abs(static_cast<double>(total) - 1280.0) < 100.0);

  w.config.promote_prob = 0.0;
  for (std::uint32_t s = 0; s < 200; ++s) CHECK(promotion_step(w, s).empty());
  WorkerPool pool(1);
  for (std::uint32_t s = 0; s < 20; ++s) CHECK(evolution_step(w, s, pool).empty());
}

TEST_CASE("promotions only name message neighbors") {
  World w = World::create(small_config());
  for (std::uint32_t s = 0; s < 50; ++s) {
    for (const Promotion& p : promotion_step(w, s)) {
      bool found = false;
      for (int k = 0; k < 24; ++k) found |= w.topology.neighbor(p.promoter, k) == p.promoted;
      REQUIRE(found);
    }
  }
}

TEST_CASE("fitness ranking: best first, ties by site, unrated last") {
  const FitnessRanking r(std::vector<double>{1.0, 5.0, 5.0, -2.0});
  CHECK(r.rank(1) == 0);
  CHECK(r.rank(2) == 1);
  CHECK(r.rank(0) == 2);
  CHECK(r.rank(3) == 3);

  std::vector<AgentRuntime> agents(3);
  agents[0].fitness.add(-100.0);
  agents[2].fitness.add(3.0);
  const FitnessRanking ra(agents);
  CHECK(ra.rank(2) == 0);
  CHECK(ra.rank(0) == 1);
  CHECK(ra.rank(1) == 2);
}

TEST_CASE("fitness gate boundaries") {
  GridConfig c = small_config();
  c.task_on = true;
  c.top_n = 16;
  std::vector<double> means(256);
  for (int i = 0; i < 256; ++i) means[i] = 1000.0 - i;  // site i has rank i
  const FitnessRanking ranking(means);
  RngStream rng(44, 0, 0, Purpose::kTest);

  c.gamma_f = 1.0;
  for (int i = 0; i < 1000; ++i) REQUIRE(fitness_gate(ranking, 255, c, rng));

  c.gamma_f = 0.0;
  CHECK_FALSE(fitness_gate(ranking, 16, c, rng));  // 17th best
  CHECK(fitness_gate(ranking, 15, c, rng));        // 16th best

  c.gamma_f = 0.5;
  int pass = 0;
  for (int i = 0; i < 10000; ++i) pass += fitness_gate(ranking, 99, c, rng);
  CHECK(std::abs(pass / 10000.0 - 0.5) < 0.015);

  c.task_on = false;
  c.gamma_f = 0.0;
  CHECK(fitness_gate(ranking, 200, c, rng));
}

TEST_CASE("replication lands in the promoted agent's Moore-8 and resets the newborn") {
  GridConfig c = small_config();
  c.mutation_on = false;
  World w = World::create(c);
  for (AgentRuntime& a : w.agents) a.fitness.add(1.0);
  const Site promoter{2, 2}, promoted{3, 4};
  std::vector<ReplicationEvent> ev{{promoter, promoted, std::nullopt, true, 0}};
  WorkerPool pool(1);
  const Genome parent = w.agents[site_index(w.dims(), promoted)].genome;
  apply_replication(w, ev, 0, pool);
  REQUIRE(ev[0].target.has_value());
  const int t = site_index(w.dims(), *ev[0].target);
  bool moore = false;
  for (int k = 0; k < 8; ++k) moore |= w.topology.moore(site_index(w.dims(), promoted), k) == t;
  CHECK(moore);
  CHECK(w.agents[t].genome == parent);
  CHECK(w.agents[t].fitness.count == 0);
  CHECK(w.agents[t].buffer.empty());
  CHECK(w.agents[t].global.isZero());
}

TEST_CASE("gated-out events are not applied") {
  World w = World::create(small_config());
  const World before = w;
  std::vector<ReplicationEvent> ev{{{0, 0}, {0, 1}, std::nullopt, false, 0}};
  WorkerPool pool(1);
  apply_replication(w, ev, 0, pool);
  CHECK_FALSE(ev[0].target.has_value());
  CHECK(w.agents == before.agents);
}

TEST_CASE("two events on one target: the later promoter wins, parents are pre-step genomes") {
  GridConfig c = small_config();
  c.mutation_on = false;
  const World w = World::create(c);
  const GridDims d = w.dims();
  const Site p1{3, 3}, p2{3, 4};
  const std::uint32_t step = 5;
  // Find promoters a < b whose events hit one site outside {p1, p2}.
  std::vector<int> t1(d.size()), t2(d.size());
  for (int i = 0; i < d.size(); ++i) {
    t1[i] = lone_target(w, site_at(d, i), p1, step);
    t2[i] = lone_target(w, site_at(d, i), p2, step);
  }
  int a = -1, b = -1, target = -1;
  for (int i = 0; i < d.size() && a < 0; ++i) {
    if (t1[i] == site_index(d, p1) || t1[i] == site_index(d, p2)) continue;
    for (int j = i + 1; j < d.size(); ++j) {
      if (t2[j] == t1[i]) {
        a = i;
        b = j;
        target = t1[i];
        break;
      }
    }
  }
  REQUIRE(a >= 0);
  World x = w;
  std::vector<ReplicationEvent> ev{{site_at(d, a), p1, std::nullopt, true, step},
                                   {site_at(d, b), p2, std::nullopt, true, step}};
  WorkerPool pool(2);
  apply_replication(x, ev, step, pool);
  CHECK(x.agents[target].genome == w.agents[site_index(d, p2)].genome);
  World y = w;
  WorkerPool serial(1);
  std::vector<ReplicationEvent> ev2{{site_at(d, a), p1, std::nullopt, true, step},
                                    {site_at(d, b), p2, std::nullopt, true, step}};
  apply_replication(y, ev2, step, serial);
  CHECK(x.agents == y.agents);
}

TEST_CASE("offspring mutation counts follow Binomial(|genome|, 0.001)") {
  GridConfig c = small_config();
  World w = World::create(c);
  const Site promoted{4, 4};
  const Genome parent = w.agents[site_index(w.dims(), promoted)].genome;
  const double n = static_cast<double>(parent.parameter_count());
  const double p = c.mutation_fraction;
  WorkerPool pool(1);
  constexpr int trials = 1000;
  double sum = 0.0;
  int zeros = 0;
  for (int t = 0; t < trials; ++t) {
    World x = w;
    std::vector<ReplicationEvent> ev{{{0, 0}, promoted, std::nullopt, true, static_cast<std::int64_t>(t)}};
    apply_replication(x, ev, static_cast<std::uint32_t>(t), pool);
    const auto k = differing_parameters(parent, x.agents[site_index(w.dims(), *ev[0].target)].genome);
    sum += static_cast<double>(k);
    zeros += k == 0;
  }
  const double mean = sum / trials;
  CHECK(std::abs(mean - n * p) < 3.0 * std::sqrt(n * p * (1 - p) / trials));
  const double p0 = std::pow(1 - p, n);
  CHECK(std::abs(zeros / double(trials) - p0) < 3.0 * std::sqrt(p0 * (1 - p0) / trials));
}

TEST_CASE("evolution off produces no events") {
  GridConfig c = small_config();
  c.evolution_on = false;
  World w = World::create(c);
  const World before = w;
  WorkerPool pool(1);
  for (std::uint32_t s = 0; s < 50; ++s) CHECK(evolution_step(w, s, pool).empty());
  CHECK(w.agents == before.agents);
}
