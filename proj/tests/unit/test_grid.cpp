#include <doctest.h>

#include <algorithm>
#include <set>

#include "memesim/grid.hpp"

using namespace memesim;

namespace {

bool contains(const std::vector<Site>& sites, Site s) {
  return std::find(sites.begin(), sites.end(), s) != sites.end();
}

}  // namespace

TEST_CASE("radius-2 neighborhood at the corner wraps around") {
  const auto n = neighborhood({32, 32}, {0, 0}, 2);
  CHECK(n.size() == 24);
  CHECK(contains(n, {30, 30}));
  CHECK(contains(n, {2, 2}));
  CHECK(contains(n, {31, 0}));
  CHECK_FALSE(contains(n, {0, 0}));
}

TEST_CASE("neighborhood excludes the center and has no duplicates") {
  const auto n = neighborhood({32, 32}, {5, 5}, 2);
  CHECK(n.size() == 24);
  CHECK_FALSE(contains(n, {5, 5}));
  CHECK(std::set<Site>(n.begin(), n.end()).size() == 24);
}

TEST_CASE("moore-8 wraps at the far corner") {
  const auto n = neighborhood({16, 16}, {15, 15}, 1);
  CHECK(n.size() == 8);
  CHECK(contains(n, {0, 0}));
  CHECK(contains(n, {14, 14}));
}

TEST_CASE("grids smaller than the neighborhood are rejected") {
  CHECK_THROWS_AS(neighborhood({4, 32}, {0, 0}, 2), ConfigError);
  CHECK_THROWS_AS(Topology({1, 1}, 2), ConfigError);
  CHECK_NOTHROW(Topology({5, 5}, 2));
}

TEST_CASE("topology tables agree with neighborhood and mirror slots are symmetric") {
  const GridDims dims{7, 9};
  const Topology topo(dims, 2);
  CHECK(topo.neighbor_count() == 24);
  for (int i = 0; i < dims.size(); ++i) {
    const auto n = neighborhood(dims, site_at(dims, i), 2);
    const auto m = neighborhood(dims, site_at(dims, i), 1);
    for (int k = 0; k < 24; ++k) {
      REQUIRE(topo.neighbor(i, k) == site_index(dims, n[k]));
      // The sender at slot k sees the receiver at the mirrored slot.
      REQUIRE(topo.neighbor(topo.neighbor(i, k), topo.mirror_slot(k)) == i);
    }
    for (int k = 0; k < 8; ++k) REQUIRE(topo.moore(i, k) == site_index(dims, m[k]));
  }
}

TEST_CASE("every site is a neighbor of exactly 24 others") {
  const GridDims dims{8, 8};
  const Topology topo(dims, 2);
  std::vector<int> in_degree(dims.size(), 0);
  for (int i = 0; i < dims.size(); ++i) {
    for (int k = 0; k < 24; ++k) ++in_degree[topo.neighbor(i, k)];
  }
  for (int d : in_degree) CHECK(d == 24);
}
