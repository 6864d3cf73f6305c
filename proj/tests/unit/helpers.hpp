#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "memesim/genome.hpp"
#include "memesim/rng.hpp"

namespace memesim::test {

/// Every parameter (biases included) drawn from N(0, scale^2).
inline Genome gaussian_genome(MessageShape shape, bool with_task, std::uint32_t seed, double scale = 0.5) {
  Genome g = Genome::zeros(shape, with_task);
  RngStream rng(seed, 0, 0, Purpose::kTest, 77);
  g.for_each_tensor([&](double* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) p[i] = scale * rng.gaussian();
  });
  return g;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("memesim_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace memesim::test
