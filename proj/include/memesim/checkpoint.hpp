#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "memesim/census.hpp"
#include "memesim/memetics.hpp"

namespace memesim {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CheckpointData {
  World world;
  MemeRegistry registry;
};

/// Binary snapshot: magic, version, config hash, config text, step, every agent's genome
/// and runtime state, last broadcasts, registry, trailing FNV-1a checksum.
std::string encode_checkpoint(const World& world, const MemeRegistry& registry);
CheckpointData decode_checkpoint(const std::string& bytes);

/// Writes atomically via a temporary file and rename.
void save_checkpoint(const std::string& path, const World& world, const MemeRegistry& registry);
CheckpointData load_checkpoint(const std::string& path);

/// Refuses a checkpoint whose dynamics hash differs from `expected`, printing both.
void require_matching_hash(const World& world, std::uint64_t expected);

std::string hex64(std::uint64_t v);

}  // namespace memesim
