#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "memesim/types.hpp"

namespace memesim {

inline constexpr int kConfigFormatVersion = 1;

/// All run parameters. Defaults are the published constants for the no-task experiments.
struct GridConfig {
  GridDims dims{32, 32};
  MessageShape message_shape{10, 3};
  int buffer_capacity = 100;
  int neighborhood_radius = 2;
  double noise_std = 0.1;

  double target_entropy = 0.6;
  double entropy_rate = 0.1;
  int softmax_iters = 20;
  double beta = 3.0;

  // Unset means 0.1 without a task and 0.2 with one.
  std::optional<double> promote_prob;
  int top_n = 16;
  double mutation_fraction = 0.001;
  double weight_decay = 0.99;
  double mutation_std = 0.2;
  double init_gain = 4.0;
  double count_decay = 0.99;
  double gamma_s = 0.0;
  double gamma_f = 1.0;

  bool evolution_on = true;
  bool mutation_on = true;
  bool selection_on = true;
  bool homogeneous_init = false;
  bool skip_connection_on = true;
  bool task_on = false;

  int task_max_steps = 400;
  // "surrogate" or "external:<command line>"
  std::string task_env = "surrogate";
  double env_timeout_s = 10.0;

  std::uint64_t seed = 1;
  std::int64_t steps = 10000;

  // Execution and output knobs; these never influence results.
  int workers = 0;
  std::int64_t checkpoint_every = 0;
  bool log_messages = true;
  int raster_downsample = 10;
  int registry_dump_min_peak = 2;

  double effective_promote_prob() const {
    return promote_prob.value_or(task_on ? 0.2 : 0.1);
  }
  int neighbor_count() const {
    return (2 * neighborhood_radius + 1) * (2 * neighborhood_radius + 1) - 1;
  }

  /// Throws ConfigError describing the first violated constraint.
  void validate() const;

  /// Assigns one key from its textual value. Throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);

  /// Flat `key = value` text, versioned, covering every key.
  std::string to_text() const;
  static GridConfig from_text(std::string_view text);
  static GridConfig from_file(const std::string& path);
  /// Assigns only the keys present in `text`, leaving the rest as they are.
  void apply_text(std::string_view text);
  void apply_file(const std::string& path);

  /// FNV-1a over the keys that affect the simulated trajectory (excludes steps and output knobs).
  std::uint64_t dynamics_hash() const;

  static std::vector<std::string> keys();
};

/// Parses "RxC" (also accepts "R×C" spelled with 'x' or 'X').
GridDims parse_dims(std::string_view text);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace memesim
