#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "memesim/config.hpp"

namespace memesim {

/// Flag assignment for one ablation experiment (or the baseline).
struct AblationPreset {
  std::string name;
  bool mutation_on = true;
  bool homogeneous_init = false;
  bool selection_on = true;
  bool evolution_on = true;
  bool skip_connection_on = true;
  MessageShape message_shape{10, 3};
};

const std::vector<AblationPreset>& ablation_presets();

/// Throws ConfigError listing the known presets when `name` is unknown.
const AblationPreset& find_preset(std::string_view name);

void apply_preset(GridConfig& config, const AblationPreset& preset);

/// Grid size and length for the shipped run scales.
struct Profile {
  std::string name;
  GridDims dims;
  std::int64_t steps;
};

const std::vector<Profile>& profiles();
const Profile& find_profile(std::string_view name);
void apply_profile(GridConfig& config, const Profile& profile);

std::string preset_names();

}  // namespace memesim
