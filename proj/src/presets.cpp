#include "memesim/presets.hpp"

namespace memesim {

const std::vector<AblationPreset>& ablation_presets() {
  //                                     mut    same   sel    evo    skip   shape
  static const std::vector<AblationPreset> table = {
      {"baseline",          true,  false, true,  true,  true,  {10, 3}},
      {"no_evolution",      false, false, false, false, true,  {10, 3}},
      {"no_variation",      false, true,  false, true,  true,  {10, 3}},
      {"no_mutation",       false, false, true,  true,  true,  {10, 3}},
      {"no_skip",           true,  true,  true,  true,  false, {10, 3}},
      {"no_selection_hom",  true,  true,  false, true,  true,  {10, 3}},
      {"no_selection_het",  true,  false, false, true,  true,  {10, 3}},
      {"simplified",        true,  false, true,  true,  true,  {1, 30}},
  };
  return table;
}

std::string preset_names() {
  std::string names;
  for (const auto& p : ablation_presets()) {
    if (!names.empty()) names += ", ";
    names += p.name;
  }
  return names;
}

const AblationPreset& find_preset(std::string_view name) {
  for (const auto& p : ablation_presets()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'; available: " + preset_names());
}

void apply_preset(GridConfig& config, const AblationPreset& preset) {
  config.mutation_on = preset.mutation_on;
  config.homogeneous_init = preset.homogeneous_init;
  config.selection_on = preset.selection_on;
  config.evolution_on = preset.evolution_on;
  config.skip_connection_on = preset.skip_connection_on;
  config.message_shape = preset.message_shape;
}

const std::vector<Profile>& profiles() {
  static const std::vector<Profile> table = {
      {"ci", {16, 16}, 2000},
      {"paper", {32, 32}, 10000},
  };
  return table;
}

const Profile& find_profile(std::string_view name) {
  for (const auto& p : profiles()) {
    if (p.name == name) return p;
  }
  throw ConfigError("unknown profile '" + std::string(name) + "'; available: ci, paper");
}

void apply_profile(GridConfig& config, const Profile& profile) {
  config.dims = profile.dims;
  config.steps = profile.steps;
}

}  // namespace memesim
