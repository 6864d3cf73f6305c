#include <doctest.h>

#include <string>

#include "memesim/presets.hpp"

using namespace memesim;

namespace {

// Mutation, same init, selection as listed per experiment in the ablation table.
struct Row {
  const char* name;
  bool mut, same, sel;
};

constexpr Row kTable[] = {
    {"no_evolution", false, false, false},   {"no_variation", false, true, false},
    {"no_mutation", false, false, true},     {"no_skip", true, true, true},
    {"no_selection_hom", true, true, false}, {"no_selection_het", true, false, false},
    {"simplified", true, false, true},       {"baseline", true, false, true},
};

}  // namespace

TEST_CASE("preset flags match the ablation table") {
  for (const Row& row : kTable) {
    CAPTURE(row.name);
    const AblationPreset& p = find_preset(row.name);
    CHECK(p.mutation_on == row.mut);
    CHECK(p.homogeneous_init == row.same);
    CHECK(p.selection_on == row.sel);
  }
  CHECK(ablation_presets().size() == std::size(kTable));
}

TEST_CASE("structural flags of individual presets") {
  CHECK_FALSE(find_preset("no_evolution").evolution_on);
  CHECK_FALSE(find_preset("no_skip").skip_connection_on);
  CHECK(find_preset("simplified").message_shape == MessageShape{1, 30});
  for (const AblationPreset& p : ablation_presets()) {
    if (p.name == "no_evolution") continue;
    CHECK(p.evolution_on);
    if (p.name != "no_skip") CHECK(p.skip_connection_on);
    if (p.name != "simplified") CHECK(p.message_shape == MessageShape{10, 3});
  }
}

TEST_CASE("applying a preset sets only its flags") {
  GridConfig c;
  c.dims = {12, 12};
  c.seed = 5;
  apply_preset(c, find_preset("no_mutation"));
  CHECK_FALSE(c.mutation_on);
  CHECK_FALSE(c.homogeneous_init);
  CHECK(c.selection_on);
  CHECK(c.dims == GridDims{12, 12});
  CHECK(c.seed == 5);
  apply_preset(c, find_preset("baseline"));
  CHECK(c.mutation_on);
  CHECK(c.evolution_on);
  CHECK(c.skip_connection_on);
  CHECK_FALSE(c.homogeneous_init);
}

TEST_CASE("unknown preset names list the known ones") {
  try {
    find_preset("nope");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("no_variation") != std::string::npos);
  }
  CHECK(preset_names().find("baseline") != std::string::npos);
}

TEST_CASE("scale profiles") {
  GridConfig c;
  apply_profile(c, find_profile("ci"));
  CHECK(c.dims == GridDims{16, 16});
  CHECK(c.steps == 2000);
  apply_profile(c, find_profile("paper"));
  CHECK(c.dims == GridDims{32, 32});
  CHECK(c.steps == 10000);
  CHECK_THROWS_AS(find_profile("huge"), ConfigError);
}
