#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "memesim/checkpoint.hpp"
#include "memesim/message_log.hpp"
#include "memesim/run.hpp"

using namespace memesim;
namespace fs = std::filesystem;

namespace {

GridConfig tiny(std::int64_t steps = 30) {
  GridConfig c;
  c.dims = {6, 6};
  c.steps = steps;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int cli(const std::string& args) {
  const int status = std::system((std::string(MEMESIM_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("a run writes every output file") {
  const auto dir = test::scratch_dir("run_files");
  RunOptions opts;
  opts.out_dir = dir.string();
  const RunResult r = run(tiny(), opts);
  for (const char* f : {files::kConfig, files::kStats, files::kRegistry, files::kRaster, files::kEvents,
                        files::kMessages, files::kSummary}) {
    CAPTURE(f);
    CHECK(fs::exists(dir / f));
  }
  std::ifstream stats(dir / files::kStats);
  int lines = 0;
  for (std::string line; std::getline(stats, line);) ++lines;
  CHECK(lines == 31);
  const auto summary = nlohmann::json::parse(slurp(dir / files::kSummary));
  CHECK(summary["steps"] == 30);
  CHECK(summary["max_population"] == r.summary.max_population);
  CHECK(summary["table_line"] == r.table_line());
  CHECK(GridConfig::from_file((dir / files::kConfig).string()).dynamics_hash() == tiny().dynamics_hash());
  CHECK(replay_message_log((dir / files::kMessages).string()) == r.registry);
  CHECK(slurp(dir / files::kEvents).rfind("step,promoter_row,promoter_col", 0) == 0);
}

TEST_CASE("zero steps are rejected") {
  CHECK_THROWS_AS(run(tiny(0)), ConfigError);
}

TEST_CASE("results do not depend on worker count") {
  RunOptions one, three;
  one.workers = 1;
  three.workers = 3;
  const RunResult a = run(tiny(), one);
  const RunResult b = run(tiny(), three);
  CHECK(a.registry == b.registry);
  CHECK(summary_json(a) == summary_json(b));
}

TEST_CASE("resume from a periodic checkpoint reproduces the uninterrupted outputs") {
  GridConfig c = tiny(40);
  c.task_on = true;
  c.task_max_steps = 15;
  const auto straight = test::scratch_dir("run_straight");
  const auto split = test::scratch_dir("run_split");
  RunOptions so;
  so.out_dir = straight.string();
  run(c, so);

  GridConfig first = c;
  first.checkpoint_every = 20;
  RunOptions fo;
  fo.out_dir = split.string();
  run(first, fo);
  REQUIRE(fs::exists(split / checkpoint_name(20)));
  // Rewind: resume from step 20 overwrites the tail of every log.
  RunOptions ro;
  ro.out_dir = split.string();
  resume((split / checkpoint_name(20)).string(), std::nullopt, c.dynamics_hash(), ro);
  for (const char* f : {files::kStats, files::kEvents, files::kMessages, files::kRegistry, files::kRaster}) {
    CAPTURE(f);
    CHECK(slurp(straight / f) == slurp(split / f));
  }
}

TEST_CASE("an interrupted run leaves a checkpoint that resumes exactly") {
  const GridConfig c = tiny(30);
  const auto straight = test::scratch_dir("run_full");
  const auto cut = test::scratch_dir("run_cut");
  RunOptions so;
  so.out_dir = straight.string();
  run(c, so);

  std::atomic<bool> stop{false};
  RunOptions co;
  co.out_dir = cut.string();
  co.stop = &stop;
  co.on_step = [&](const Simulation& sim, const StepRecord&) {
    if (sim.current_step() == 13) stop = true;
  };
  std::string ckpt;
  try {
    run(c, co);
    FAIL("expected the run to abort");
  } catch (const RunAborted& e) {
    ckpt = e.checkpoint;
  }
  REQUIRE(!ckpt.empty());
  CHECK(load_checkpoint(ckpt).world.step == 13);
  RunOptions ro;
  ro.out_dir = cut.string();
  resume(ckpt, std::nullopt, std::nullopt, ro);
  CHECK(slurp(straight / files::kStats) == slurp(cut / files::kStats));
  CHECK(slurp(straight / files::kMessages) == slurp(cut / files::kMessages));
  CHECK(slurp(straight / files::kEvents) == slurp(cut / files::kEvents));
}

TEST_CASE("resume can extend a finished run") {
  GridConfig c = tiny(20);
  c.checkpoint_every = 20;
  const auto dir = test::scratch_dir("run_extend");
  RunOptions o;
  o.out_dir = dir.string();
  run(c, o);
  const RunResult longer = resume((dir / checkpoint_name(20)).string(), 35, std::nullopt, o);
  CHECK(longer.summary.steps.size() == 35);
  const RunResult direct = run(tiny(35));
  CHECK(direct.registry == longer.registry);
  CHECK_THROWS_AS(resume((dir / checkpoint_name(20)).string(), std::nullopt, 12345u, o), CheckpointError);
}

TEST_CASE("a sweep cell equals the standalone run") {
  SweepSpec spec;
  spec.base = sweep_base_config();
  spec.base.dims = {6, 6};
  spec.base.steps = 8;
  spec.base.task_max_steps = 10;
  spec.gamma_s = {0.0, 1.0};
  spec.gamma_f = {1.0};
  spec.seeds = {4};
  const auto dir = test::scratch_dir("sweep");
  spec.out_dir = dir.string();
  const auto rows = sweep(spec);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].gamma_s == 0.0);
  CHECK(rows[1].gamma_s == 1.0);

  const GridConfig cell = sweep_cell_config(spec, 0.0, 1.0, 4);
  CHECK(cell.task_on);
  CHECK(cell.seed == 4);
  const RunResult standalone = run(cell);
  const SweepRow expect = sweep_row(standalone);
  CHECK(rows[0].mean_final_fitness == expect.mean_final_fitness);
  CHECK(rows[0].memes_at_least_8 == expect.memes_at_least_8);
  CHECK(rows[0].max_population == expect.max_population);

  std::ifstream in(dir / "sweep.csv");
  const auto back = read_sweep_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[1].gamma_s == 1.0);
  CHECK(back[0].mean_final_fitness == doctest::Approx(rows[0].mean_final_fitness));
}

TEST_CASE("with gamma_f = 1 every promotion passes the gate") {
  GridConfig c = sweep_base_config();
  c.dims = {6, 6};
  c.steps = 6;
  c.task_max_steps = 5;
  c.gamma_f = 1.0;
  c.gamma_s = 0.0;
  Simulation sim(c, 1);
  std::size_t events = 0;
  for (int s = 0; s < 6; ++s) {
    for (const ReplicationEvent& e : sim.step().events) {
      CHECK(e.passed_fitness_gate);
      ++events;
    }
  }
  CHECK(events > 0);
}

TEST_CASE("command line smoke tests") {
  const auto dir = test::scratch_dir("cli");
  CHECK(cli("presets") == 0);
  CHECK(cli("config --preset no_skip") == 0);
  CHECK(cli("run --dims 6x6 --steps 12 --checkpoint-every 6 --out " + (dir / "run").string()) == 0);
  CHECK(fs::exists(dir / "run" / files::kSummary));
  CHECK(cli("replay --log " + (dir / "run" / files::kMessages).string() + " --out " + (dir / "replay").string()) ==
        0);
  CHECK(slurp(dir / "run" / files::kStats) == slurp(dir / "replay" / files::kStats));
  CHECK(cli("resume --checkpoint " + (dir / "run" / checkpoint_name(6)).string() + " --out " +
            (dir / "run").string()) == 0);
  CHECK(cli("run --steps 0 --dims 6x6 --out " + (dir / "bad").string()) == 2);
  CHECK(cli("run --preset unknown") == 2);
  CHECK(cli("run --set nonsense=1") == 2);
  std::ofstream(dir / "other.txt") << "seed = 77\n";
  CHECK(cli("resume --checkpoint " + (dir / "run" / checkpoint_name(6)).string() + " --config " +
            (dir / "other.txt").string()) == 3);
  CHECK(cli("resume --checkpoint " + (dir / "nothing.bin").string()) == 3);
}
