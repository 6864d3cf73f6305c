// Command-line front end: run, sweep, resume, replay, presets, config.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "memesim/checkpoint.hpp"
#include "memesim/message_log.hpp"
#include "memesim/presets.hpp"
#include "memesim/run.hpp"

namespace {

using namespace memesim;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

struct ConfigArgs {
  std::string preset = "baseline";
  std::string profile;
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::string dims;
  std::optional<int> workers;
  std::optional<std::int64_t> checkpoint_every;
  bool task = false;
  std::vector<std::string> overrides;
};

void add_config_options(CLI::App* cmd, ConfigArgs& a, bool with_preset = true) {
  if (with_preset) {
    cmd->add_option("--preset", a.preset, "Ablation preset (see `presets`)");
  }
  cmd->add_option("--profile", a.profile, "Scale profile: ci (16x16, 2000 steps) or paper (32x32, 10000 steps)");
  cmd->add_option("--config", a.config_file, "Config file (key = value); applied after the preset");
  cmd->add_option("--seed", a.seed, "Root random seed");
  cmd->add_option("--steps", a.steps, "Number of steps");
  cmd->add_option("--dims", a.dims, "Grid size as RxC");
  cmd->add_option("--workers", a.workers, "Worker threads (default: MEMESIM_WORKERS or all cores)");
  cmd->add_option("--checkpoint-every", a.checkpoint_every, "Write a checkpoint every N steps");
  cmd->add_flag("--task", a.task, "Enable task fitness");
  cmd->add_option("--set", a.overrides, "Override any config key: --set key=value (repeatable)");
}

GridConfig build_config(const ConfigArgs& a, GridConfig base = {}) {
  GridConfig c = base;
  apply_preset(c, find_preset(a.preset));
  if (!a.profile.empty()) apply_profile(c, find_profile(a.profile));
  if (!a.config_file.empty()) c.apply_file(a.config_file);
  if (a.task) c.task_on = true;
  if (a.seed) c.seed = *a.seed;
  if (a.steps) c.steps = *a.steps;
  if (!a.dims.empty()) c.dims = parse_dims(a.dims);
  if (a.workers) c.workers = *a.workers;
  if (a.checkpoint_every) c.checkpoint_every = *a.checkpoint_every;
  for (const std::string& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  c.validate();
  return c;
}

void print_result(const RunResult& r, const std::string& out_dir) {
  std::printf("steps=%zu distinct=%zu at_least_8=%u mean_fitness=%.6g\n", r.summary.steps.size(),
              r.summary.distinct_memes, r.summary.memes_at_least, r.mean_final_fitness);
  std::printf("%s\n", r.table_line().c_str());
  if (!out_dir.empty()) std::printf("outputs: %s\n", out_dir.c_str());
}

std::vector<double> parse_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const std::string& item : items) {
    std::size_t start = 0;
    while (start <= item.size()) {
      const auto comma = item.find(',', start);
      const std::string tok = item.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!tok.empty()) out.push_back(std::stod(tok));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid simulator of communicating, evolving recurrent agents"};
  app.require_subcommand(1);

  ConfigArgs run_args;
  std::string run_out = "run_out";
  auto* run_cmd = app.add_subcommand("run", "Run one simulation");
  add_config_options(run_cmd, run_args);
  run_cmd->add_option("--out", run_out, "Output directory");

  ConfigArgs sweep_args;
  std::vector<std::string> gs_items{"0,0.5,1"}, gf_items{"0,0.25,0.5,0.75,1"}, seed_items{"1,2,3"};
  std::string sweep_out = "sweep_out";
  bool cell_outputs = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid of runs over gamma_s x gamma_f x seeds (task on)");
  add_config_options(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--gamma-s", gs_items, "Comma-separated gamma_s values");
  sweep_cmd->add_option("--gamma-f", gf_items, "Comma-separated gamma_f values");
  sweep_cmd->add_option("--seeds", seed_items, "Comma-separated seeds");
  sweep_cmd->add_option("--out", sweep_out, "Output directory for sweep.csv");
  sweep_cmd->add_flag("--cell-outputs", cell_outputs, "Keep every cell's run directory");

  std::string ckpt_path, resume_config, resume_out;
  std::optional<std::int64_t> resume_steps;
  std::optional<int> resume_workers;
  auto* resume_cmd = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume_cmd->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
  resume_cmd->add_option("--steps", resume_steps, "New total step count");
  resume_cmd->add_option("--config", resume_config, "Refuse unless this config's hash matches the checkpoint");
  resume_cmd->add_option("--out", resume_out, "Output directory (default: the checkpoint's directory)");
  resume_cmd->add_option("--workers", resume_workers, "Worker threads");

  std::string log_path, replay_out;
  int replay_downsample = 10;
  auto* replay_cmd = app.add_subcommand("replay", "Recompute census statistics from a message log");
  replay_cmd->add_option("--log", log_path, "messages.log written by a run")->required();
  replay_cmd->add_option("--out", replay_out, "Write stats.csv, registry.jsonl and raster.pgm here");
  replay_cmd->add_option("--downsample", replay_downsample, "Raster column block size");

  auto* presets_cmd = app.add_subcommand("presets", "List ablation presets and profiles");

  ConfigArgs show_args;
  auto* config_cmd = app.add_subcommand("config", "Print the resolved config and its hash");
  add_config_options(config_cmd, show_args);

  CLI11_PARSE(app, argc, argv);

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  try {
    if (*run_cmd) {
      const GridConfig cfg = build_config(run_args);
      std::fprintf(stderr, "run: preset=%s dims=%dx%d steps=%lld seed=%llu hash=%s\n", run_args.preset.c_str(),
                   cfg.dims.rows, cfg.dims.cols, static_cast<long long>(cfg.steps),
                   static_cast<unsigned long long>(cfg.seed), hex64(cfg.dynamics_hash()).c_str());
      RunOptions opts;
      opts.out_dir = run_out;
      opts.stop = &g_stop;
      print_result(run(cfg, opts), run_out);
    } else if (*sweep_cmd) {
      SweepSpec spec;
      sweep_args.task = true;
      spec.base = build_config(sweep_args, sweep_base_config());
      spec.gamma_s = parse_list(gs_items);
      spec.gamma_f = parse_list(gf_items);
      spec.seeds.clear();
      for (double s : parse_list(seed_items)) spec.seeds.push_back(static_cast<std::uint64_t>(s));
      spec.out_dir = sweep_out;
      spec.cell_outputs = cell_outputs;
      spec.workers = spec.base.workers;
      std::printf("gamma_s,gamma_f,seed,mean_final_fitness,n_memes_at_least_8\n");
      sweep(spec, [](const SweepRow& r) {
        std::printf("%g,%g,%llu,%.6g,%u\n", r.gamma_s, r.gamma_f, static_cast<unsigned long long>(r.seed),
                    r.mean_final_fitness, r.memes_at_least_8);
        std::fflush(stdout);
      });
      std::printf("table: %s/sweep.csv\n", sweep_out.c_str());
    } else if (*resume_cmd) {
      std::optional<std::uint64_t> expected;
      if (!resume_config.empty()) expected = GridConfig::from_file(resume_config).dynamics_hash();
      RunOptions opts;
      opts.out_dir = resume_out.empty() ? std::filesystem::path(ckpt_path).parent_path().string() : resume_out;
      if (opts.out_dir.empty()) opts.out_dir = ".";
      opts.workers = resume_workers.value_or(0);
      opts.stop = &g_stop;
      print_result(resume(ckpt_path, resume_steps, expected, opts), opts.out_dir);
    } else if (*replay_cmd) {
      MessageLogHeader header;
      const MemeRegistry registry = replay_message_log(log_path, &header);
      const RunSummary summary = summarize(registry, header.dims.size());
      std::printf("steps=%zu distinct=%zu at_least_8=%u\n", summary.steps.size(), summary.distinct_memes,
                  summary.memes_at_least);
      std::printf("max_pop=%u n_above_40=%u\n", summary.max_population, summary.memes_above);
      if (!replay_out.empty()) {
        std::filesystem::create_directories(replay_out);
        const std::filesystem::path dir = replay_out;
        std::ofstream stats(dir / files::kStats);
        write_stats_csv(summary.steps, stats);
        std::ofstream reg(dir / files::kRegistry);
        write_registry_dump(registry, reg, 2);
        std::ofstream pgm(dir / files::kRaster, std::ios::binary);
        write_pgm(render_raster(registry, summary.options.raster_threshold, replay_downsample, RasterRows::kBright), pgm);
      }
    } else if (*presets_cmd) {
      std::printf("%-18s %-4s %-5s %-4s %-5s %-5s %s\n", "preset", "mut", "same", "sel", "evo", "skip", "shape");
      for (const AblationPreset& p : ablation_presets()) {
        auto yn = [](bool b) { return b ? "Y" : "N"; };
        std::printf("%-18s %-4s %-5s %-4s %-5s %-5s %dx%d\n", p.name.c_str(), yn(p.mutation_on),
                    yn(p.homogeneous_init), yn(p.selection_on), yn(p.evolution_on), yn(p.skip_connection_on),
                    p.message_shape.length, p.message_shape.channels);
      }
      for (const Profile& p : profiles()) {
        std::printf("profile %-10s %dx%d, %lld steps\n", p.name.c_str(), p.dims.rows, p.dims.cols,
                    static_cast<long long>(p.steps));
      }
    } else if (*config_cmd) {
      const GridConfig cfg = build_config(show_args);
      std::printf("%s# dynamics hash %s\n", cfg.to_text().c_str(), hex64(cfg.dynamics_hash()).c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return 3;
  } catch (const RunAborted& e) {
    std::fprintf(stderr, "run aborted: %s\n", e.what());
    if (!e.checkpoint.empty()) std::fprintf(stderr, "checkpoint written: %s\n", e.checkpoint.c_str());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
