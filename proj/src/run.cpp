#include "memesim/run.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "memesim/checkpoint.hpp"
#include "memesim/message_log.hpp"
#include "memesim/presets.hpp"

namespace memesim {

namespace fs = std::filesystem;

namespace {

constexpr const char* kEventsHeader =
    "step,promoter_row,promoter_col,promoted_row,promoted_col,passed_gate,target_row,target_col";

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

/// Keeps the header and rows whose leading step is below `step`.
void truncate_csv_by_step(const fs::path& path, std::int64_t step) {
  std::ifstream in(path);
  std::string line;
  std::string kept;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      kept += line + "\n";
      header = false;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    if (std::stoll(line.substr(0, comma)) < step) kept += line + "\n";
  }
  in.close();
  write_text(path, kept);
}

class RunOutputs {
 public:
  RunOutputs(const fs::path& dir, const Simulation& sim) : dir_(dir) {
    fs::create_directories(dir);
    const GridConfig& cfg = sim.config();
    const std::int64_t from = sim.current_step();
    write_text(dir / files::kConfig, cfg.to_text());

    const fs::path events = dir / files::kEvents;
    if (from > 0 && fs::exists(events)) {
      truncate_csv_by_step(events, from);
      events_.open(events, std::ios::app);
    } else {
      events_.open(events, std::ios::trunc);
      events_ << kEventsHeader << "\n";
    }

    const fs::path faults = dir / files::kFaults;
    if (from > 0 && fs::exists(faults)) truncate_csv_by_step(faults, from);
    else if (fs::exists(faults)) fs::remove(faults);

    if (cfg.log_messages) {
      const fs::path log = dir / files::kMessages;
      const bool append = from > 0 && fs::exists(log);
      if (append) truncate_message_log(log.string(), from);
      messages_ = std::make_unique<MessageLogWriter>(log.string(), MessageLogHeader{cfg.dims, cfg.message_shape},
                                                     append);
    }
  }

  void record(const StepRecord& rec) {
    char buf[192];
    for (const ReplicationEvent& e : rec.events) {
      std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%d,%d,%d,", static_cast<long long>(e.step), e.promoter.row,
                    e.promoter.col, e.promoted.row, e.promoted.col, e.passed_fitness_gate ? 1 : 0);
      events_ << buf;
      if (e.target) events_ << e.target->row << ',' << e.target->col;
      else events_ << ',';
      events_ << '\n';
    }
    if (!events_) throw std::runtime_error("write failed on " + (dir_ / files::kEvents).string());
    if (messages_) messages_->write(rec.step, rec.keys);
    if (!rec.faults.empty()) {
      std::ofstream f(dir_ / files::kFaults, std::ios::app);
      for (const auto& fault : rec.faults) f << rec.step << ',' << fault.agent << ',' << fault.what << '\n';
    }
  }

  void close() {
    events_.close();
    if (messages_) messages_->flush();
    messages_.reset();
  }

 private:
  fs::path dir_;
  std::ofstream events_;
  std::unique_ptr<MessageLogWriter> messages_;
};

void write_final_outputs(const fs::path& dir, const RunResult& result) {
  {
    std::ofstream out(dir / files::kStats, std::ios::trunc);
    write_stats_csv(result.summary.steps, out);
  }
  {
    std::ofstream out(dir / files::kRegistry, std::ios::trunc);
    write_registry_dump(result.registry, out, static_cast<std::uint32_t>(result.config.registry_dump_min_peak));
  }
  {
    std::ofstream out(dir / files::kRaster, std::ios::binary | std::ios::trunc);
    write_pgm(render_raster(result.registry, result.summary.options.raster_threshold,
                            result.config.raster_downsample, RasterRows::kBright),
              out);
  }
  write_text(dir / files::kSummary, summary_json(result) + "\n");
}

std::string try_abort_checkpoint(const fs::path& dir, const Simulation& sim) {
  if (dir.empty()) return {};
  const fs::path path = dir / files::kAbortCheckpoint;
  try {
    save_checkpoint(path.string(), sim.world(), sim.registry());
    return path.string();
  } catch (const std::exception&) {
    return {};
  }
}

}  // namespace

std::string checkpoint_name(std::int64_t step) { return "checkpoint_" + std::to_string(step) + ".bin"; }

std::string RunResult::table_line() const {
  return "max_pop=" + std::to_string(summary.max_population) + " n_above_40=" + std::to_string(summary.memes_above);
}

std::string summary_json(const RunResult& r) {
  nlohmann::ordered_json j;
  const RunSummary& s = r.summary;
  j["config_hash"] = hex64(r.config_hash);
  j["seed"] = r.config.seed;
  j["dims"] = std::to_string(r.config.dims.rows) + "x" + std::to_string(r.config.dims.cols);
  j["steps"] = s.steps.size();
  j["last_step"] = s.steps.empty() ? -1 : s.steps.back().step;
  j["max_population"] = s.max_population;
  j["max_population_step"] = s.max_population_step;
  j["memes_above_40"] = s.memes_above;
  j["memes_at_least_8"] = s.memes_at_least;
  j["memes_above_raster_threshold"] = s.memes_raster;
  j["distinct_memes"] = s.distinct_memes;
  j["first_step_above_40"] = s.first_step_above;
  j["mean_count_at_least_10"] = s.mean_count_at_least_10;
  j["mean_count_at_least_20"] = s.mean_count_at_least_20;
  j["coverage_histogram"] = s.coverage_histogram;
  auto windows = nlohmann::ordered_json::array();
  for (const CoverageWindow& w : s.windows) {
    windows.push_back({{"first_step", w.first_step},
                       {"last_step", w.last_step},
                       {"max_coverage", w.max_coverage},
                       {"mean_coverage", w.mean_coverage}});
  }
  j["windows"] = windows;
  j["task_on"] = r.config.task_on;
  j["mean_final_fitness"] = r.mean_final_fitness;
  j["replication_events"] = r.replication_events;
  j["environment_faults"] = r.environment_faults;
  j["table_line"] = r.table_line();
  return j.dump(2);
}

RunResult continue_run(Simulation& sim, const RunOptions& options) {
  const GridConfig& cfg = sim.config();
  const fs::path dir = options.out_dir;
  std::unique_ptr<RunOutputs> outputs;
  if (!dir.empty()) outputs = std::make_unique<RunOutputs>(dir, sim);

  RunResult result;
  while (sim.current_step() < cfg.steps) {
    if (options.stop && options.stop->load()) {
      const std::string ckpt = try_abort_checkpoint(dir, sim);
      throw RunAborted("interrupted before step " + std::to_string(sim.current_step()), ckpt);
    }
    StepRecord rec;
    try {
      rec = sim.step();
    } catch (const std::exception& e) {
      throw RunAborted("step " + std::to_string(sim.current_step()) + " failed: " + e.what() +
                           " (in-memory state is mid-step; resume from the latest periodic checkpoint)",
                       {});
    }
    for (const ReplicationEvent& e : rec.events) result.replication_events += e.target ? 1 : 0;
    result.environment_faults += rec.faults.size();
    try {
      if (outputs) outputs->record(rec);
      if (!dir.empty() && cfg.checkpoint_every > 0 && sim.current_step() % cfg.checkpoint_every == 0) {
        save_checkpoint((dir / checkpoint_name(sim.current_step())).string(), sim.world(), sim.registry());
      }
    } catch (const std::exception& e) {
      const std::string ckpt = try_abort_checkpoint(dir, sim);
      throw RunAborted("output failed after step " + std::to_string(rec.step) + ": " + e.what(), ckpt);
    }
    if (options.on_step) options.on_step(sim, rec);
  }
  if (outputs) outputs->close();

  result.config = cfg;
  result.config_hash = cfg.dynamics_hash();
  result.registry = sim.registry();
  result.summary = summarize(result.registry, cfg.dims.size(), options.summary);
  result.mean_final_fitness = sim.mean_fitness();
  if (!dir.empty()) write_final_outputs(dir, result);
  return result;
}

RunResult run(const GridConfig& config, const RunOptions& options) {
  config.validate();
  Simulation sim(config, options.workers);
  return continue_run(sim, options);
}

RunResult resume(const std::string& checkpoint_path, std::optional<std::int64_t> steps,
                 std::optional<std::uint64_t> expected_hash, const RunOptions& options) {
  CheckpointData data = load_checkpoint(checkpoint_path);
  if (expected_hash) require_matching_hash(data.world, *expected_hash);
  if (steps) {
    data.world.config.steps = *steps;
    data.world.config.validate();
  }
  Simulation sim(std::move(data.world), std::move(data.registry), options.workers);
  return continue_run(sim, options);
}

GridConfig sweep_base_config() {
  GridConfig c;
  apply_preset(c, find_preset("baseline"));
  c.task_on = true;
  c.dims = {16, 16};
  c.steps = 1000;
  return c;
}

GridConfig sweep_cell_config(const SweepSpec& spec, double gamma_s, double gamma_f, std::uint64_t seed) {
  GridConfig c = spec.base;
  c.gamma_s = gamma_s;
  c.gamma_f = gamma_f;
  c.seed = seed;
  return c;
}

SweepRow sweep_row(const RunResult& r) {
  SweepRow row;
  row.gamma_s = r.config.gamma_s;
  row.gamma_f = r.config.gamma_f;
  row.seed = r.config.seed;
  row.mean_final_fitness = r.mean_final_fitness;
  row.memes_at_least_8 = r.summary.memes_at_least;
  row.max_population = r.summary.max_population;
  row.memes_above_40 = r.summary.memes_above;
  return row;
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const std::function<void(const SweepRow&)>& on_row) {
  if (spec.gamma_s.empty() || spec.gamma_f.empty() || spec.seeds.empty()) {
    throw ConfigError("sweep needs at least one gamma_s, gamma_f and seed");
  }
  std::vector<SweepRow> rows;
  for (double gs : spec.gamma_s) {
    for (double gf : spec.gamma_f) {
      for (std::uint64_t seed : spec.seeds) {
        GridConfig cfg = sweep_cell_config(spec, gs, gf, seed);
        RunOptions opts;
        opts.workers = spec.workers;
        if (spec.cell_outputs && !spec.out_dir.empty()) {
          char name[96];
          std::snprintf(name, sizeof(name), "cell_gs%.3f_gf%.3f_seed%llu", gs, gf,
                        static_cast<unsigned long long>(seed));
          opts.out_dir = (fs::path(spec.out_dir) / name).string();
        } else {
          cfg.log_messages = false;
        }
        rows.push_back(sweep_row(run(cfg, opts)));
        if (on_row) on_row(rows.back());
      }
    }
  }
  if (!spec.out_dir.empty()) {
    fs::create_directories(spec.out_dir);
    std::ofstream out(fs::path(spec.out_dir) / "sweep.csv", std::ios::trunc);
    write_sweep_csv(rows, out);
  }
  return rows;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "gamma_s,gamma_f,seed,mean_final_fitness,n_memes_at_least_8,max_pop,n_above_40\n";
  char buf[192];
  for (const SweepRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%llu,%.17g,%u,%u,%u\n", r.gamma_s, r.gamma_f,
                  static_cast<unsigned long long>(r.seed), r.mean_final_fitness, r.memes_at_least_8,
                  r.max_population, r.memes_above_40);
    out << buf;
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f[7];
    for (auto& field : f) std::getline(ss, field, ',');
    SweepRow r;
    r.gamma_s = std::stod(f[0]);
    r.gamma_f = std::stod(f[1]);
    r.seed = std::stoull(f[2]);
    r.mean_final_fitness = std::stod(f[3]);
    r.memes_at_least_8 = static_cast<std::uint32_t>(std::stoul(f[4]));
    r.max_population = static_cast<std::uint32_t>(std::stoul(f[5]));
    r.memes_above_40 = static_cast<std::uint32_t>(std::stoul(f[6]));
    rows.push_back(r);
  }
  return rows;
}

}  // namespace memesim
