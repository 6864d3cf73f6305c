#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memesim/census.hpp"
#include "memesim/config.hpp"
#include "memesim/simulation.hpp"

namespace memesim {

/// Raised when a run stops early; `checkpoint` names the snapshot written on the way out, if any.
class RunAborted : public std::runtime_error {
 public:
  RunAborted(const std::string& what, std::string checkpoint)
      : std::runtime_error(what), checkpoint(std::move(checkpoint)) {}
  std::string checkpoint;
};

struct RunOptions {
  std::string out_dir;  // empty: no files are written
  SummaryOptions summary;
  int workers = 0;      // 0: config.workers, then MEMESIM_WORKERS, then hardware
  const std::atomic<bool>* stop = nullptr;  // checked between steps
  std::function<void(const Simulation&, const StepRecord&)> on_step;
};

struct RunResult {
  GridConfig config;
  std::uint64_t config_hash = 0;
  RunSummary summary;
  MemeRegistry registry;
  double mean_final_fitness = 0.0;
  std::size_t replication_events = 0;  // applied replications in this invocation
  std::size_t environment_faults = 0;

  /// "max_pop=<n> n_above_40=<n>", the per-run figures reported for each ablation.
  std::string table_line() const;
};

/// Runs `config.steps` steps from a fresh world.
RunResult run(const GridConfig& config, const RunOptions& options = {});

/// Continues a simulation until `sim.config().steps` have been executed in total.
RunResult continue_run(Simulation& sim, const RunOptions& options = {});

/// Loads a checkpoint and continues it. `steps` (when set) replaces the total step count;
/// `expected_hash` (when set) must equal the checkpoint's config hash.
RunResult resume(const std::string& checkpoint_path, std::optional<std::int64_t> steps,
                 std::optional<std::uint64_t> expected_hash, const RunOptions& options = {});

/// Summary of a finished run as a JSON document.
std::string summary_json(const RunResult& result);

/// Output file names inside a run directory.
namespace files {
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kStats = "stats.csv";
inline constexpr const char* kRegistry = "registry.jsonl";
inline constexpr const char* kRaster = "raster.pgm";
inline constexpr const char* kEvents = "events.csv";
inline constexpr const char* kMessages = "messages.log";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kFaults = "faults.log";
inline constexpr const char* kAbortCheckpoint = "checkpoint_abort.bin";
}  // namespace files

std::string checkpoint_name(std::int64_t step);

struct SweepSpec {
  GridConfig base;
  std::vector<double> gamma_s{0.0, 0.5, 1.0};
  std::vector<double> gamma_f{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::string out_dir;       // sweep.csv goes here when set
  bool cell_outputs = false; // also write each cell's full run directory
  int workers = 0;
};

struct SweepRow {
  double gamma_s = 0.0;
  double gamma_f = 0.0;
  std::uint64_t seed = 0;
  double mean_final_fitness = 0.0;
  std::uint32_t memes_at_least_8 = 0;
  std::uint32_t max_population = 0;
  std::uint32_t memes_above_40 = 0;
};

/// Task on, 16x16, 1000 steps, baseline flags.
GridConfig sweep_base_config();

/// Config of one sweep cell.
GridConfig sweep_cell_config(const SweepSpec& spec, double gamma_s, double gamma_f, std::uint64_t seed);

/// One run per (gamma_s, gamma_f, seed), iterated in that nesting order.
std::vector<SweepRow> sweep(const SweepSpec& spec,
                            const std::function<void(const SweepRow&)>& on_row = {});

SweepRow sweep_row(const RunResult& result);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace memesim
