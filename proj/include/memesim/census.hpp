#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "memesim/types.hpp"

namespace memesim {

using MemeKey = std::uint32_t;

/// Injective 30-bit encoding: symbol k (row-major) sets bit 29-k when it is +1.
MemeKey canonical_key(const Message& m);
Message message_from_key(MemeKey key, MessageShape shape);

struct CensusEntry {
  MemeKey key = 0;
  std::uint32_t population = 0;
  bool operator==(const CensusEntry&) const = default;
};

/// Population of every broadcast key present, sorted by key.
using Census = std::vector<CensusEntry>;

Census take_census(std::span<const Message> broadcasts);
Census take_census(std::span<const MemeKey> keys);

struct MemeInfo {
  MemeKey key = 0;
  std::uint32_t index = 0;
  std::int64_t first_seen = 0;
  std::uint32_t peak = 0;
  bool operator==(const MemeInfo&) const = default;
};

/// Append-only index of distinct broadcasts by first appearance, with per-step populations
/// stored sparsely (only keys present at that step).
class MemeRegistry {
 public:
  struct Presence {
    std::uint32_t meme = 0;
    std::uint32_t population = 0;
    bool operator==(const Presence&) const = default;
  };

  /// Records the census for `step`; steps must be strictly increasing.
  void update(const Census& census, std::int64_t step);

  std::size_t meme_count() const { return memes_.size(); }
  std::size_t step_count() const { return steps_.size(); }
  const std::vector<MemeInfo>& memes() const { return memes_; }
  const std::vector<std::int64_t>& steps() const { return steps_; }

  /// Memes present at the i-th recorded step.
  std::span<const Presence> at(std::size_t step_slot) const;

  /// Index of `key`, if it has appeared.
  const MemeInfo* find(MemeKey key) const;

  /// (step, population) pairs where the meme was present.
  std::vector<std::pair<std::int64_t, std::uint32_t>> series(std::uint32_t meme) const;

  /// Every meme's series in one pass.
  std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> all_series() const;

  bool operator==(const MemeRegistry& o) const {
    return memes_ == o.memes_ && steps_ == o.steps_ && offsets_ == o.offsets_ && presence_ == o.presence_;
  }

  // Raw storage access for serialization.
  const std::vector<std::uint64_t>& offsets() const { return offsets_; }
  const std::vector<Presence>& presence() const { return presence_; }
  static MemeRegistry from_parts(std::vector<MemeInfo> memes, std::vector<std::int64_t> steps,
                                 std::vector<std::uint64_t> offsets, std::vector<Presence> presence);

 private:
  std::vector<MemeInfo> memes_;
  std::unordered_map<MemeKey, std::uint32_t> index_of_;
  std::vector<std::int64_t> steps_;
  std::vector<std::uint64_t> offsets_{0};
  std::vector<Presence> presence_;
};

struct StepStats {
  std::int64_t step = 0;
  std::uint32_t max_population = 0;
  std::uint32_t n_above_40 = 0;   // populations > 40
  std::uint32_t n_at_least_8 = 0; // populations >= 8
  double coverage_of_top = 0.0;   // max_population / grid size
  std::uint32_t distinct = 0;
  bool operator==(const StepStats&) const = default;
};

/// Number of memes at one step with population strictly above `threshold`.
std::uint32_t count_above(std::span<const MemeRegistry::Presence> present, std::uint32_t threshold);

struct SummaryOptions {
  std::uint32_t above_threshold = 40;
  std::uint32_t at_least_threshold = 8;
  std::uint32_t raster_threshold = 80;
  std::int64_t window = 1000;
  int histogram_bins = 10;
};

struct CoverageWindow {
  std::int64_t first_step = 0;
  std::int64_t last_step = 0;
  double max_coverage = 0.0;
  double mean_coverage = 0.0;
};

struct RunSummary {
  int grid_size = 0;
  std::vector<StepStats> steps;
  std::uint32_t max_population = 0;
  std::int64_t max_population_step = 0;
  std::uint32_t memes_above = 0;     // distinct memes whose peak > above_threshold
  std::uint32_t memes_at_least = 0;  // distinct memes whose peak >= at_least_threshold
  std::uint32_t memes_raster = 0;    // distinct memes whose peak > raster_threshold
  std::size_t distinct_memes = 0;
  std::int64_t first_step_above = -1;  // first step with any population > above_threshold
  double mean_count_at_least_10 = 0.0;
  double mean_count_at_least_20 = 0.0;
  std::vector<CoverageWindow> windows;
  std::vector<std::uint32_t> coverage_histogram;  // of per-window max coverage, bins over [0, 1]
  SummaryOptions options;
};

/// Pure fold over the registry.
RunSummary summarize(const MemeRegistry& registry, int grid_size, const SummaryOptions& options = {});

/// Distinct memes whose peak population exceeds `threshold`.
std::uint32_t memes_with_peak_above(const MemeRegistry& registry, std::uint32_t threshold);

struct Bitmap {
  int width = 1;
  int height = 1;
  std::vector<std::uint8_t> pixels = std::vector<std::uint8_t>(1, 0);  // row-major, 0 dark / 255 bright

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
};

enum class RasterRows {
  kAll,     // one row per meme, in appearance order
  kBright,  // only memes that ever exceed the threshold, still in appearance order
};

/// Rows are memes in appearance order, columns are recorded steps max-pooled in blocks of
/// `downsample`; a pixel is bright when the population exceeds `threshold`.
Bitmap render_raster(const MemeRegistry& registry, std::uint32_t threshold = 80, int downsample = 1,
                     RasterRows rows = RasterRows::kAll);

/// Binary portable graymap (P5).
void write_pgm(const Bitmap& bitmap, std::ostream& out);

void write_stats_csv(const std::vector<StepStats>& stats, std::ostream& out);

/// One JSON object per line: key, index, first_seen, peak, series. Memes whose peak is
/// below `min_peak` are omitted; the first line is a header with totals.
void write_registry_dump(const MemeRegistry& registry, std::ostream& out, std::uint32_t min_peak = 1);

}  // namespace memesim
