#include "memesim/census.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace memesim {

MemeKey canonical_key(const Message& m) {
  const int n = m.shape().size();
  MemeKey key = 0;
  for (int k = 0; k < n; ++k) {
    key = (key << 1) | (m[k] > 0 ? 1u : 0u);
  }
  return key;
}

Message message_from_key(MemeKey key, MessageShape shape) {
  Message m(shape);
  const int n = shape.size();
  for (int k = 0; k < n; ++k) m[k] = ((key >> (n - 1 - k)) & 1u) ? 1 : -1;
  return m;
}

Census take_census(std::span<const MemeKey> keys) {
  std::vector<MemeKey> sorted(keys.begin(), keys.end());
  std::sort(sorted.begin(), sorted.end());
  Census out;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    out.push_back({sorted[i], static_cast<std::uint32_t>(j - i)});
    i = j;
  }
  return out;
}

Census take_census(std::span<const Message> broadcasts) {
  std::vector<MemeKey> keys;
  keys.reserve(broadcasts.size());
  for (const Message& m : broadcasts) keys.push_back(canonical_key(m));
  return take_census(keys);
}

void MemeRegistry::update(const Census& census, std::int64_t step) {
  if (!steps_.empty() && step <= steps_.back()) {
    throw std::invalid_argument("registry steps must be strictly increasing");
  }
  steps_.push_back(step);
  for (const CensusEntry& e : census) {
    auto [it, inserted] = index_of_.try_emplace(e.key, static_cast<std::uint32_t>(memes_.size()));
    if (inserted) memes_.push_back({e.key, it->second, step, 0});
    MemeInfo& info = memes_[it->second];
    info.peak = std::max(info.peak, e.population);
    presence_.push_back({it->second, e.population});
  }
  offsets_.push_back(presence_.size());
}

std::span<const MemeRegistry::Presence> MemeRegistry::at(std::size_t step_slot) const {
  return std::span<const Presence>(presence_).subspan(offsets_[step_slot],
                                                      offsets_[step_slot + 1] - offsets_[step_slot]);
}

const MemeInfo* MemeRegistry::find(MemeKey key) const {
  const auto it = index_of_.find(key);
  return it == index_of_.end() ? nullptr : &memes_[it->second];
}

std::vector<std::pair<std::int64_t, std::uint32_t>> MemeRegistry::series(std::uint32_t meme) const {
  std::vector<std::pair<std::int64_t, std::uint32_t>> out;
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    if (steps_[s] < memes_[meme].first_seen) continue;
    for (const Presence& p : at(s)) {
      if (p.meme == meme) out.emplace_back(steps_[s], p.population);
    }
  }
  return out;
}

std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> MemeRegistry::all_series() const {
  std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> out(memes_.size());
  for (std::size_t s = 0; s < steps_.size(); ++s) {
    for (const Presence& p : at(s)) out[p.meme].emplace_back(steps_[s], p.population);
  }
  return out;
}

MemeRegistry MemeRegistry::from_parts(std::vector<MemeInfo> memes, std::vector<std::int64_t> steps,
                                      std::vector<std::uint64_t> offsets, std::vector<Presence> presence) {
  if (offsets.size() != steps.size() + 1 || offsets.front() != 0 || offsets.back() != presence.size()) {
    throw std::invalid_argument("inconsistent registry offsets");
  }
  MemeRegistry r;
  r.memes_ = std::move(memes);
  r.steps_ = std::move(steps);
  r.offsets_ = std::move(offsets);
  r.presence_ = std::move(presence);
  for (std::size_t i = 0; i < r.memes_.size(); ++i) {
    if (r.memes_[i].index != i) throw std::invalid_argument("registry indices must be 0..K-1");
    r.index_of_.emplace(r.memes_[i].key, static_cast<std::uint32_t>(i));
  }
  for (const Presence& p : r.presence_) {
    if (p.meme >= r.memes_.size()) throw std::invalid_argument("registry presence refers to unknown meme");
  }
  return r;
}

std::uint32_t count_above(std::span<const MemeRegistry::Presence> present, std::uint32_t threshold) {
  return static_cast<std::uint32_t>(std::count_if(
      present.begin(), present.end(), [&](const auto& p) { return p.population > threshold; }));
}

std::uint32_t memes_with_peak_above(const MemeRegistry& registry, std::uint32_t threshold) {
  return static_cast<std::uint32_t>(std::count_if(registry.memes().begin(), registry.memes().end(),
                                                  [&](const MemeInfo& m) { return m.peak > threshold; }));
}

RunSummary summarize(const MemeRegistry& registry, int grid_size, const SummaryOptions& options) {
  RunSummary out;
  out.grid_size = grid_size;
  out.options = options;
  out.distinct_memes = registry.meme_count();
  out.steps.reserve(registry.step_count());

  double sum10 = 0.0;
  double sum20 = 0.0;
  for (std::size_t s = 0; s < registry.step_count(); ++s) {
    const auto present = registry.at(s);
    StepStats st;
    st.step = registry.steps()[s];
    st.distinct = static_cast<std::uint32_t>(present.size());
    std::uint32_t n10 = 0;
    std::uint32_t n20 = 0;
    for (const auto& p : present) {
      st.max_population = std::max(st.max_population, p.population);
      if (p.population > options.above_threshold) ++st.n_above_40;
      if (p.population >= options.at_least_threshold) ++st.n_at_least_8;
      if (p.population >= 10) ++n10;
      if (p.population >= 20) ++n20;
    }
    st.coverage_of_top = grid_size > 0 ? static_cast<double>(st.max_population) / grid_size : 0.0;
    sum10 += n10;
    sum20 += n20;
    if (st.max_population > out.max_population) {
      out.max_population = st.max_population;
      out.max_population_step = st.step;
    }
    if (out.first_step_above < 0 && st.n_above_40 > 0) out.first_step_above = st.step;
    out.steps.push_back(st);
  }
  if (!out.steps.empty()) {
    out.mean_count_at_least_10 = sum10 / static_cast<double>(out.steps.size());
    out.mean_count_at_least_20 = sum20 / static_cast<double>(out.steps.size());
  }

  for (const MemeInfo& m : registry.memes()) {
    if (m.peak > options.above_threshold) ++out.memes_above;
    if (m.peak >= options.at_least_threshold) ++out.memes_at_least;
    if (m.peak > options.raster_threshold) ++out.memes_raster;
  }

  out.coverage_histogram.assign(static_cast<std::size_t>(std::max(1, options.histogram_bins)), 0);
  if (!out.steps.empty() && options.window > 0) {
    const std::int64_t origin = out.steps.front().step;
    CoverageWindow current;
    std::int64_t current_id = -1;
    std::size_t in_window = 0;
    auto flush = [&] {
      if (in_window == 0) return;
      current.mean_coverage /= static_cast<double>(in_window);
      out.windows.push_back(current);
      const int bins = static_cast<int>(out.coverage_histogram.size());
      const int bin = std::min(bins - 1, static_cast<int>(current.max_coverage * bins));
      ++out.coverage_histogram[static_cast<std::size_t>(bin)];
    };
    for (const StepStats& st : out.steps) {
      const std::int64_t id = (st.step - origin) / options.window;
      if (id != current_id) {
        flush();
        current = {st.step, st.step, 0.0, 0.0};
        current_id = id;
        in_window = 0;
      }
      current.last_step = st.step;
      current.max_coverage = std::max(current.max_coverage, st.coverage_of_top);
      current.mean_coverage += st.coverage_of_top;
      ++in_window;
    }
    flush();
  }
  return out;
}

Bitmap render_raster(const MemeRegistry& registry, std::uint32_t threshold, int downsample, RasterRows rows) {
  if (downsample < 1) throw std::invalid_argument("downsample must be >= 1");
  Bitmap bmp;
  if (registry.meme_count() == 0 || registry.step_count() == 0) return bmp;

  std::vector<int> row_of(registry.meme_count(), -1);
  int height = 0;
  for (const MemeInfo& m : registry.memes()) {
    if (rows == RasterRows::kAll || m.peak > threshold) row_of[m.index] = height++;
  }
  if (height == 0) return bmp;
  const int width = static_cast<int>((registry.step_count() + static_cast<std::size_t>(downsample) - 1) /
                                     static_cast<std::size_t>(downsample));
  bmp.width = width;
  bmp.height = height;
  bmp.pixels.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
  for (std::size_t s = 0; s < registry.step_count(); ++s) {
    const int col = static_cast<int>(s / static_cast<std::size_t>(downsample));
    for (const auto& p : registry.at(s)) {
      const int row = row_of[p.meme];
      if (row >= 0 && p.population > threshold) {
        bmp.pixels[static_cast<std::size_t>(row) * width + col] = 255;
      }
    }
  }
  return bmp;
}

void write_pgm(const Bitmap& bitmap, std::ostream& out) {
  out << "P5\n" << bitmap.width << " " << bitmap.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(bitmap.pixels.data()),
            static_cast<std::streamsize>(bitmap.pixels.size()));
}

void write_stats_csv(const std::vector<StepStats>& stats, std::ostream& out) {
  out << "step,max_pop,n_above_40,n_above_8,coverage,distinct\n";
  char buf[160];
  for (const StepStats& s : stats) {
    std::snprintf(buf, sizeof(buf), "%lld,%u,%u,%u,%.6f,%u\n", static_cast<long long>(s.step),
                  s.max_population, s.n_above_40, s.n_at_least_8, s.coverage_of_top, s.distinct);
    out << buf;
  }
}

void write_registry_dump(const MemeRegistry& registry, std::ostream& out, std::uint32_t min_peak) {
  const auto& steps = registry.steps();
  out << "{\"format\":\"memesim-registry\",\"version\":1,\"memes\":" << registry.meme_count()
      << ",\"steps\":" << registry.step_count()
      << ",\"first_step\":" << (steps.empty() ? 0 : steps.front())
      << ",\"last_step\":" << (steps.empty() ? 0 : steps.back()) << ",\"min_peak\":" << min_peak << "}\n";
  std::vector<std::int64_t> slot(registry.meme_count(), -1);
  std::size_t kept = 0;
  for (const MemeInfo& m : registry.memes()) {
    if (m.peak >= min_peak) slot[m.index] = static_cast<std::int64_t>(kept++);
  }
  std::vector<std::vector<std::pair<std::int64_t, std::uint32_t>>> series(kept);
  for (std::size_t s = 0; s < registry.step_count(); ++s) {
    for (const auto& p : registry.at(s)) {
      if (slot[p.meme] >= 0) series[static_cast<std::size_t>(slot[p.meme])].emplace_back(steps[s], p.population);
    }
  }
  for (const MemeInfo& m : registry.memes()) {
    if (slot[m.index] < 0) continue;
    out << "{\"key\":" << m.key << ",\"index\":" << m.index << ",\"first_seen\":" << m.first_seen
        << ",\"peak\":" << m.peak << ",\"series\":[";
    bool first = true;
    for (const auto& [step, pop] : series[static_cast<std::size_t>(slot[m.index])]) {
      if (!first) out << ',';
      first = false;
      out << '[' << step << ',' << pop << ']';
    }
    out << "]}\n";
  }
}

}  // namespace memesim
