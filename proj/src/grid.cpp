#include "memesim/grid.hpp"

#include <string>

namespace memesim {

namespace {

int wrap(int v, int n) { return ((v % n) + n) % n; }

void check_dims(GridDims dims, int radius) {
  if (radius < 1) throw ConfigError("neighborhood radius must be >= 1, got " + std::to_string(radius));
  const int span = 2 * radius + 1;
  if (dims.rows < span || dims.cols < span) {
    throw ConfigError("grid " + std::to_string(dims.rows) + "x" + std::to_string(dims.cols) +
                      " is smaller than the " + std::to_string(span) + "x" + std::to_string(span) +
                      " neighborhood");
  }
}

}  // namespace

std::vector<Site> neighborhood(GridDims dims, Site site, int radius) {
  check_dims(dims, radius);
  std::vector<Site> out;
  out.reserve((2 * radius + 1) * (2 * radius + 1) - 1);
  for (int dr = -radius; dr <= radius; ++dr) {
    for (int dc = -radius; dc <= radius; ++dc) {
      if (dr == 0 && dc == 0) continue;
      out.push_back({wrap(site.row + dr, dims.rows), wrap(site.col + dc, dims.cols)});
    }
  }
  return out;
}

Topology::Topology(GridDims dims, int message_radius) : dims_(dims), radius_(message_radius) {
  check_dims(dims, message_radius);
  neighbor_count_ = (2 * message_radius + 1) * (2 * message_radius + 1) - 1;
  neighbors_.reserve(static_cast<std::size_t>(dims.size()) * neighbor_count_);
  moore_.reserve(static_cast<std::size_t>(dims.size()) * 8);
  for (int i = 0; i < dims.size(); ++i) {
    const Site s = site_at(dims, i);
    for (Site n : neighborhood(dims, s, message_radius)) neighbors_.push_back(site_index(dims, n));
    for (Site n : neighborhood(dims, s, 1)) moore_.push_back(site_index(dims, n));
  }
}

}  // namespace memesim
