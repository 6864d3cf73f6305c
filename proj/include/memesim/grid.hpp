#pragma once

#include <vector>

#include "memesim/types.hpp"

namespace memesim {

/// Sites of the (2r+1)x(2r+1) box around `site`, excluding `site`, wrapped toroidally,
/// in row-major offset order. Throws ConfigError when the grid is too small for `radius`.
std::vector<Site> neighborhood(GridDims dims, Site site, int radius);

/// Precomputed neighbor tables for every site of a torus.
class Topology {
 public:
  Topology() = default;
  Topology(GridDims dims, int message_radius);

  GridDims dims() const { return dims_; }
  int radius() const { return radius_; }
  int neighbor_count() const { return neighbor_count_; }

  /// Flat index of the k-th message neighbor of `site_index` (row-major offsets).
  int neighbor(int site_index, int k) const { return neighbors_[site_index * neighbor_count_ + k]; }
  /// Flat index of the k-th Moore-8 neighbor of `site_index`.
  int moore(int site_index, int k) const { return moore_[site_index * 8 + k]; }
  /// Slot k such that neighbor(receiver, k) == sender, i.e. the mirrored offset.
  int mirror_slot(int k) const { return neighbor_count_ - 1 - k; }

 private:
  GridDims dims_{};
  int radius_ = 0;
  int neighbor_count_ = 0;
  std::vector<int> neighbors_;
  std::vector<int> moore_;
};

}  // namespace memesim
