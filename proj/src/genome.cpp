#include "memesim/genome.hpp"

#include <cstring>

#include <Eigen/QR>

#include "memesim/config.hpp"

namespace memesim {

Genome Genome::zeros(MessageShape shape, bool with_task) {
  const int c = shape.channels;
  Genome g;
  g.shape = shape;
  g.attention = {Linear(c + kGlobalHidden + kAttentionHidden, kAttentionHidden),
                 Linear(c + kGlobalHidden + kAttentionHidden, kAttentionHidden)};
  g.attention_readout = Linear(kAttentionHidden, 1);
  g.global_update = Linear(kMessageSymbols + kGlobalHidden, kGlobalHidden);
  g.generator = {Linear(2 * c + kGlobalHidden + kGeneratorHidden, kGeneratorHidden),
                 Linear(2 * c + kGlobalHidden + kGeneratorHidden, kGeneratorHidden)};
  g.generator_readout = Linear(kGeneratorHidden, c);
  if (with_task) {
    g.task = TaskLayers{Linear(kGlobalHidden + kTaskHidden + kObservationSize, kTaskHidden),
                        Linear(kTaskHidden, kTaskHidden), Linear(kTaskHidden, kTaskHidden),
                        Linear(kTaskHidden, kActionChannels * kActionBins)};
  }
  return g;
}

std::size_t Genome::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const double*, std::size_t count) { n += count; });
  return n;
}

Eigen::MatrixXd orthogonal_init(int rows, int cols, double gain, RngStream& rng) {
  // Factor the tall orientation so Q has orthonormal columns, then transpose back if needed.
  const bool transpose = rows < cols;
  const int tall = transpose ? cols : rows;
  const int wide = transpose ? rows : cols;
  Eigen::MatrixXd a(tall, wide);
  for (int j = 0; j < wide; ++j) {
    for (int i = 0; i < tall; ++i) a(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(tall, wide);
  // Sign fix so the result is Haar-distributed.
  const Eigen::MatrixXd r = qr.matrixQR().topRows(wide).triangularView<Eigen::Upper>();
  for (int j = 0; j < wide; ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  q *= gain;
  if (transpose) return q.transpose();
  return q;
}

Genome random_genome(MessageShape shape, bool with_task, double gain, RngStream& rng) {
  Genome g = Genome::zeros(shape, with_task);
  g.visit_layers([&](Linear& l) { l.weight = orthogonal_init(l.out(), l.in(), gain, rng); });
  return g;
}

std::uint64_t genome_digest(const Genome& genome) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  genome.for_each_tensor([&](const double* p, std::size_t n) {
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(p), n * sizeof(double)), h);
  });
  return h;
}

}  // namespace memesim
