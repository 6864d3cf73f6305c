#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Core>

#include "memesim/rng.hpp"
#include "memesim/types.hpp"

namespace memesim {

/// Affine layer y = W x + b with W stored out x in.
struct Linear {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;

  Linear() = default;
  Linear(int in, int out) : weight(Eigen::MatrixXd::Zero(out, in)), bias(Eigen::VectorXd::Zero(out)) {}

  int in() const { return static_cast<int>(weight.cols()); }
  int out() const { return static_cast<int>(weight.rows()); }
  Eigen::VectorXd operator()(const Eigen::VectorXd& x) const { return weight * x + bias; }

  bool operator==(const Linear& o) const {
    return weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
           bias.size() == o.bias.size() && weight == o.weight && bias == o.bias;
  }
};

/// Gate and update layers sharing one input layout.
struct GatedCell {
  Linear gate;
  Linear update;

  bool operator==(const GatedCell&) const = default;
};

struct TaskLayers {
  Linear input;        // [h_g, h_t, obs] -> 16
  Linear hidden;       // 16 -> 16
  Linear state_head;   // 16 -> 16
  Linear action_head;  // 16 -> 4 x 20

  bool operator==(const TaskLayers&) const = default;
};

/// Every evolvable weight of one agent. Layer shapes follow from the message shape.
///
/// Input layouts:
///   attention cell:  [message position (C), h_g (16), h_a (10)]
///   global update:   [message (30), h_g (16)]
///   generator cell:  [attended[i] (C), attended[L-1-i] (C), h_g (16), h_m (10)]
///   task input:      [h_g (16), h_t (16), observation (24)]
struct Genome {
  MessageShape shape{};
  GatedCell attention;
  Linear attention_readout;
  Linear global_update;
  GatedCell generator;
  Linear generator_readout;
  std::optional<TaskLayers> task;

  /// Zero-initialized genome.
  static Genome zeros(MessageShape shape, bool with_task);

  std::size_t parameter_count() const;

  /// Visits every parameter tensor (weights, then bias, layer by layer) in a fixed order.
  template <typename F>
  void for_each_tensor(F&& f) {
    visit_layers([&](Linear& l) {
      f(l.weight.data(), static_cast<std::size_t>(l.weight.size()));
      f(l.bias.data(), static_cast<std::size_t>(l.bias.size()));
    });
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    const_cast<Genome*>(this)->for_each_tensor(
        [&](double* p, std::size_t n) { f(static_cast<const double*>(p), n); });
  }

  template <typename F>
  void visit_layers(F&& f) {
    f(attention.gate);
    f(attention.update);
    f(attention_readout);
    f(global_update);
    f(generator.gate);
    f(generator.update);
    f(generator_readout);
    if (task) {
      f(task->input);
      f(task->hidden);
      f(task->state_head);
      f(task->action_head);
    }
  }

  bool operator==(const Genome&) const = default;
};

/// Orthogonal matrix scaled by `gain`: orthonormal rows when rows <= cols, otherwise
/// orthonormal columns. Built from the QR factorization of a Gaussian matrix.
Eigen::MatrixXd orthogonal_init(int rows, int cols, double gain, RngStream& rng);

/// Every weight matrix orthogonal with `gain`; all biases zero.
Genome random_genome(MessageShape shape, bool with_task, double gain, RngStream& rng);

/// Stable 64-bit digest of all parameters (bit patterns), for lineage bookkeeping.
std::uint64_t genome_digest(const Genome& genome);

}  // namespace memesim
