#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "memesim/genome.hpp"
#include "memesim/rng.hpp"
#include "memesim/types.hpp"

namespace memesim {

/// h' = G*h + (1-G)*U with G = sigmoid(gate(x)), U = update(x). `x` already ends with `h`.
Eigen::VectorXd gated_step(const GatedCell& cell, const Eigen::VectorXd& x, const Eigen::VectorXd& h);

/// Saliency of buffered messages for one agent state. The h_g contribution is folded
/// into the layer biases once so scoring a full buffer only touches message inputs.
class AttentionScorer {
 public:
  AttentionScorer(const Genome& genome, const GlobalState& h_g);

  /// Runs the gated reader over the message's positions from h_a = 0 and projects to a scalar.
  double logit(const MessageValues& message) const;

  /// Same recurrence for many messages at once; column j of `messages` is one message.
  Eigen::RowVectorXd logits(const Eigen::Matrix<double, kMessageSymbols, Eigen::Dynamic>& messages) const;

 private:
  using Vec = Eigen::Matrix<double, kAttentionHidden, 1>;
  using Recurrent = Eigen::Matrix<double, kAttentionHidden, kAttentionHidden>;

  int length_;
  int channels_;
  Eigen::Matrix<double, kAttentionHidden, Eigen::Dynamic> gate_in_, update_in_;
  Recurrent gate_rec_, update_rec_;
  Vec gate_const_, update_const_;
  Vec readout_;
  double readout_bias_;
};

/// One logit per message, in the given order. Empty input yields an empty vector.
std::vector<double> attention_logits(const Genome& genome, const GlobalState& h_g,
                                     std::span<const NoisyMessage> memory);

/// Shannon entropy in nats.
double entropy(std::span<const double> probs);

std::vector<double> softmax(std::span<const double> logits);

/// Rescales logits by 1 + rate*(H - H*)/H* for `iters` rounds, then returns the softmax.
std::vector<double> adaptive_softmax(std::span<const double> logits, double target_entropy,
                                     double rate, int iters);

/// Gumbel-max draw: argmax_i (ln p_i + g_i).
int sample_index(std::span<const double> probs, RngStream& rng);

/// tanh(h_g + L_H([m, h_g])).
GlobalState update_global(const Genome& genome, const GlobalState& h_g, const MessageValues& message);

/// Writes the output message position by position. With `skip_on`, each symbol's
/// probability of +1 is sigmoid(beta*(attended + logit)); otherwise sigmoid(beta*logit).
Message generate_message(const Genome& genome, const GlobalState& h_g, const MessageValues& attended,
                         bool skip_on, double beta, RngStream& rng);

/// Per-symbol probability of +1 that generate_message samples from, row-major.
MessageValues message_probabilities(const Genome& genome, const GlobalState& h_g,
                                    const MessageValues& attended, bool skip_on, double beta);

struct TaskStep {
  Actions actions{};
  TaskState state = TaskState::Zero();
};

/// Task network with h_g held fixed, as during a rollout.
class TaskPolicy {
 public:
  TaskPolicy(const Genome& genome, const GlobalState& h_g);

  TaskStep step(const TaskState& h_t, const Observation& obs, RngStream& rng) const;

 private:
  static constexpr int kRecurrentInputs = kTaskHidden + kObservationSize;
  using Hidden = Eigen::Matrix<double, kTaskHidden, 1>;

  Hidden input_const_;
  Eigen::Matrix<double, kTaskHidden, kRecurrentInputs> input_w_;
  Eigen::Matrix<double, kTaskHidden, kTaskHidden> hidden_w_, state_w_;
  Hidden hidden_b_, state_b_;
  Eigen::Matrix<double, kActionChannels * kActionBins, kTaskHidden> action_w_;
  Eigen::Matrix<double, kActionChannels * kActionBins, 1> action_b_;
};

/// One task-network step; each channel's bin is drawn from its 20-way softmax.
TaskStep task_policy_step(const Genome& genome, const GlobalState& h_g, const TaskState& h_t,
                          const Observation& obs, RngStream& rng);

/// Inverse-CDF categorical draw given u in [0, 1).
int sample_categorical(std::span<const double> probs, double u);

/// Each parameter independently, with probability `fraction`: w <- decay*w + N(0, std^2).
/// Returns the number of parameters touched.
std::size_t mutate_in_place(Genome& genome, double fraction, double decay, double std_dev,
                            RngStream& rng);

Genome mutate(const Genome& genome, double fraction, double decay, double std_dev, RngStream& rng);

}  // namespace memesim
