#include "memesim/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace memesim {

namespace {

// Arguments to exp are kept inside +-kExpLimit so no result is subnormal: subnormal
// arithmetic is very slow on x86 and saturated units reach it routinely. The clamp moves
// sigmoid and elu by less than 1e-300.
constexpr double kExpLimit = 700.0;

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return (1.0 + (-x).max(-kExpLimit).min(kExpLimit).exp()).inverse();
}

template <typename Derived>
auto elu(const Eigen::ArrayBase<Derived>& x) {
  return (x > 0.0).select(x, x.max(-kExpLimit).exp() - 1.0);
}

// exp(x) for x <= 0, with results that would fall below exp(-kExpLimit) set to exactly 0.
template <typename Derived>
auto underflow_exp(const Eigen::ArrayBase<Derived>& x) {
  return (x < -kExpLimit).select(0.0, x.max(-kExpLimit).exp());
}

}  // namespace

Eigen::VectorXd gated_step(const GatedCell& cell, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
  const Eigen::ArrayXd g = sigmoid(cell.gate(x).array());
  const Eigen::ArrayXd u = cell.update(x).array();
  return (g * h.array() + (1.0 - g) * u).matrix();
}

AttentionScorer::AttentionScorer(const Genome& genome, const GlobalState& h_g)
    : length_(genome.shape.length), channels_(genome.shape.channels) {
  const Linear& gate = genome.attention.gate;
  const Linear& update = genome.attention.update;
  gate_in_ = gate.weight.leftCols(channels_);
  update_in_ = update.weight.leftCols(channels_);
  gate_rec_ = gate.weight.rightCols<kAttentionHidden>();
  update_rec_ = update.weight.rightCols<kAttentionHidden>();
  gate_const_ = gate.bias + gate.weight.middleCols(channels_, kGlobalHidden) * h_g;
  update_const_ = update.bias + update.weight.middleCols(channels_, kGlobalHidden) * h_g;
  readout_ = genome.attention_readout.weight.row(0).transpose();
  readout_bias_ = genome.attention_readout.bias(0);
}

double AttentionScorer::logit(const MessageValues& message) const {
  Vec h = Vec::Zero();
  for (int pos = 0; pos < length_; ++pos) {
    const double* m = message.data() + pos * channels_;
    Vec pre_gate = gate_const_;
    Vec pre_update = update_const_;
    pre_gate.noalias() += gate_rec_ * h;
    pre_update.noalias() += update_rec_ * h;
    for (int c = 0; c < channels_; ++c) {
      pre_gate += gate_in_.col(c) * m[c];
      pre_update += update_in_.col(c) * m[c];
    }
    const auto g = sigmoid(pre_gate.array()).eval();
    h = (g * h.array() + (1.0 - g) * pre_update.array()).matrix();
  }
  return readout_.dot(h) + readout_bias_;
}

Eigen::RowVectorXd AttentionScorer::logits(
    const Eigen::Matrix<double, kMessageSymbols, Eigen::Dynamic>& messages) const {
  // Messages go through in fixed-width blocks so every product has compile-time shape.
  constexpr int kLanes = 8;
  using Lanes = Eigen::Matrix<double, kAttentionHidden, kLanes>;
  using Inputs = Eigen::Matrix<double, kMessageSymbols, kLanes>;
  const Eigen::Index n = messages.cols();
  Eigen::RowVectorXd out(n);
  Inputs x;
  Lanes h, pre_gate, pre_update;
  for (Eigen::Index first = 0; first < n; first += kLanes) {
    const int lanes = static_cast<int>(std::min<Eigen::Index>(kLanes, n - first));
    x.setZero();
    x.leftCols(lanes) = messages.middleCols(first, lanes);
    h.setZero();
    for (int pos = 0; pos < length_; ++pos) {
      const auto xp = x.middleRows(pos * channels_, channels_);
      pre_gate = gate_const_.replicate<1, kLanes>();
      pre_gate.noalias() += gate_rec_.lazyProduct(h);
      pre_gate.noalias() += gate_in_.lazyProduct(xp);
      pre_update = update_const_.replicate<1, kLanes>();
      pre_update.noalias() += update_rec_.lazyProduct(h);
      pre_update.noalias() += update_in_.lazyProduct(xp);
      const auto g = sigmoid(pre_gate.array()).eval();
      h.array() = g * h.array() + (1.0 - g) * pre_update.array();
    }
    const Eigen::Matrix<double, 1, kLanes> z = readout_.transpose() * h;
    out.segment(first, lanes) = z.head(lanes).array() + readout_bias_;
  }
  return out;
}

std::vector<double> attention_logits(const Genome& genome, const GlobalState& h_g,
                                     std::span<const NoisyMessage> memory) {
  const AttentionScorer scorer(genome, h_g);
  Eigen::Matrix<double, kMessageSymbols, Eigen::Dynamic> batch(kMessageSymbols,
                                                               static_cast<Eigen::Index>(memory.size()));
  for (std::size_t j = 0; j < memory.size(); ++j) {
    batch.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::Matrix<double, kMessageSymbols, 1>>(
        memory[j].values.data());
  }
  const Eigen::RowVectorXd z = scorer.logits(batch);
  return {z.data(), z.data() + z.size()};
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) return {};
  const Eigen::Map<const Eigen::ArrayXd> z(logits.data(), static_cast<Eigen::Index>(logits.size()));
  const Eigen::ArrayXd e = underflow_exp(z - z.maxCoeff());
  const Eigen::ArrayXd p = e / e.sum();
  return {p.data(), p.data() + p.size()};
}

std::vector<double> adaptive_softmax(std::span<const double> logits, double target_entropy,
                                     double rate, int iters) {
  if (logits.size() <= 1) return std::vector<double>(logits.size(), 1.0);
  Eigen::ArrayXd z = Eigen::Map<const Eigen::ArrayXd>(logits.data(),
                                                      static_cast<Eigen::Index>(logits.size()));
  Eigen::ArrayXd shifted(z.size());
  Eigen::ArrayXd e(z.size());
  for (int it = 0; it < iters; ++it) {
    shifted = z - z.maxCoeff();
    e = underflow_exp(shifted);
    const double total = e.sum();
    // H = ln(sum e) - sum p * shifted, with p = e / sum e.
    const double h = std::log(total) - (e * shifted).sum() / total;
    z *= 1.0 + rate * (h - target_entropy) / target_entropy;
  }
  return softmax(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

int sample_index(std::span<const double> probs, RngStream& rng) {
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double g = rng.gumbel();
    if (probs[i] <= 0.0) continue;
    const double v = std::log(probs[i]) + g;
    if (v > best_value) {
      best_value = v;
      best = static_cast<int>(i);
    }
  }
  return best;
}

GlobalState update_global(const Genome& genome, const GlobalState& h_g, const MessageValues& message) {
  const Linear& layer = genome.global_update;
  const Eigen::Map<const Eigen::Matrix<double, kMessageSymbols, 1>> m(message.data());
  GlobalState pre = layer.bias;
  pre.noalias() += layer.weight.leftCols<kMessageSymbols>() * m;
  pre.noalias() += layer.weight.rightCols<kGlobalHidden>() * h_g;
  return (h_g + pre).array().tanh().matrix();
}

MessageValues message_probabilities(const Genome& genome, const GlobalState& h_g,
                                    const MessageValues& attended, bool skip_on, double beta) {
  using Vec = Eigen::Matrix<double, kGeneratorHidden, 1>;
  const int length = genome.shape.length;
  const int channels = genome.shape.channels;
  const Linear& gate = genome.generator.gate;
  const Linear& update = genome.generator.update;
  const Linear& readout = genome.generator_readout;

  const Vec gate_const = gate.bias + gate.weight.middleCols(2 * channels, kGlobalHidden) * h_g;
  const Vec update_const = update.bias + update.weight.middleCols(2 * channels, kGlobalHidden) * h_g;
  const Eigen::Matrix<double, kGeneratorHidden, kGeneratorHidden> gate_rec =
      gate.weight.rightCols<kGeneratorHidden>();
  const Eigen::Matrix<double, kGeneratorHidden, kGeneratorHidden> update_rec =
      update.weight.rightCols<kGeneratorHidden>();

  MessageValues probs{};
  Vec h = Vec::Zero();
  Eigen::VectorXd logits(channels);
  for (int i = 0; i < length; ++i) {
    const double* fwd = attended.data() + i * channels;
    const double* rev = attended.data() + (length - 1 - i) * channels;
    Vec pre_gate = gate_const;
    Vec pre_update = update_const;
    pre_gate.noalias() += gate_rec * h;
    pre_update.noalias() += update_rec * h;
    for (int c = 0; c < channels; ++c) {
      pre_gate += gate.weight.col(c) * fwd[c];
      pre_update += update.weight.col(c) * fwd[c];
      pre_gate += gate.weight.col(channels + c) * rev[c];
      pre_update += update.weight.col(channels + c) * rev[c];
    }
    const auto g = sigmoid(pre_gate.array()).eval();
    h = (g * h.array() + (1.0 - g) * pre_update.array()).matrix();

    logits.noalias() = readout.weight * h;
    logits += readout.bias;
    for (int c = 0; c < channels; ++c) {
      const double drive = (skip_on ? fwd[c] : 0.0) + logits(c);
      probs[i * channels + c] = 1.0 / (1.0 + std::exp(std::clamp(-beta * drive, -kExpLimit, kExpLimit)));
    }
  }
  return probs;
}

Message generate_message(const Genome& genome, const GlobalState& h_g, const MessageValues& attended,
                         bool skip_on, double beta, RngStream& rng) {
  const MessageValues probs = message_probabilities(genome, h_g, attended, skip_on, beta);
  Message out(genome.shape);
  for (int k = 0; k < genome.shape.size(); ++k) out[k] = rng.uniform01() < probs[k] ? 1 : -1;
  return out;
}

int sample_categorical(std::span<const double> probs, double u) {
  double cumulative = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    cumulative += probs[i];
    if (u < cumulative) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

TaskPolicy::TaskPolicy(const Genome& genome, const GlobalState& h_g) {
  if (!genome.task) throw std::invalid_argument("genome has no task layers");
  const TaskLayers& t = *genome.task;
  input_const_ = t.input.bias + t.input.weight.leftCols<kGlobalHidden>() * h_g;
  input_w_ = t.input.weight.rightCols<kRecurrentInputs>();
  hidden_w_ = t.hidden.weight;
  hidden_b_ = t.hidden.bias;
  state_w_ = t.state_head.weight;
  state_b_ = t.state_head.bias;
  action_w_ = t.action_head.weight;
  action_b_ = t.action_head.bias;
}

TaskStep TaskPolicy::step(const TaskState& h_t, const Observation& obs, RngStream& rng) const {
  Eigen::Matrix<double, kRecurrentInputs, 1> x;
  x.head<kTaskHidden>() = h_t;
  x.tail<kObservationSize>() = Eigen::Map<const Eigen::Matrix<double, kObservationSize, 1>>(obs.data());

  Hidden pre = input_const_;
  pre.noalias() += input_w_ * x;
  const Hidden z1 = elu(pre.array()).matrix();
  pre = hidden_b_;
  pre.noalias() += hidden_w_ * z1;
  const Hidden z2 = elu(pre.array()).matrix();

  TaskStep out;
  Hidden state_pre = state_b_;
  state_pre.noalias() += state_w_ * z2;
  out.state = (h_t + state_pre).array().tanh().matrix();

  Eigen::Matrix<double, kActionChannels * kActionBins, 1> logits = action_b_;
  logits.noalias() += action_w_ * z2;
  for (int ch = 0; ch < kActionChannels; ++ch) {
    const auto seg = logits.segment<kActionBins>(ch * kActionBins).array();
    const Eigen::Array<double, kActionBins, 1> e = underflow_exp(seg - seg.maxCoeff());
    const Eigen::Array<double, kActionBins, 1> p = e / e.sum();
    out.actions[ch] = sample_categorical(std::span<const double>(p.data(), kActionBins), rng.uniform01());
  }
  return out;
}

TaskStep task_policy_step(const Genome& genome, const GlobalState& h_g, const TaskState& h_t,
                          const Observation& obs, RngStream& rng) {
  return TaskPolicy(genome, h_g).step(h_t, obs, rng);
}

std::size_t mutate_in_place(Genome& genome, double fraction, double decay, double std_dev,
                            RngStream& rng) {
  if (fraction <= 0.0) return 0;
  const std::size_t total = genome.parameter_count();
  // Gaps between selected parameters are geometric, which is the same law as an
  // independent Bernoulli(fraction) draw per parameter.
  const bool every = fraction >= 1.0;
  const double log_keep = every ? 0.0 : std::log1p(-fraction);
  auto gap = [&]() -> std::size_t {
    if (every) return 0;
    const double g = std::floor(std::log(rng.uniform_open()) / log_keep);
    return g >= static_cast<double>(total) ? total : static_cast<std::size_t>(g);
  };

  std::size_t next = gap();
  std::size_t offset = 0;
  std::size_t mutated = 0;
  genome.for_each_tensor([&](double* p, std::size_t n) {
    while (next < offset + n) {
      double& w = p[next - offset];
      w = decay * w + std_dev * rng.gaussian();
      ++mutated;
      const std::size_t step = gap();
      next = (total - next - 1 < step) ? total : next + 1 + step;
    }
    offset += n;
  });
  return mutated;
}

Genome mutate(const Genome& genome, double fraction, double decay, double std_dev, RngStream& rng) {
  Genome out = genome;
  mutate_in_place(out, fraction, decay, std_dev, rng);
  return out;
}

}  // namespace memesim
