#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace memesim {

// Every supported message shape carries exactly this many symbols.
inline constexpr int kMessageSymbols = 30;

inline constexpr int kAttentionHidden = 10;
inline constexpr int kGlobalHidden = 16;
inline constexpr int kGeneratorHidden = 10;
inline constexpr int kTaskHidden = 16;
inline constexpr int kObservationSize = 24;
inline constexpr int kActionChannels = 4;
inline constexpr int kActionBins = 20;

using GlobalState = Eigen::Matrix<double, kGlobalHidden, 1>;
using TaskState = Eigen::Matrix<double, kTaskHidden, 1>;
using Observation = std::array<double, kObservationSize>;
using Actions = std::array<int, kActionChannels>;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GridDims {
  int rows = 0;
  int cols = 0;

  int size() const { return rows * cols; }
  bool operator==(const GridDims&) const = default;
};

struct Site {
  int row = 0;
  int col = 0;

  auto operator<=>(const Site&) const = default;
};

inline int site_index(GridDims dims, Site s) { return s.row * dims.cols + s.col; }
inline Site site_at(GridDims dims, int index) { return {index / dims.cols, index % dims.cols}; }

struct MessageShape {
  int length = 10;
  int channels = 3;

  int size() const { return length * channels; }
  bool operator==(const MessageShape&) const = default;
};

/// A discrete broadcast: `length` positions by `channels` symbols, each -1 or +1,
/// stored row-major (position-major).
class Message {
 public:
  Message() { symbols_.fill(-1); }
  explicit Message(MessageShape shape) : shape_(shape) { symbols_.fill(-1); }

  MessageShape shape() const { return shape_; }
  std::int8_t at(int pos, int channel) const { return symbols_[pos * shape_.channels + channel]; }
  void set(int pos, int channel, std::int8_t v) { symbols_[pos * shape_.channels + channel] = v; }
  std::int8_t operator[](int flat) const { return symbols_[flat]; }
  std::int8_t& operator[](int flat) { return symbols_[flat]; }
  const std::array<std::int8_t, kMessageSymbols>& symbols() const { return symbols_; }

  bool operator==(const Message&) const = default;

 private:
  MessageShape shape_{};
  std::array<std::int8_t, kMessageSymbols> symbols_{};
};

using MessageValues = std::array<double, kMessageSymbols>;

/// A message after perception noise, as stored in a receiver's memory.
struct NoisyMessage {
  MessageValues values{};
  Site source{};
};

}  // namespace memesim
