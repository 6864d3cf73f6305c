#pragma once

#include <array>
#include <cstdint>
#include <optional>

namespace memesim {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// Tags separating the independent random streams used within one (agent, step).
enum class Purpose : std::uint8_t {
  kInit = 1,
  kDeliveryNoise = 2,
  kAttention = 3,
  kGeneration = 4,
  kPromotion = 5,
  kFitnessGate = 6,
  kReplicationTarget = 7,
  kMutation = 8,
  kTaskAction = 9,
  kTaskReset = 10,
  kTest = 255,
};

// Step index reserved for draws made before the first step (initialization).
inline constexpr std::uint32_t kSetupStep = 0xFFFFFFFFu;

/// Counter-based random stream addressed by (root seed, agent, step, purpose, sub-stream).
/// The value sequence depends only on that address, never on evaluation order.
class RngStream {
 public:
  RngStream(std::uint64_t root_seed, std::uint32_t agent, std::uint32_t step, Purpose purpose,
            std::uint32_t sub = 0);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform on the open interval (0, 1).
  double uniform_open();
  double gaussian();
  /// Standard Gumbel(0, 1): -ln(-ln u).
  double gumbel();
  /// Uniform integer in [0, n).
  int uniform_int(int n);

 private:
  void refill();

  PhiloxKey key_{};
  PhiloxCounter counter_{};
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  std::optional<double> spare_gaussian_;
};

}  // namespace memesim
