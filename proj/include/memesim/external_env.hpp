#pragma once

#include <string>

#include "memesim/task.hpp"

namespace memesim {

/// Environment served by a child process over line-delimited JSON on its stdin/stdout.
///
///   -> {"cmd":"reset","seed":<u64>}        <- {"obs":[24 numbers]}
///   -> {"cmd":"step","actions":[4 ints]}   <- {"obs":[24 numbers],"metric":<number>,"done":<bool>}
///   -> {"cmd":"close"}
///
/// The child is started lazily on the first reset; a failure on that first exchange is
/// reported as a handshake failure. Timeouts, malformed replies and child exit all raise
/// EnvironmentFault, after which the session is dead and the next reset starts a new child.
class ExternalEnvironment final : public Environment {
 public:
  ExternalEnvironment(std::string command, double timeout_s = 10.0);
  ~ExternalEnvironment() override;

  ExternalEnvironment(const ExternalEnvironment&) = delete;
  ExternalEnvironment& operator=(const ExternalEnvironment&) = delete;

  Observation reset(std::uint64_t seed) override;
  EnvStep step(const Actions& actions) override;

  bool running() const { return pid_ > 0; }

 private:
  void spawn();
  void shutdown();
  [[noreturn]] void fail(const std::string& what);
  std::string exchange(const std::string& request);

  std::string command_;
  double timeout_s_;
  int pid_ = -1;
  int fd_ = -1;
  std::string pending_;
  bool handshaken_ = false;
};

}  // namespace memesim
