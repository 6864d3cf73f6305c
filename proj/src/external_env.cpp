#include "memesim/external_env.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <thread>

#include <json.hpp>

namespace memesim {

namespace {

using json = nlohmann::json;

Observation parse_obs(const json& reply) {
  if (!reply.contains("obs") || !reply["obs"].is_array() || reply["obs"].size() != kObservationSize) {
    throw EnvironmentFault("reply lacks a 24-element \"obs\" array");
  }
  Observation obs{};
  for (int i = 0; i < kObservationSize; ++i) {
    const json& v = reply["obs"][static_cast<std::size_t>(i)];
    if (!v.is_number()) throw EnvironmentFault("non-numeric observation entry");
    obs[static_cast<std::size_t>(i)] = v.get<double>();
    if (!std::isfinite(obs[static_cast<std::size_t>(i)])) throw EnvironmentFault("non-finite observation");
  }
  return obs;
}

}  // namespace

ExternalEnvironment::ExternalEnvironment(std::string command, double timeout_s)
    : command_(std::move(command)), timeout_s_(timeout_s) {}

ExternalEnvironment::~ExternalEnvironment() { shutdown(); }

void ExternalEnvironment::spawn() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
    throw EnvironmentFault(std::string("socketpair failed: ") + std::strerror(errno));
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    ::close(fds[0]);
    ::close(fds[1]);
    throw EnvironmentFault(std::string("fork failed: ") + std::strerror(errno));
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(fds[1], STDIN_FILENO);
    ::dup2(fds[1], STDOUT_FILENO);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(fds[1]);
  fd_ = fds[0];
  pid_ = pid;
  pending_.clear();
  handshaken_ = false;
}

void ExternalEnvironment::shutdown() {
  if (fd_ >= 0) {
    const std::string bye = "{\"cmd\":\"close\"}\n";
    (void)::send(fd_, bye.data(), bye.size(), MSG_NOSIGNAL | MSG_DONTWAIT);
    ::close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) != 0) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(2));
    }
    // The shell may have forked the command, so signal the whole group.
    ::kill(-pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExternalEnvironment::fail(const std::string& what) {
  const bool first = !handshaken_;
  shutdown();
  throw EnvironmentFault((first ? "external environment handshake failed: " : "external environment: ") +
                         what + " (command: " + command_ + ")");
}

std::string ExternalEnvironment::exchange(const std::string& request) {
  const std::string line = request + "\n";
  std::size_t sent = 0;
  while (sent < line.size()) {
    const ssize_t n = ::send(fd_, line.data() + sent, line.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s_);
  for (;;) {
    if (const auto nl = pending_.find('\n'); nl != std::string::npos) {
      std::string reply = pending_.substr(0, nl);
      pending_.erase(0, nl + 1);
      return reply;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) fail("timed out after " + std::to_string(timeout_s_) + " s");
    pollfd p{fd_, POLLIN, 0};
    const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
    if (ready < 0) {
      if (errno == EINTR) continue;
      fail(std::string("poll failed: ") + std::strerror(errno));
    }
    if (ready == 0) continue;
    char buf[4096];
    const ssize_t n = ::recv(fd_, buf, sizeof(buf), 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail(std::string("read failed: ") + std::strerror(errno));
    }
    if (n == 0) fail("process closed its output");
    pending_.append(buf, static_cast<std::size_t>(n));
  }
}

Observation ExternalEnvironment::reset(std::uint64_t seed) {
  if (fd_ < 0) spawn();
  const std::string reply = exchange(json{{"cmd", "reset"}, {"seed", seed}}.dump());
  try {
    Observation obs = parse_obs(json::parse(reply));
    handshaken_ = true;
    return obs;
  } catch (const std::exception& e) {
    fail(std::string("malformed reset reply: ") + e.what());
  }
}

EnvStep ExternalEnvironment::step(const Actions& actions) {
  if (fd_ < 0) throw EnvironmentFault("external environment: step without an active session");
  const std::string reply =
      exchange(json{{"cmd", "step"}, {"actions", json::array({actions[0], actions[1], actions[2], actions[3]})}}.dump());
  try {
    const json r = json::parse(reply);
    EnvStep out;
    out.obs = parse_obs(r);
    if (!r.contains("metric") || !r["metric"].is_number()) throw EnvironmentFault("missing numeric \"metric\"");
    out.metric = r["metric"].get<double>();
    out.done = r.value("done", false);
    return out;
  } catch (const std::exception& e) {
    fail(std::string("malformed step reply: ") + e.what());
  }
}

}  // namespace memesim
