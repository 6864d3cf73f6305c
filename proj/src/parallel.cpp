#include "memesim/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <utility>

namespace memesim {

WorkerPool::WorkerPool(int workers) {
  const int extra = std::max(1, workers) - 1;
  threads_.reserve(extra);
  for (int w = 1; w <= extra; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stop_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

int WorkerPool::default_workers() {
  if (const char* env = std::getenv("MEMESIM_WORKERS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void WorkerPool::run_chunks(int worker) {
  for (;;) {
    std::size_t begin;
    {
      std::lock_guard lock(mutex_);
      if (next_ >= n_) return;
      begin = next_;
      next_ = std::min(n_, next_ + chunk_);
    }
    const std::size_t end = std::min(n_, begin + chunk_);
    try {
      for (std::size_t i = begin; i < end; ++i) (*body_)(i, worker);
    } catch (...) {
      std::lock_guard lock(mutex_);
      if (!error_) error_ = std::current_exception();
      next_ = n_;
      return;
    }
  }
}

void WorkerPool::worker_loop(int worker) {
  std::size_t seen = 0;
  for (;;) {
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [&] { return stop_ || generation_ != seen; });
      if (stop_) return;
      seen = generation_;
    }
    run_chunks(worker);
    {
      std::lock_guard lock(mutex_);
      if (--active_ == 0) done_.notify_all();
    }
  }
}

void WorkerPool::parallel_for(std::size_t n, const std::function<void(std::size_t, int)>& body) {
  if (n == 0) return;
  if (threads_.empty()) {
    for (std::size_t i = 0; i < n; ++i) body(i, 0);
    return;
  }
  {
    std::lock_guard lock(mutex_);
    body_ = &body;
    n_ = n;
    next_ = 0;
    chunk_ = std::max<std::size_t>(1, n / (static_cast<std::size_t>(size()) * 8));
    active_ = static_cast<int>(threads_.size());
    error_ = nullptr;
    ++generation_;
  }
  wake_.notify_all();
  run_chunks(0);
  std::unique_lock lock(mutex_);
  done_.wait(lock, [&] { return active_ == 0; });
  body_ = nullptr;
  if (error_) std::rethrow_exception(std::exchange(error_, nullptr));
}

}  // namespace memesim
