#pragma once

#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace memesim {

/// Fixed worker pool running index-parallel loops. Work items must write only to
/// their own slots; results never depend on the number of workers.
class WorkerPool {
 public:
  explicit WorkerPool(int workers);
  ~WorkerPool();

  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  int size() const { return static_cast<int>(threads_.size()) + 1; }

  /// Calls body(i, worker) for i in [0, n). `worker` is in [0, size()).
  /// The first exception thrown by any item is rethrown on the calling thread.
  void parallel_for(std::size_t n, const std::function<void(std::size_t, int)>& body);

  /// Worker count from MEMESIM_WORKERS, falling back to hardware concurrency.
  static int default_workers();

 private:
  void worker_loop(int worker);
  void run_chunks(int worker);

  std::vector<std::thread> threads_;
  std::mutex mutex_;
  std::condition_variable wake_, done_;
  const std::function<void(std::size_t, int)>* body_ = nullptr;
  std::size_t n_ = 0;
  std::size_t next_ = 0;
  std::size_t chunk_ = 1;
  int active_ = 0;
  std::size_t generation_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
};

}  // namespace memesim
