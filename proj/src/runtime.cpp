#include "dopamine/runtime.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace dopamine {

namespace {

int initial_thread_count() {
  const char* env = std::getenv("DESPECKLE_THREADS");
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  return n >= 1 ? n : 1;
}

std::atomic<int>& thread_slot() {
  static std::atomic<int> n{initial_thread_count()};
  return n;
}

}  // namespace

int thread_count() { return thread_slot().load(std::memory_order_relaxed); }

void set_thread_count(int n) { thread_slot().store(n >= 1 ? n : 1, std::memory_order_relaxed); }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    fn(0, n);
    return;
  }
  const int chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) {
    const int b = w * chunk;
    const int e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(n, chunk));
  for (std::thread& t : pool) t.join();
}

}  // namespace dopamine
