#pragma once

#include <functional>

namespace dopamine {

/// Worker-thread cap. Initialized once from DESPECKLE_THREADS (default 1).
int thread_count();
void set_thread_count(int n);

/// Splits [0, n) into contiguous chunks and runs fn(begin, end) for each,
/// using at most thread_count() threads. Chunk boundaries depend only on
/// n and the thread count, and chunks never overlap, so any computation
/// whose outputs are disjoint per index stays bitwise deterministic.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace dopamine
