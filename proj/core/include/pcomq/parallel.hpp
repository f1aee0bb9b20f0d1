#pragma once

#include <cstddef>
#include <functional>

namespace pcomq {

// Worker count used by parallel_for. Reads PQ_THREADS (positive integer cap)
// unless an override is active; defaults to hardware concurrency.
std::size_t worker_count();

// Forces worker_count() to `n` for the lifetime of the guard (0 restores the
// environment-driven value). Not thread-safe with respect to other guards.
class ScopedWorkerCount {
 public:
  explicit ScopedWorkerCount(std::size_t n);
  ~ScopedWorkerCount();
  ScopedWorkerCount(const ScopedWorkerCount&) = delete;
  ScopedWorkerCount& operator=(const ScopedWorkerCount&) = delete;

 private:
  std::size_t previous_;
};

// Calls body(k) for every k in [0, count). Indices are split into contiguous
// chunks, one per worker; body must only touch state owned by index k.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace pcomq
