#include "pcomq/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace pcomq {
namespace {

std::atomic<std::size_t> g_override{0};

std::size_t env_worker_cap() {
  const char* env = std::getenv("PQ_THREADS");
  if (env == nullptr) return 0;
  std::size_t value = 0;
  const char* end = env + std::strlen(env);
  auto [ptr, ec] = std::from_chars(env, end, value);
  if (ec != std::errc{} || ptr != end) return 0;
  return value;
}

}  // namespace

std::size_t worker_count() {
  if (const std::size_t forced = g_override.load(); forced != 0) return forced;
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const std::size_t cap = env_worker_cap();
  return cap == 0 ? hw : std::min(hw, cap);
}

ScopedWorkerCount::ScopedWorkerCount(std::size_t n) : previous_(g_override.exchange(n)) {}

ScopedWorkerCount::~ScopedWorkerCount() { g_override.store(previous_); }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t workers = std::min(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run_chunk = [&](std::size_t begin, std::size_t end) {
    try {
      for (std::size_t k = begin; k < end; ++k) body(k);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    threads.emplace_back(run_chunk, begin, end);
  }
  run_chunk(0, std::min(count, chunk));
  threads.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace pcomq
