#include "vp/parallel.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>
#include <vector>

namespace vp::par {
namespace {

int env_limit() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* s = std::getenv("VP_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(s, &end, 10);
    if (end != s && v >= 1 && v < 1024) return static_cast<int>(v) < hw ? static_cast<int>(v) : hw;
  }
  return hw;
}

int g_override = 0;

thread_local bool in_parallel = false;

// One-job-at-a-time pool. Workers pull chunk indices from an atomic counter;
// each chunk maps to a contiguous index range so any pull order yields the
// same per-index work.
struct Pool {
  std::mutex mu;
  std::condition_variable cv_work, cv_done;
  std::vector<std::thread> threads;
  const std::function<void(std::size_t, std::size_t)>* job = nullptr;
  std::size_t total = 0, chunk = 1;
  std::atomic<std::size_t> next{0};
  std::atomic<int> active{0};
  std::uint64_t generation = 0;
  bool stop = false;

  ~Pool() {
    {
      std::lock_guard<std::mutex> lk(mu);
      stop = true;
    }
    cv_work.notify_all();
    for (auto& t : threads) t.join();
  }

  void worker() {
    in_parallel = true;  // nested parallel_for from a job runs serially
    std::uint64_t seen = 0;
    for (;;) {
      {
        std::unique_lock<std::mutex> lk(mu);
        cv_work.wait(lk, [&] { return stop || generation != seen; });
        if (stop) return;
        seen = generation;
      }
      drain();
      if (active.fetch_sub(1) == 1) cv_done.notify_all();
    }
  }

  void drain() {
    for (;;) {
      std::size_t begin = next.fetch_add(chunk);
      if (begin >= total) return;
      std::size_t end = begin + chunk;
      if (end > total) end = total;
      (*job)(begin, end);
    }
  }

  void ensure_threads(int n) {
    while (static_cast<int>(threads.size()) < n)
      threads.emplace_back([this] { worker(); });
  }

  void run(std::size_t n, std::size_t chunk_size,
           const std::function<void(std::size_t, std::size_t)>& fn, int workers) {
    std::unique_lock<std::mutex> lk(mu);
    job = &fn;
    total = n;
    chunk = chunk_size;
    next.store(0);
    int helpers = workers - 1;
    ensure_threads(helpers);
    active.store(helpers);
    ++generation;
    lk.unlock();
    cv_work.notify_all();
    drain();
    lk.lock();
    cv_done.wait(lk, [&] { return active.load() == 0; });
    job = nullptr;
  }
};

Pool& pool() {
  static Pool p;
  return p;
}

void dispatch(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  int workers = worker_limit();
  if (workers <= 1 || n == 1 || in_parallel) {
    fn(0, n);
    return;
  }
  // Chunks several times smaller than an even split keep workers busy when
  // slice costs vary; chunk boundaries do not affect per-index results.
  std::size_t chunk = n / (static_cast<std::size_t>(workers) * 4);
  if (chunk == 0) chunk = 1;
  in_parallel = true;
  pool().run(n, chunk, fn, workers);
  in_parallel = false;
}

}  // namespace

int worker_limit() { return g_override >= 1 ? g_override : env_limit(); }

void set_worker_limit(int n) { g_override = n < 0 ? 0 : n; }

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  dispatch(n, [&fn](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) fn(i);
  });
}

void parallel_for_ranges(std::size_t n,
                         const std::function<void(std::size_t, std::size_t)>& fn) {
  dispatch(n, fn);
}

}  // namespace vp::par
