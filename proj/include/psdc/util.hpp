#pragma once

#include <cmath>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace psdc {

inline int worker_count() {
  unsigned hw = std::thread::hardware_concurrency();
  int n = hw ? static_cast<int>(hw) : 1;
  if (const char* env = std::getenv("PSDC_THREADS")) {
    int cap = std::atoi(env);
    if (cap >= 1 && cap < n) n = cap;
  }
  return n;
}

// Evaluates fn(0..n-1) into a vector. Work is sharded across workers but each
// slot depends only on its index, so results do not depend on the worker count.
inline std::vector<double> parallel_map(std::size_t n, const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(n);
  int workers = worker_count();
  if (workers <= 1 || n < 64) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  std::size_t n = xs.size();
  if (n == 0) return r;
  long double sum = 0.0L;
  for (double x : xs) sum += x;
  r.mean = static_cast<double>(sum / n);
  if (n < 2) return r;
  long double ss = 0.0L;
  for (double x : xs) {
    long double d = x - r.mean;
    ss += d * d;
  }
  r.stderr_ = static_cast<double>(std::sqrt(ss / (n - 1) / n));
  return r;
}

}  // namespace psdc
