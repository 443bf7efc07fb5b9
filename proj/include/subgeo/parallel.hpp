#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <omp.h>

namespace subgeo {

// Per-index maps. Results land in an indexed buffer, so any later reduction
// sees the same values in the same order whatever the worker count.

template <class F>
auto map_paths_serial(std::size_t n, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
  return out;
}

template <class F>
auto map_paths_omp(std::size_t n, int jobs, F&& f) {
  using R = decltype(f(std::size_t{0}));
  if (jobs <= 1) return map_paths_serial(n, f);
  std::vector<R> out(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = f(static_cast<std::size_t>(i));
  return out;
}

template <class F>
auto map_paths(std::size_t n, int jobs, F&& f) {
  return map_paths_omp(n, jobs, std::forward<F>(f));
}

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double std_error = 0.0;
};

/// Two-pass mean and variance in index order.
inline SampleSummary summarize(const std::vector<double>& v) {
  SampleSummary s;
  s.n = v.size();
  if (s.n == 0) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.variance = ss / static_cast<double>(s.n - 1);
    s.std_error = std::sqrt(s.variance / static_cast<double>(s.n));
  }
  return s;
}

}  // namespace subgeo
