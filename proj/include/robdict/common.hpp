#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace robdict {

/// Unusable configuration or input data. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not complete (singular system, rank
/// deficiency, failed factorization). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic engine for a (seed, stream) pair. Distinct streams are
/// statistically independent, so callers may evaluate them in parallel
/// without changing results.
inline std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

/// splitmix64-style mixing of a seed with a salt, for deriving the seeds of
/// nested procedures without correlating their streams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Largest integer r with r^3 <= x, immune to cbrt rounding.
inline std::size_t floor_cbrt(std::size_t x) {
  auto r = static_cast<std::size_t>(std::cbrt(static_cast<double>(x)));
  while (r > 0 && r * r * r > x) --r;
  while ((r + 1) * (r + 1) * (r + 1) <= x) ++r;
  return r;
}

/// Process-wide worker count for the few loops that support data-parallel
/// evaluation. Results never depend on it; 1 means fully sequential.
inline int& worker_count() {
  static int n = 1;
  return n;
}

/// Runs f(i) for i in [begin, end). Each index writes only its own
/// preallocated slot, so the schedule cannot influence the outcome.
template <typename F>
inline void parallel_for(std::ptrdiff_t begin, std::ptrdiff_t end, F&& f, int threads = worker_count()) {
  if (end <= begin) return;
  const auto total = end - begin;
  if (threads <= 1 || total == 1) {
    for (std::ptrdiff_t i = begin; i < end; ++i) f(i);
    return;
  }
  const int used = static_cast<int>(std::min<std::ptrdiff_t>(threads, total));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(used));
  const std::ptrdiff_t chunk = (total + used - 1) / used;
  for (int t = 0; t < used; ++t) {
    const std::ptrdiff_t lo = begin + t * chunk;
    const std::ptrdiff_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &f] {
      for (std::ptrdiff_t i = lo; i < hi; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace robdict
