#pragma once

// Shared runtime helpers: deterministic counter-based RNG streams, small
// statistics utilities, a static-partition parallel loop and stderr logging
// controlled by the GPSOBOL_LOG environment variable.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace gpsobol {

// Raised for malformed configuration or input files; callers that surface
// errors to a shell map this class to a distinct exit status.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConfidenceInterval {
  double level = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a base seed and a stream id, so
// that each unit of work owns its own generator regardless of scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (0x6a09e667f3bcc909ULL + stream));
}

// splitmix64 sequence generator.  Deterministic across platforms; all
// variates are derived from the raw 64-bit output with fixed arithmetic.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64(seed)) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform on [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Integer uniform on [0, n) by rejection; n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  // Standard normal via the Marsaglia polar method; the spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Fisher-Yates shuffle with this stream's variates (stable across stdlibs).
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i)
      std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline double mean_of(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("mean_of: empty vector");
  return v.mean();
}

// Unbiased sample variance (divisor n - 1).
inline double variance_of(const Eigen::VectorXd& v) {
  if (v.size() < 2) throw std::invalid_argument("variance_of: need at least two values");
  const double m = v.mean();
  return (v.array() - m).square().sum() / static_cast<double>(v.size() - 1);
}

inline double stddev_of(const Eigen::VectorXd& v) { return std::sqrt(variance_of(v)); }

// Linear-interpolation quantile of a sorted vector (the common "type 7" rule).
inline double quantile_sorted(const Eigen::VectorXd& sorted, double q) {
  if (sorted.size() == 0) throw std::invalid_argument("quantile_sorted: empty vector");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile_sorted: q outside [0, 1]");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<Eigen::Index>(std::floor(pos));
  if (lo + 1 >= sorted.size()) return sorted(sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted(lo) + frac * (sorted(lo + 1) - sorted(lo));
}

// Formats a double with 17 significant digits (round-trip exact).
inline std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

enum class LogLevel { debug = 0, info = 1, warn = 2, off = 3 };

inline LogLevel log_threshold() {
  static const LogLevel level = [] {
    const char* env = std::getenv("GPSOBOL_LOG");
    if (env == nullptr) return LogLevel::warn;
    const std::string s(env);
    if (s == "debug") return LogLevel::debug;
    if (s == "info") return LogLevel::info;
    if (s == "warn") return LogLevel::warn;
    if (s == "off" || s == "none") return LogLevel::off;
    return LogLevel::warn;
  }();
  return level;
}

inline void log_message(LogLevel level, const std::string& msg) {
  if (level < log_threshold()) return;
  const char* tag = level == LogLevel::debug ? "debug" : level == LogLevel::info ? "info" : "warn";
  std::fprintf(stderr, "[gpsobol] %s: %s\n", tag, msg.c_str());
}

inline void log_debug(const std::string& msg) { log_message(LogLevel::debug, msg); }
inline void log_info(const std::string& msg) { log_message(LogLevel::info, msg); }
inline void log_warn(const std::string& msg) { log_message(LogLevel::warn, msg); }

// Runs body(i) for i in [0, count) on up to `threads` workers with a static
// partition.  Work item i always owns the same index regardless of the
// thread count, so any per-index seeding stays deterministic.  The first
// exception thrown by a worker is rethrown on the caller's thread.
inline void parallel_for(std::int64_t count, int threads,
                         const std::function<void(std::int64_t)>& body) {
  if (count <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads <= 0) threads = 1;
  threads = static_cast<int>(std::min<std::int64_t>(threads, count));
  if (threads == 1) {
    for (std::int64_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::int64_t i = t; i < count; i += threads) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace gpsobol
