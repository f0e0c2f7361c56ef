#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace oscore {

using cplx = std::complex<double>;

// Exit-code categories used by the CLI; library code throws these.
enum class ErrorKind { Usage = 1, Io = 2, Numerical = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_usage(const std::string& msg) {
  throw Error(ErrorKind::Usage, msg);
}
[[noreturn]] inline void fail_io(const std::string& msg) {
  throw Error(ErrorKind::Io, msg);
}
[[noreturn]] inline void fail_numerical(const std::string& msg) {
  throw Error(ErrorKind::Numerical, msg);
}

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;

// Nyquist frequency in cycles/px; all radial wavelet profiles are
// parameterized against this.
constexpr double kNyquist = 0.5;

inline int thread_count() {
  if (const char* env = std::getenv("OSCORE_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// Runs fn(i) for i in [0, n). Work is split in contiguous blocks; any
// reduction over results must be done by the caller in index order so the
// outcome does not depend on the number of threads.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  int nt = thread_count();
  if (nt <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t threads = std::min<std::size_t>(nt, n);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline double wrap_to_pi(double a) {
  a = std::fmod(a + kPi, kTwoPi);
  if (a < 0) a += kTwoPi;
  return a - kPi;
}

}  // namespace oscore
