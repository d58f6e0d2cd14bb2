#include "nnls/common.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nnls {

std::size_t thread_count() {
  if (const char* env = std::getenv("NNLS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      // strided assignment: worker w owns indices w, w+workers, ...
      for (std::size_t i = w; i < n; i += workers) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
  return out;
}

Mat2 expm2(const Mat2& m) {
  const cplx mu = 0.5 * (m(0, 0) + m(1, 1));
  Mat2 m0 = m;
  m0(0, 0) -= mu;
  m0(1, 1) -= mu;
  // m0^2 = s^2 I for a traceless 2x2 matrix
  const cplx s2 = m0(0, 0) * m0(0, 0) + m0(0, 1) * m0(1, 0);
  const cplx s = std::sqrt(s2);
  cplx c, sh;
  if (std::abs(s) < 1e-4) {
    c = 1.0 + s2 / 2.0 + s2 * s2 / 24.0 + s2 * s2 * s2 / 720.0;
    sh = 1.0 + s2 / 6.0 + s2 * s2 / 120.0 + s2 * s2 * s2 / 5040.0;
  } else {
    c = std::cosh(s);
    sh = std::sinh(s) / s;
  }
  Mat2 r = sh * m0;
  r(0, 0) += c;
  r(1, 1) += c;
  return std::exp(mu) * r;
}

}  // namespace nnls
