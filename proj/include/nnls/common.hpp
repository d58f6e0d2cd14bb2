#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <cstdint>
#include <string>
#include <string_view>

namespace nnls {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr cplx kI{0.0, 1.0};

// Error hierarchy. The CLI maps these onto exit codes:
// InputError -> 2, NumericalError -> 3, ValidationError -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on the caller's data was violated (bad parameter, pole,
// evaluation point on a cut, malformed file).
class InputError : public Error {
 public:
  using Error::Error;
};

// The computation itself failed: non-convergence, branch-tracking failure,
// overflow, blow-up, proximity to a singularity.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Number of worker threads; honours NNLS_THREADS, defaults to hardware
// concurrency (at least 1).
std::size_t thread_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once, so
// results written by index are deterministic regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// 64-bit FNV-1a hash, and the same as 16 hex digits.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 14695981039346656037ull);
std::string hex64(std::uint64_t v);

// 2x2 matrix exponential (closed form via the traceless part).
Mat2 expm2(const Mat2& m);

}  // namespace nnls
