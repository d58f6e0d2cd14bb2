#pragma once

// Reference values computed independently of the library.

#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

// ln Gamma by the Stirling series after shifting Re z above 20.
inline cplx log_gamma(cplx z) {
  cplx shift = 0.0;
  while (z.real() < 20.0) {
    shift += std::log(z);
    z += 1.0;
  }
  const cplx z2 = z * z;
  cplx s = (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi);
  s += 1.0 / (12.0 * z) - 1.0 / (360.0 * z * z2) + 1.0 / (1260.0 * z * z2 * z2) - 1.0 / (1680.0 * z * z2 * z2 * z2);
  return s - shift;
}

inline cplx gamma(cplx z) {
  if (z.real() < 0.5) return pi / (std::sin(pi * z) * gamma(1.0 - z));
  return std::exp(log_gamma(z));
}

// Li2(x) from the power series (inversion for x < -1), with pairwise
// averaging of partial sums where convergence is alternating and slow.
inline double dilog_series(double x) {
  if (x < -1.0) {
    const double l = std::log(-x);
    return -pi * pi / 6.0 - 0.5 * l * l - dilog_series(1.0 / x);
  }
  double sum = 0.0, prev = 0.0, pw = 1.0;
  const int n_max = 200000;
  for (int n = 1; n <= n_max; ++n) {
    pw *= x;
    prev = sum;
    sum += pw / (static_cast<double>(n) * n);
  }
  return x < 0.0 ? 0.5 * (sum + prev) : sum;
}

}  // namespace oracle
