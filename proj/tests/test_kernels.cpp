#include "nnls/kernels.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nnls;

namespace {

Sampler from_fn(cplx (*f)(double)) {
  return [f](std::span<const double> xs) {
    std::vector<cplx> v;
    v.reserve(xs.size());
    for (double x : xs) v.push_back(f(x));
    return v;
  };
}

}  // namespace

TEST_CASE("gamma matches the Stirling oracle off the real axis") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 100; ++i) {
    const cplx z(u(rng), u(rng));
    if (std::abs(z.imag()) < 0.05) continue;
    const cplx ref = oracle::gamma(z);
    CHECK(std::abs(complex_gamma(z) - ref) / std::abs(ref) < 1e-11);
  }
}

TEST_CASE("gamma modulus on the imaginary axis") {
  for (double y : {0.1, 0.5, 1.0, 2.5, 6.0}) {
    const double ref = oracle::pi / (y * std::sinh(oracle::pi * y));
    CHECK(std::abs(std::norm(complex_gamma(cplx(0.0, y))) - ref) / ref < 1e-12);
  }
}

TEST_CASE("gamma poles are rejected") {
  CHECK_THROWS_AS(complex_gamma(0.0), InputError);
  CHECK_THROWS_AS(complex_gamma(-3.0), InputError);
}

TEST_CASE("dilog against the power series") {
  for (double x : {-1.0, -0.7, -0.3, 0.0, 0.2, 0.5, 0.9})
    CHECK(std::abs(dilog(x) - oracle::dilog_series(x)) < 1e-12);
  CHECK(std::abs(dilog(-1.0) + oracle::pi * oracle::pi / 12.0) < 1e-14);
  CHECK(std::abs(dilog(1.0) - oracle::pi * oracle::pi / 6.0) < 1e-14);
}

TEST_CASE("principal value of 1/(x^2+1) at 1") {
  const auto f = from_fn([](double x) { return cplx(1.0 / (x * x + 1.0)); });
  const auto r = pv_cauchy(f, 1.0, QuadratureSpec{});
  CHECK(std::abs(r.value + oracle::pi / 2.0) < 1e-9);
  CHECK(r.converged);
}

TEST_CASE("Cauchy integral off the axis matches residues") {
  const auto f = from_fn([](double x) { return cplx(1.0 / (x * x + 1.0)); });
  const cplx k(0.3, 0.7);
  // residues at i and at k
  const cplx ref = 2.0 * kI * oracle::pi * (1.0 / (2.0 * kI * (kI - k)) + 1.0 / (k * k + 1.0));
  CHECK(std::abs(cauchy_line(f, k, QuadratureSpec{}).value - ref) < 1e-9);
}

TEST_CASE("unwrap follows the branch and rejects coarse sampling") {
  std::vector<cplx> v;
  for (int i = 0; i <= 40; ++i) v.push_back(std::polar(2.0, 0.3 * i));
  const auto a = unwrap_arg(v);
  CHECK(std::abs(a.back() - 12.0) < 1e-12);
  const auto l = unwrap_log(v);
  CHECK(std::abs(l.back() - cplx(std::log(2.0), 12.0)) < 1e-12);
  std::vector<cplx> coarse{1.0, std::polar(1.0, 2.5)};
  CHECK_THROWS_AS(unwrap_arg(coarse), NumericalError);
  std::vector<cplx> with_zero{1.0, 0.0};
  CHECK_THROWS_AS(unwrap_arg(with_zero), NumericalError);
}

TEST_CASE("log Stieltjes integral: derivative form agrees with the by-parts form") {
  // pure step, A = 1: g = ln(4 z^2/(4 z^2 + 1)), g' = 2/z - 8z/(4 z^2 + 1)
  const Sampler g = from_fn([](double z) { return cplx(std::log(4.0 * z * z / (4.0 * z * z + 1.0))); });
  const Sampler dg = from_fn([](double z) { return cplx(2.0 / z - 8.0 * z / (4.0 * z * z + 1.0)); });
  const QuadratureSpec q;
  for (double e : {-0.5, -1.0, -2.0}) {
    const auto a = stieltjes_log_integral(dg, e, e, q);
    const auto b = stieltjes_log_endpoint(g, e, q);
    CHECK(std::abs(a.value - b.value) < 1e-7);
  }
}

TEST_CASE("half-line Cauchy integral: delta of the pure step") {
  const Sampler g = from_fn([](double z) { return cplx(std::log(4.0 * z * z / (4.0 * z * z + 1.0))); });
  const auto r = cauchy_halfline(g, -0.5, 0.0, QuadratureSpec{});
  const cplx ref = std::exp(kI * oracle::dilog_series(-1.0) / (4.0 * oracle::pi));
  CHECK(std::abs(std::exp(r.value) - ref) < 1e-9);
}

TEST_CASE("quadrature spec validation names the field") {
  QuadratureSpec q;
  q.panel_count = 0;
  CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("panel_count"), InputError);
  q = {};
  q.truncation_radius = -1.0;
  CHECK_THROWS_WITH_AS(q.validate(), doctest::Contains("truncation_radius"), InputError);
}

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const auto& r = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], 14);
  CHECK(std::abs(s - 2.0 / 15.0) < 1e-15);
}
