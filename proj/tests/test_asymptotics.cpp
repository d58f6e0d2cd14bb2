#include "nnls/asymptotics.hpp"
#include "nnls/exact.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace nnls;

namespace {

const SpectralData& pure_step_data() {
  static const SpectralData sd = [] {
    ScatteringOptions opt;
    opt.nodes_per_sign = 200;
    return scattering_data(std::make_shared<PureStepSource>(1.0), default_k_grid(opt), opt);
  }();
  return sd;
}

SpectralData reflectionless(double A, double phi1) {
  ScatteringOptions opt;
  opt.nodes_per_sign = 200;
  return scattering_data(std::make_shared<ReflectionlessSource>(A, phi1), default_k_grid(opt), opt);
}

}  // namespace

TEST_CASE("delta of the pure step against the dilogarithm closed form") {
  const auto& sd = pure_step_data();
  for (double xi : {0.25, 0.5, 1.0}) {
    // exp{(i/4 pi) Li2(-A^2/(4 xi^2))}
    const cplx ref = std::exp(kI * oracle::dilog_series(-1.0 / (4.0 * xi * xi)) / (4.0 * oracle::pi));
    CHECK(std::abs(delta_at(sd, xi, 0.0) - ref) < 1e-8);
  }
}

TEST_CASE("delta jumps by 1 + r1 r2 across the cut") {
  const auto& sd = pure_step_data();
  const double xi = 0.5;
  for (double z : {-0.9, -2.0, -5.0}) {
    const double eps = 1e-6;
    const cplx ratio = delta_at(sd, xi, cplx(z, eps)) / delta_at(sd, xi, cplx(z, -eps));
    const auto rc = reflection_coeffs(sd, z);
    CHECK(std::abs(ratio - rc.one_plus_r1r2) < 1e-5);
  }
}

TEST_CASE("nu of the pure step is real") {
  const auto& sd = pure_step_data();
  for (double xi : {0.2, 0.5, 3.0}) {
    const auto [nu, Delta] = nu_of_xi(sd, xi);
    CHECK(std::abs(nu.imag()) < 1e-12);
    // 1 + r1 r2 = 4 xi^2 / (4 xi^2 + 1) at -xi
    CHECK(std::abs(nu.real() + std::log(4.0 * xi * xi / (4.0 * xi * xi + 1.0)) / (2.0 * oracle::pi)) < 1e-12);
    CHECK(std::abs(Delta) < 1e-12);
  }
}

TEST_CASE("regime follows the sign of x and the Im nu thresholds") {
  const auto& sd = pure_step_data();
  for (double x : {-40.0, -10.0, 10.0, 40.0}) {
    const auto r = q_asymptotic(sd, x, 20.0);
    if (x < 0) {
      CHECK(r.regime == Regime::LeftDecay);
    } else {
      const double im = r.nu.imag();
      const Regime want = im <= -1.0 / 6.0 ? Regime::RightA : (im >= 1.0 / 6.0 ? Regime::RightC : Regime::RightB);
      CHECK(r.regime == want);
    }
    CHECK(std::isfinite(std::abs(r.value)));
  }
  CHECK_THROWS_AS(q_asymptotic(sd, 0.0, 1.0), InputError);
  CHECK_THROWS_AS(q_asymptotic(sd, 1.0, 0.0), InputError);
}

TEST_CASE("result is the sum of its t-power terms on the right") {
  const auto& sd = pure_step_data();
  const double t = 30.0;
  const auto r = q_asymptotic(sd, 60.0, t);
  cplx sum = 0.0;
  for (const auto& term : r.t_power_terms) sum += term.at(t);
  CHECK(std::abs(sum - r.value) < 1e-12 * std::max(1.0, std::abs(r.value)));
}

TEST_CASE("transition zone is flagged") {
  const auto& sd = pure_step_data();
  CHECK(q_asymptotic(sd, 4.0 * 0.01 * 100.0, 100.0).transition_zone);
  CHECK_FALSE(q_asymptotic(sd, 4.0 * 0.5 * 100.0, 100.0).transition_zone);
}

TEST_CASE("modulated constant has modulus A for the pure step") {
  const auto& sd = pure_step_data();
  for (double xi : {0.3, 0.5, 2.0}) CHECK(std::abs(std::abs(modulated_constant(sd, xi)) - 1.0) < 1e-10);
}

TEST_CASE("soliton-region formula reduces to the exact soliton") {
  for (const auto& [A, phi] : {std::pair{1.0, oracle::pi}, std::pair{2.0, 1.0}, std::pair{0.7, -2.0}}) {
    const auto sd = reflectionless(A, phi);
    const SolitonParams p{A, phi};
    for (double x0 : {-3.0, 0.0, 0.8, 4.0})
      for (double t : {0.3, 1.7, 9.0}) CHECK(std::abs(q_soliton_region(sd, x0, t) - one_soliton(p, x0, t)) < 1e-10);
  }
}

TEST_CASE("soliton-region formula needs Case II data") {
  CHECK_THROWS_AS(q_soliton_region(pure_step_data(), 1.0, 1.0), ValidationError);
}
