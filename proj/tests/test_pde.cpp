#include "nnls/exact.hpp"
#include "nnls/pde.hpp"
#include "nnls/profile.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <random>

using namespace nnls;

namespace {

FieldState random_field(double L, double h, double A, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  return FieldState::from_step(L, h, A, [&](double) { return cplx(n(rng), n(rng)); });
}

std::array<FieldState, 3> soliton_triplet(const SolitonParams& p, double h, double t, double dt) {
  auto f = [&](double tt) { return FieldState::from_step(10.0, h, p.A, [&](double x) { return one_soliton(p, x, tt); }); };
  return {f(t - dt), f(t), f(t + dt)};
}

}  // namespace

TEST_CASE("mirror is an involution") {
  const auto s = random_field(5.0, 0.1, 1.0, 3);
  const FieldState ms(s.half_width(), s.size(), s.amplitude(), mirror(s));
  const auto mm = mirror(ms);
  for (std::size_t j = 1; j + 1 < s.size(); ++j) CHECK(mm[j] == s.q()[j]);
}

TEST_CASE("zero field is a fixed point of the semi-discrete flow") {
  const std::size_t n = 201;
  const FieldState z(5.0, n, 0.0, std::vector<cplx>(n, 0.0));
  for (const auto& v : rhs(z)) CHECK(v == 0.0);
}

TEST_CASE("constant field is not a solution") {
  const double A = 1.5;
  const auto c = FieldState::from_step(5.0, 0.05, A, [&](double) { return cplx(A); });
  const auto r = rhs(c);
  CHECK(std::abs(r[c.size() / 2] - 2.0 * kI * A * A * A) < 1e-12);
  const std::array<FieldState, 3> st{c, c, c};
  CHECK(pde_residual(st, 1e-3) == doctest::Approx(2.0 * A * A * A).epsilon(1e-14));
}

TEST_CASE("discrete residual of the exact soliton is second order") {
  const SolitonParams p{1.0, 3.141592653589793};
  const double r1 = pde_residual(soliton_triplet(p, 0.04, 1.0, 2e-3), 2e-3);
  const double r2 = pde_residual(soliton_triplet(p, 0.02, 1.0, 1e-3), 1e-3);
  CHECK(std::log2(r1 / r2) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("exact soliton: singular set and time derivative") {
  const SolitonParams p{2.0, 1.0};
  const auto ts = singularity_times(p, -1, 1);
  REQUIRE(ts.size() == 3);
  CHECK(ts[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(one_soliton(p, 0.0, ts[1]), SingularityError);
  const double dt = 1e-5;
  const cplx fd = (one_soliton(p, 0.3, 0.7 + dt) - one_soliton(p, 0.3, 0.7 - dt)) / (2.0 * dt);
  CHECK(std::abs(fd - one_soliton_dt(p, 0.3, 0.7)) < 1e-8);
  CHECK_THROWS_AS(one_soliton(SolitonParams{1.0, 0.0}, 0.0, 0.0), SingularityError);
}

TEST_CASE("evolve keeps the zero field at zero") {
  const std::size_t n = 401;
  const FieldState z(10.0, n, 0.0, std::vector<cplx>(n, 0.0));
  EvolveConfig cfg;
  cfg.dt = 1e-4;
  cfg.steps = 100;
  cfg.snapshot_times = {0.0, 0.01};
  const auto res = evolve(z, cfg);
  REQUIRE(res.snapshots.size() == 2);
  for (const auto& s : res.snapshots)
    for (const auto& v : s.state.q()) CHECK(v == 0.0);
  CHECK_FALSE(res.blow_up);
}

TEST_CASE("evolve rejects a CFL violation") {
  const auto s = FieldState::from_step(5.0, 0.05, 1.0, [](double x) { return cplx(x > 0 ? 1.0 : 0.0); });
  EvolveConfig cfg;
  cfg.dt = 0.01;
  cfg.steps = 1;
  CHECK_THROWS_AS(evolve(s, cfg), InputError);
}

TEST_CASE("evolve reproduces the soliton for short times") {
  const SolitonParams p{1.0, 3.141592653589793};
  const auto init = FieldState::from_step(20.0, 0.05, 1.0, [&](double x) { return one_soliton(p, x, 0.0); });
  EvolveConfig cfg;
  cfg.dt = 2.5e-4;
  cfg.steps = 800;
  cfg.snapshot_times = {0.2};
  const auto res = evolve(init, cfg);
  REQUIRE(res.snapshots.size() == 1);
  const auto& st = res.snapshots[0].state;
  double err = 0.0;
  for (std::size_t j = 0; j < st.size(); ++j)
    if (std::abs(st.x_at(j)) <= 10.0) err = std::max(err, std::abs(st.q()[j] - one_soliton(p, st.x_at(j), st.t())));
  CHECK(err < 1e-3);
}

TEST_CASE("ray sampling flags points outside the trusted window") {
  const auto s = FieldState::from_step(10.0, 0.1, 1.0, [](double x) { return cplx(x, 0.0); });
  FieldState late = s;
  late.set_t(4.0);
  const std::vector<Snapshot> snaps{{late, trusted_half_width(late, 4.0)}};
  CHECK(snaps[0].trusted_half_width == doctest::Approx(2.0));
  const std::vector<double> times{4.0};
  const auto in = ray_sample(snaps, 0.1, times);
  REQUIRE(in.samples.size() == 1);
  CHECK(std::abs(in.samples[0].q - 1.6) < 1e-12);
  const auto out = ray_sample(snaps, 0.5, times);
  CHECK(out.samples.empty());
  CHECK(out.truncated);
}

TEST_CASE("profile JSON errors name the field") {
  using nlohmann::json;
  CHECK_THROWS_WITH_AS(profile_from_json(json{{"support_radius", 1.0}, {"grid_step", 0.5}}),
                       doctest::Contains("amplitude"), InputError);
  CHECK_THROWS_WITH_AS(profile_from_json(json{{"amplitude", 1.0}, {"support_radius", 1.0}, {"grid_step", 0.5}}),
                       doctest::Contains("samples"), InputError);
  CHECK_THROWS_WITH_AS(profile_from_json(json{{"builtin", "nope"}}), doctest::Contains("nope"), InputError);
  CHECK_THROWS_AS(profile_from_json(json{{"builtin", "pure_step"}, {"amplitude", -1.0}}), InputError);
  const json ok{{"amplitude", 1.0},
                {"support_radius", 1.0},
                {"grid_step", 0.5},
                {"samples", json::array({json::array({0.0, 0.0}), json::array({0.3, 0.1}), json::array({0.5, 0.0}),
                                         json::array({0.8, 0.0}), json::array({1.0, 0.0})})}};
  const auto p = profile_from_json(ok);
  CHECK(p.size() == 5);
  CHECK(std::abs(p.value(-0.5) - cplx(0.3, 0.1)) < 1e-15);
}

TEST_CASE("builtin profiles round-trip through JSON") {
  const auto p = InitialProfile::smoothed_step(1.2);
  const auto q = profile_from_json(p.to_json());
  REQUIRE(q.size() == p.size());
  for (std::size_t j = 0; j < p.size(); ++j) CHECK(q.samples()[j] == p.samples()[j]);
}
