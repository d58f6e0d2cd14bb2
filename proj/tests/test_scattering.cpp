#include "nnls/scattering.hpp"

#include <doctest.h>

#include <cmath>

using namespace nnls;

namespace {

// a1 = 1 + A^2/(4k^2), a2 = 1, b = A/(2ik)
void pure_step_closed_form(double A, double k, cplx& a1, cplx& a2, cplx& b) {
  a1 = 1.0 + A * A / (4.0 * k * k);
  a2 = 1.0;
  b = A / (2.0 * cplx(0.0, 1.0) * k);
}

double rel(cplx got, cplx want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

}  // namespace

TEST_CASE("pure step Jost data match the closed form") {
  for (double A : {0.5, 1.0, 2.0}) {
    const JostSolver js(InitialProfile::pure_step(A));
    for (double k : {-7.0, -1.3, -0.2, 0.05, 0.4, 2.0, 9.5}) {
      const Mat2 S = js.scattering_matrix(k);
      cplx a1, a2, b;
      pure_step_closed_form(A, k, a1, a2, b);
      CHECK(rel(S(0, 0), a1) < 1e-9);
      CHECK(rel(S(1, 1), a2) < 1e-9);
      CHECK(rel(S(1, 0), b) < 1e-9);
    }
  }
}

TEST_CASE("Jost substeps grow with |k|") {
  const JostSolver js(InitialProfile::smoothed_step(1.0));
  CHECK(js.substeps_for(0.1) == 1);
  CHECK(js.substeps_for(200.0) >= static_cast<int>(std::ceil(200.0 * 0.02 / 0.25)));
  CHECK(js.substeps_for(-200.0) == js.substeps_for(200.0));
}

TEST_CASE("scattering matrix symmetries hold pointwise for a smooth profile") {
  const ProfileSource src(InitialProfile::smoothed_step(1.3));
  for (double k : {0.03, 0.7, 4.0, 25.0}) {
    const auto p = src.at(k), m = src.at(-k);
    CHECK(std::abs(std::conj(m.a1) - p.a1) / std::max(1.0, std::abs(p.a1)) < 1e-10);
    CHECK(std::abs(std::conj(m.a2) - p.a2) / std::max(1.0, std::abs(p.a2)) < 1e-10);
    CHECK(std::abs(p.a1 * p.a2 - p.b * p.s12 - 1.0) / std::max(1.0, std::abs(p.a1 * p.a2)) < 1e-10);
    CHECK(std::abs(p.s12 + std::conj(m.b)) < 1e-12);
  }
}

TEST_CASE("small-k combination is conserved") {
  for (const auto& prof : {InitialProfile::pure_step(1.0), InitialProfile::smoothed_step(2.0)}) {
    const auto vv = small_k_limit(prof);
    const auto c = vv.conserved();
    const double A2 = prof.amplitude() * prof.amplitude();
    for (const auto& v : c) CHECK(std::abs(v - c.front()) < 1e-8 * A2);
  }
}

TEST_CASE("reflectionless source: Case II, k1 = A/2 and unit norming constant") {
  ScatteringOptions opt;
  opt.nodes_per_sign = 200;
  const auto sd = scattering_data(std::make_shared<ReflectionlessSource>(2.0, 0.7), default_k_grid(opt), opt);
  CHECK(sd.case_tag == CaseTag::CaseII);
  CHECK(std::abs(sd.k1 - 1.0) < 1e-8);
  CHECK(std::abs(sd.k1_root - 1.0) < 1e-8);
  CHECK(std::abs(sd.gamma1 - std::polar(1.0, 0.7)) < 1e-14);
  CHECK(validate_spectral(sd).all_pass());
}

TEST_CASE("pure step closed-form source: Case I") {
  ScatteringOptions opt;
  opt.nodes_per_sign = 200;
  const auto sd = scattering_data(std::make_shared<PureStepSource>(1.0), default_k_grid(opt), opt);
  CHECK(sd.case_tag == CaseTag::CaseI);
  CHECK(std::abs(sd.k1 - 0.5) < 1e-8);
  CHECK(std::abs(std::abs(sd.gamma1) - 1.0) < 1e-12);
}

TEST_CASE("k grid is symmetric, ascending and avoids zero") {
  ScatteringOptions opt;
  opt.nodes_per_sign = 50;
  const auto g = default_k_grid(opt);
  REQUIRE(g.size() == 100);
  for (std::size_t i = 0; i + 1 < g.size(); ++i) CHECK(g[i] < g[i + 1]);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == -g[g.size() - 1 - i]);
  CHECK(std::abs(g.back() - opt.k_max) < 1e-12);
}

TEST_CASE("options validation") {
  ScatteringOptions opt;
  opt.k_min = -1.0;
  CHECK_THROWS_AS(opt.validate(), InputError);
}
