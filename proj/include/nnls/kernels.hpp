#pragma once

// Special functions and singular quadrature on the real line.
//
// The Cauchy-type integrals below take their integrand as a Sampler: a
// callable that receives a batch of abscissae sorted in ascending order and
// returns the integrand at each. Sorting lets a sampler keep a logarithm on a
// continuous branch (see unwrap_arg) while walking the contour.

#include "nnls/common.hpp"

#include <span>
#include <vector>

namespace nnls {

struct QuadratureSpec {
  double truncation_radius = 200.0;
  int panel_count = 12;
  double grading_ratio = 0.5;
  int nodes_per_panel = 16;
  double tail_tolerance = 1e-10;

  // Throws InputError naming the offending field.
  void validate() const;
};

using Sampler = std::function<std::vector<cplx>(std::span<const double>)>;

struct QuadResult {
  cplx value;
  cplx tail;             // analytic correction added for |ζ| > truncation_radius
  double tail_estimate;  // estimated error left in the tail model
  bool converged;        // tail_estimate <= spec.tail_tolerance
};

// Euler Gamma function. Lanczos (g = 7) for Re z >= 1/2, reflection otherwise.
cplx complex_gamma(cplx z);

// Real dilogarithm Li2(x) for x <= 1.
double dilog(double x);

// Default bound on the principal phase step between neighbouring samples.
inline constexpr double kMaxPhaseStep = 0.75 * kPi;

// Continuous argument along a sequence; starts on (-π, π] at the first value.
// Throws NumericalError on a zero value or when a principal phase step
// reaches max_step (the sequence is too coarse to follow the branch).
std::vector<double> unwrap_arg(std::span<const cplx> values, double max_step = kMaxPhaseStep);

// Logarithm of a sequence on the branch selected by unwrap_arg.
std::vector<cplx> unwrap_log(std::span<const cplx> values, double max_step = kMaxPhaseStep);

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

// Breakpoints of panel_count panels on [a, b] whose widths shrink
// geometrically (ratio grading_ratio) toward a (toward_b == false) or b.
std::vector<double> graded_breakpoints(double a, double b, bool toward_b, const QuadratureSpec& spec);

// ∫_R f(ζ)/(ζ - k) dζ. Real k gives the principal value. Requires |k| < R/2.
QuadResult cauchy_line(const Sampler& f, cplx k, const QuadratureSpec& spec);

// v.p. ∫_R f(ζ)/(ζ - pole) dζ.
QuadResult pv_cauchy(const Sampler& f, double pole, const QuadratureSpec& spec);

// (1/2πi) ∫_{-∞}^{endpoint} g(ζ)/(ζ - k) dζ, k off (-∞, endpoint].
QuadResult cauchy_halfline(const Sampler& g, double endpoint, cplx k, const QuadratureSpec& spec);

// -(1/2πi) ∫_{-∞}^{endpoint} ln(k - ζ) g'(ζ) dζ with g' supplied as dg.
// k == endpoint is allowed (integrable log singularity at the endpoint).
QuadResult stieltjes_log_integral(const Sampler& dg, double endpoint, cplx k, const QuadratureSpec& spec);

// -(1/2πi) ∫_{-∞}^{endpoint} ln(endpoint - ζ) dg(ζ) computed by parts from
// samples of g itself (g is sampled at the endpoint too). Suitable when only
// g, not its derivative, is available.
QuadResult stieltjes_log_endpoint(const Sampler& g, double endpoint, const QuadratureSpec& spec);

}  // namespace nnls
