#pragma once

#include "nnls/common.hpp"
#include "nnls/pde.hpp"

#include <array>
#include <vector>

namespace nnls {

struct SolitonParams {
  double A = 1.0;
  double phi1 = kPi;

  void validate() const;
};

// q(x, t) = A / (1 - exp(-A x - i A^2 t + i phi1)).
// Throws SingularityError when the denominator modulus is below 1e-12.
cplx one_soliton(const SolitonParams& p, double x, double t);

// Analytic time derivative of one_soliton.
cplx one_soliton_dt(const SolitonParams& p, double x, double t);

// t_n = phi1 / A^2 + 2 pi n / A^2 for n in [n_lo, n_hi].
std::vector<double> singularity_times(const SolitonParams& p, int n_lo, int n_hi);

// Closed-form scattering matrix of the pure step.
Mat2 pure_step_S(double A, cplx k);

// max over nodes at least two steps from the pinned boundary of |i (q+ - q-)/(2 dt) + D2 q + 2 q^2 conj(q(-x))|
// evaluated at the middle state.
double pde_residual(const std::array<FieldState, 3>& states, double dt);

}  // namespace nnls
