#include "nnls/exact.hpp"

#include <cmath>

namespace nnls {

namespace {
constexpr double kSingularEps = 1e-12;
}

void SolitonParams::validate() const {
  if (!(A > 0.0) || !std::isfinite(A)) throw InputError("soliton: A must be > 0");
  if (!std::isfinite(phi1)) throw InputError("soliton: phi1 must be finite");
}

cplx one_soliton(const SolitonParams& p, double x, double t) {
  p.validate();
  const cplx e = std::exp(cplx(-p.A * x, -p.A * p.A * t + p.phi1));
  const cplx den = 1.0 - e;
  if (std::abs(den) < kSingularEps) throw SingularityError("soliton: (x, t) is on the singularity set");
  if (!std::isfinite(std::abs(e))) return 0.0;
  return p.A / den;
}

cplx one_soliton_dt(const SolitonParams& p, double x, double t) {
  p.validate();
  const cplx e = std::exp(cplx(-p.A * x, -p.A * p.A * t + p.phi1));
  const cplx den = 1.0 - e;
  if (std::abs(den) < kSingularEps) throw SingularityError("soliton: (x, t) is on the singularity set");
  if (!std::isfinite(std::abs(e))) return 0.0;
  // d/dt A/(1-e) = A e' / (1-e)^2 with e' = -i A^2 e
  return p.A * (-kI * p.A * p.A * e) / (den * den);
}

std::vector<double> singularity_times(const SolitonParams& p, int n_lo, int n_hi) {
  p.validate();
  std::vector<double> out;
  const double a2 = p.A * p.A;
  for (int n = n_lo; n <= n_hi; ++n) out.push_back(p.phi1 / a2 + 2.0 * kPi * n / a2);
  return out;
}

Mat2 pure_step_S(double A, cplx k) {
  if (!(A > 0.0)) throw InputError("pure_step_S: A must be > 0");
  if (k == 0.0) throw InputError("pure_step_S: k must be nonzero");
  const cplx c = A / (2.0 * kI * k);
  Mat2 S;
  S << 1.0 + A * A / (4.0 * k * k), -c, c, 1.0;
  return S;
}

double pde_residual(const std::array<FieldState, 3>& s, double dt) {
  if (!(dt > 0.0)) throw InputError("pde_residual: dt must be > 0");
  if (!s[0].same_grid(s[1]) || !s[1].same_grid(s[2])) throw InputError("pde_residual: grid mismatch");
  const auto qm = s[0].q();
  const auto q = s[1].q();
  const auto qp = s[2].q();
  const std::size_t n = q.size();
  const double inv_h2 = 1.0 / (s[1].h() * s[1].h());
  double worst = 0.0;
  for (std::size_t j = 2; j + 2 < n; ++j) {
    const cplx qt = (qp[j] - qm[j]) / (2.0 * dt);
    const cplx qxx = (q[j + 1] - 2.0 * q[j] + q[j - 1]) * inv_h2;
    const cplx r = kI * qt + qxx + 2.0 * q[j] * q[j] * std::conj(q[n - 1 - j]);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace nnls
