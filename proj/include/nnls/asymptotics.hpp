#pragma once

// Long-time asymptotics along rays x = 4 xi t: the scalar factor delta, the
// exponent nu, its regular part chi, the coefficients alpha1..alpha3 and the
// leading terms for x < 0 and x > 0, plus the fixed-x soliton-region formula.

#include "nnls/common.hpp"
#include "nnls/scattering.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nnls {

// Quantities attached to the stationary point -xi of one ray (xi > 0).
struct PhaseData {
  double xi = 0.0;
  cplx nu;                 // nu(-xi)
  double Delta = 0.0;      // continuous arg of 1 + r1 r2 from -infinity to -xi
  cplx chi_at_minus_xi;    // chi(xi, -xi)
  cplx delta0;             // delta(xi, 0)
  cplx delta_ik1;          // delta(xi, i k1)
  cplx c0;                 // A delta0^2 / (2i)
  bool assumption_b_ok = false;
  cplx r1_minus, r2_minus;  // r1(-xi), r2(-xi)
  cplx r1_plus, r2_plus;    // r1(xi), r2(xi)
  double tail_estimate = 0.0;
};

// ln(1 + r1 r2) on the real axis, continuous from -infinity. At zeta = 0 the
// Case II limit -ln(1 - |b(0)|^2) is returned; Case I has no finite value
// there and throws.
Sampler log_one_plus_r1r2(const SpectralData& sd);

std::pair<cplx, double> nu_of_xi(const SpectralData& sd, double xi);

// delta(xi, k) = exp{(1/2 pi i) int_{-inf}^{-xi} ln(1 + r1 r2)/(zeta - k) dzeta}.
// xi = 0 is accepted for Case II data (b(0) = 0 makes the endpoint regular).
cplx delta_at(const SpectralData& sd, double xi, cplx k);

// chi(xi, k); k = -xi is the value used by the coefficients.
cplx chi_at(const SpectralData& sd, double xi, cplx k);

// Computed once per (xi, spectral fingerprint) and cached.
PhaseData phase_data(const SpectralData& sd, double xi);

struct AlphaCoeffs {
  cplx alpha1;  // for the mirror ray x/(4t) = -xi
  cplx alpha2, alpha3;
};
AlphaCoeffs alpha_coeffs(const SpectralData& sd, double xi, const PhaseData& phase);

enum class Regime { LeftDecay, RightA, RightB, RightC, SolitonRegion };
std::string to_string(Regime r);

enum class ErrorOrder { InvT, InvTLogT, PowerImNu };
// "t^-1", "t^-1 ln t", "t^(-1+2|Im nu|)"
std::string to_string(ErrorOrder e);

// amplitude * t^power * exp{i (phase_rate t + log_phase_coef ln t)}
struct TPowerTerm {
  cplx amplitude;
  double power;
  double phase_rate;
  double log_phase_coef;

  cplx at(double t) const;
};

struct AsymptoticResult {
  cplx value;
  Regime regime = Regime::LeftDecay;
  ErrorOrder error_order = ErrorOrder::InvT;
  std::vector<TPowerTerm> t_power_terms;
  double xi = 0.0;
  cplx nu;        // nu at the stationary point that governs the ray
  cplx delta0;    // delta(|xi|, 0)
  bool transition_zone = false;  // |xi| < 0.05 A: outside the supported range
};

AsymptoticResult q_asymptotic(const SpectralData& sd, double x, double t);

// A delta(xi, 0)^2.
cplx modulated_constant(const SpectralData& sd, double xi);

// Fixed-x asymptotics for Case II data with b(0) = 0. Throws
// SingularityError when (x0, t) is on the singular set of the formula.
cplx q_soliton_region(const SpectralData& sd, double x0, double t);

// (i/2 pi) int_{-inf}^{0} ln(-zeta) d ln(1 + r1 r2).
cplx chi_hat_1(const SpectralData& sd);

std::pair<cplx, cplx> c_constants(const SpectralData& sd, const PhaseData& phase, double x, double t);

struct AsymptoticRow {
  double x, t;
  AsymptoticResult res;
  std::string label;  // replaces the regime name when not empty
};
// CSV with columns x, t, xi, regime, Re q, Im q, abs q, error_order, Im_nu,
// Re_nu, Re delta0, Im delta0.
void write_asymptotics_csv(const std::vector<AsymptoticRow>& rows, const std::string& path,
                           const std::string& header_comment);

}  // namespace nnls
