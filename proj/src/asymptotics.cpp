#include "nnls/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace nnls {

namespace {

const double kSqrtPi = std::sqrt(kPi);
const double kLn2 = std::log(2.0);

// |Im nu| below this is treated as zero when choosing error orders
constexpr double kImNuZero = 1e-10;
// reflection coefficients below this are treated as vanishing
constexpr double kRZero = 1e-12;

void require_source(const SpectralData& sd, const char* who) {
  if (!sd.source) throw InputError(std::string(who) + ": spectral data has no source");
}

void require_xi(double xi, const char* who) {
  if (!(xi > 0.0) || !std::isfinite(xi)) throw InputError(std::string(who) + ": xi must be finite and > 0");
}

QuadResult checked(QuadResult r, const char* who) {
  if (!r.converged) {
    std::ostringstream os;
    os << who << ": quadrature tail did not converge (estimate " << r.tail_estimate << ")";
    throw NumericalError(os.str());
  }
  return r;
}

// Abscissae of the panels used for integrals over (-R, endpoint], ascending,
// with the endpoint last.
std::vector<double> ray_nodes(double endpoint, const QuadratureSpec& q) {
  std::vector<double> xs;
  const auto bp = graded_breakpoints(-q.truncation_radius, endpoint, true, q);
  const auto& gl = gauss_legendre(q.nodes_per_panel);
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double mid = 0.5 * (bp[p] + bp[p + 1]);
    const double half = 0.5 * (bp[p + 1] - bp[p]);
    if (half <= 0.0) continue;
    for (double n : gl.nodes) xs.push_back(mid + half * n);
  }
  std::sort(xs.begin(), xs.end());
  xs.push_back(endpoint);
  return xs;
}

QuadResult halfline(const SpectralData& sd, double xi, cplx k) {
  if (xi < 0.0 || !std::isfinite(xi)) throw InputError("delta_at: xi must be finite and >= 0");
  if (xi == 0.0 && sd.case_tag != CaseTag::CaseII)
    throw InputError("delta_at: xi = 0 needs Case II data");
  return checked(cauchy_halfline(log_one_plus_r1r2(sd), -xi, k, sd.quad), "delta_at");
}

struct PhaseKey {
  std::string fp;
  double xi;
  bool operator<(const PhaseKey& o) const { return fp != o.fp ? fp < o.fp : xi < o.xi; }
};

std::mutex g_phase_mu;
std::map<PhaseKey, PhaseData> g_phase_cache;

cplx gamma_checked(cplx z) {
  try {
    return complex_gamma(z);
  } catch (const InputError&) {
    throw NumericalError("alpha_coeffs: Gamma pole (nu = 0 in a branch that divides by Gamma)");
  }
}

ErrorOrder r1_order(double im) {
  if (std::abs(im) <= kImNuZero) return ErrorOrder::InvTLogT;
  return im > 0.0 ? ErrorOrder::InvT : ErrorOrder::PowerImNu;
}

ErrorOrder r2_order(double im) {
  if (std::abs(im) <= kImNuZero) return ErrorOrder::InvTLogT;
  return im > 0.0 ? ErrorOrder::PowerImNu : ErrorOrder::InvT;
}

ErrorOrder r3_order(double im) {
  return std::abs(im) <= kImNuZero ? ErrorOrder::InvTLogT : ErrorOrder::PowerImNu;
}

}  // namespace

Sampler log_one_plus_r1r2(const SpectralData& sd) {
  require_source(sd, "log_one_plus_r1r2");
  const bool case2 = sd.case_tag == CaseTag::CaseII;
  const cplx f0 = 1.0 - std::norm(sd.b0);
  auto src = sd.source;
  return [src, case2, f0](std::span<const double> xs) {
    std::vector<double> ks;
    ks.reserve(xs.size());
    for (double x : xs)
      if (x != 0.0) ks.push_back(x);
    const auto pts = src->at_many(ks);
    // 1 + r1 r2 = 1 / (1 - b(k) conj(b(-k)))
    std::vector<cplx> f(xs.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] == 0.0) {
        if (!case2) throw NumericalError("ln(1 + r1 r2) is unbounded at k = 0 for Case I data");
        f[i] = f0;
        continue;
      }
      const auto& p = pts[j++];
      f[i] = 1.0 + p.s12 * p.b;
      if (f[i] == 0.0 || !std::isfinite(std::abs(f[i])))
        throw NumericalError("1 + r1 r2 vanishes or is unbounded on the contour");
    }
    auto g = unwrap_log(f);
    for (auto& v : g) v = -v;
    return g;
  };
}

std::pair<cplx, double> nu_of_xi(const SpectralData& sd, double xi) {
  require_source(sd, "nu_of_xi");
  require_xi(xi, "nu_of_xi");
  const auto xs = ray_nodes(-xi, sd.quad);
  const auto g = log_one_plus_r1r2(sd)(xs);
  const cplx ge = g.back();
  return {-ge / (2.0 * kPi), ge.imag()};
}

cplx delta_at(const SpectralData& sd, double xi, cplx k) {
  require_source(sd, "delta_at");
  return std::exp(halfline(sd, xi, k).value);
}

cplx chi_at(const SpectralData& sd, double xi, cplx k) {
  require_source(sd, "chi_at");
  if (k == cplx(-xi, 0.0))
    return checked(stieltjes_log_endpoint(log_one_plus_r1r2(sd), -xi, sd.quad), "chi_at").value;
  // chi = ln delta - i nu ln(xi + k)
  const cplx h = halfline(sd, xi, k).value;
  const cplx nu = nu_of_xi(sd, xi).first;
  return h - kI * nu * std::log(xi + k);
}

PhaseData phase_data(const SpectralData& sd, double xi) {
  require_source(sd, "phase_data");
  require_xi(xi, "phase_data");
  PhaseKey key{sd.fingerprint(), xi};
  {
    std::lock_guard lock(g_phase_mu);
    auto it = g_phase_cache.find(key);
    if (it != g_phase_cache.end()) return it->second;
  }

  PhaseData ph;
  ph.xi = xi;
  std::tie(ph.nu, ph.Delta) = nu_of_xi(sd, xi);
  const auto chi = checked(stieltjes_log_endpoint(log_one_plus_r1r2(sd), -xi, sd.quad), "chi_at");
  const auto d0 = halfline(sd, xi, 0.0);
  const auto dk = halfline(sd, xi, cplx(0.0, sd.k1));
  ph.chi_at_minus_xi = chi.value;
  ph.delta0 = std::exp(d0.value);
  ph.delta_ik1 = std::exp(dk.value);
  ph.c0 = sd.A * ph.delta0 * ph.delta0 / (2.0 * kI);
  ph.assumption_b_ok = std::abs(ph.nu.imag()) < 0.5;
  const auto rm = reflection_coeffs(sd.source->at(-xi));
  const auto rp = reflection_coeffs(sd.source->at(xi));
  ph.r1_minus = rm.r1;
  ph.r2_minus = rm.r2;
  ph.r1_plus = rp.r1;
  ph.r2_plus = rp.r2;
  ph.tail_estimate = std::max({chi.tail_estimate, d0.tail_estimate, dk.tail_estimate});

  std::lock_guard lock(g_phase_mu);
  g_phase_cache[key] = ph;
  return ph;
}

AlphaCoeffs alpha_coeffs(const SpectralData& sd, double xi, const PhaseData& ph) {
  require_xi(xi, "alpha_coeffs");
  (void)sd;
  AlphaCoeffs out{0.0, 0.0, 0.0};
  const cplx nu = ph.nu;
  const cplx chi = ph.chi_at_minus_xi;

  const bool z1 = std::abs(ph.r1_minus) < kRZero;
  const bool z2 = std::abs(ph.r2_minus) < kRZero;
  if (!z1 && !z2) {
    out.alpha2 = ph.c0 * ph.c0 * kSqrtPi *
                 std::exp(-kPi / 2.0 * nu + 3.0 * kPi * kI / 4.0 - 2.0 * chi + 3.0 * kI * nu * kLn2) /
                 (xi * xi * ph.r2_minus * gamma_checked(kI * nu));
    out.alpha3 = kSqrtPi * std::exp(-kPi / 2.0 * nu + kPi * kI / 4.0 + 2.0 * chi - 3.0 * kI * nu * kLn2) /
                 (ph.r1_minus * gamma_checked(-kI * nu));
  } else if (z1 && !z2) {
    out.alpha3 = ph.r2_minus * std::exp(3.0 * kPi * kI / 4.0) / (2.0 * kSqrtPi);
  } else if (!z1 && z2) {
    out.alpha2 = ph.c0 * ph.c0 * ph.r1_minus * std::exp(kPi * kI / 4.0) / (2.0 * kSqrtPi * xi * xi);
  }

  // Mirror ray: the case conditions look at r(+xi), the values at -xi.
  const bool p1 = std::abs(ph.r1_plus) < kRZero;
  const bool p2 = std::abs(ph.r2_plus) < kRZero;
  const cplx nub = std::conj(nu);
  if (!p1 && !p2) {
    if (std::abs(ph.r2_minus) < kRZero) throw NumericalError("alpha_coeffs: r2(-xi) vanishes in the alpha1 formula");
    out.alpha1 = kSqrtPi *
                 std::exp(-kPi / 2.0 * nub + kPi * kI / 4.0 - 2.0 * std::conj(chi) - 3.0 * kI * nub * kLn2) /
                 (std::conj(ph.r2_minus) * gamma_checked(-kI * nub));
  } else if (p1 && !p2) {
    out.alpha1 = std::conj(ph.r1_minus) * std::exp(3.0 * kPi * kI / 4.0) / (2.0 * kSqrtPi);
  }
  return out;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::LeftDecay: return "LeftDecay";
    case Regime::RightA: return "RightA";
    case Regime::RightB: return "RightB";
    case Regime::RightC: return "RightC";
    case Regime::SolitonRegion: return "SolitonRegion";
  }
  return "?";
}

std::string to_string(ErrorOrder e) {
  switch (e) {
    case ErrorOrder::InvT: return "t^-1";
    case ErrorOrder::InvTLogT: return "t^-1 ln t";
    case ErrorOrder::PowerImNu: return "t^(-1+2|Im nu|)";
  }
  return "?";
}

cplx TPowerTerm::at(double t) const {
  return amplitude * std::pow(t, power) * std::exp(kI * (phase_rate * t + log_phase_coef * std::log(t)));
}

AsymptoticResult q_asymptotic(const SpectralData& sd, double x, double t) {
  require_source(sd, "q_asymptotic");
  if (!(t > 0.0) || !std::isfinite(t)) throw InputError("q_asymptotic: t must be finite and > 0");
  if (x == 0.0 || !std::isfinite(x)) throw InputError("q_asymptotic: xi = x/(4t) must be finite and nonzero");
  const double xi = x / (4.0 * t);
  const double a = std::abs(xi);
  const PhaseData ph = phase_data(sd, a);
  if (!ph.assumption_b_ok) {
    std::ostringstream os;
    os << "q_asymptotic: |Im nu| = " << std::abs(ph.nu.imag()) << " >= 1/2 at xi = " << a;
    throw ValidationError(os.str());
  }
  const AlphaCoeffs al = alpha_coeffs(sd, a, ph);

  AsymptoticResult res;
  res.xi = xi;
  res.nu = ph.nu;
  res.delta0 = ph.delta0;
  res.transition_zone = a < 0.05 * sd.A;
  const double im = ph.nu.imag();
  const double re = ph.nu.real();
  const double rate = 4.0 * xi * xi;

  if (xi < 0.0) {
    res.regime = Regime::LeftDecay;
    res.error_order = r1_order(im);
    res.t_power_terms.push_back({al.alpha1, -0.5 - im, rate, -re});
  } else {
    const TPowerTerm constant{sd.A * ph.delta0 * ph.delta0, 0.0, 0.0, 0.0};
    const TPowerTerm t3{al.alpha3, -0.5 + im, rate, -re};
    const TPowerTerm t2{al.alpha2, -0.5 - im, -rate, re};
    res.t_power_terms.push_back(constant);
    if (im <= -1.0 / 6.0) {
      res.regime = Regime::RightA;
      res.error_order = r1_order(im);
      res.t_power_terms.push_back(t2);
    } else if (im < 1.0 / 6.0) {
      res.regime = Regime::RightB;
      res.error_order = r3_order(im);
      res.t_power_terms.push_back(t3);
      res.t_power_terms.push_back(t2);
    } else {
      res.regime = Regime::RightC;
      res.error_order = r2_order(im);
      res.t_power_terms.push_back(t3);
    }
  }
  res.value = 0.0;
  for (const auto& term : res.t_power_terms) res.value += term.at(t);
  return res;
}

cplx modulated_constant(const SpectralData& sd, double xi) {
  const PhaseData ph = phase_data(sd, xi);
  return sd.A * ph.delta0 * ph.delta0;
}

cplx chi_hat_1(const SpectralData& sd) {
  require_source(sd, "chi_hat_1");
  if (sd.case_tag != CaseTag::CaseII) throw InputError("chi_hat_1: needs Case II data");
  return checked(stieltjes_log_endpoint(log_one_plus_r1r2(sd), 0.0, sd.quad), "chi_hat_1").value;
}

cplx q_soliton_region(const SpectralData& sd, double x0, double t) {
  require_source(sd, "q_soliton_region");
  if (!(t > 0.0) || !std::isfinite(t) || !std::isfinite(x0))
    throw InputError("q_soliton_region: need finite x0 and t > 0");
  if (sd.case_tag != CaseTag::CaseII || std::abs(sd.b0) > 1e-6)
    throw ValidationError("q_soliton_region: the formula needs Case II data with b(0) = 0");

  const double k1 = sd.k1;
  const cplx d = delta_at(sd, 0.0, cplx(0.0, k1));
  const cplx ch = chi_hat_1(sd);
  const cplx p = 2.0 * kI * k1 * k1 * sd.da1_at_ik1 * d * d;
  const cplx num = sd.A * p * std::exp(2.0 * ch);
  const cplx ex(-2.0 * k1 * x0 + 2.0 * ch.real(), -4.0 * k1 * k1 * t + 2.0 * ch.imag());
  if (ex.real() > 700.0) return 0.0;
  const cplx e = sd.A * sd.gamma1 * std::exp(ex);
  const cplx den = p - e;
  if (std::abs(den) <= 1e-12 * (std::abs(p) + std::abs(e))) {
    std::ostringstream os;
    os << "q_soliton_region: (x0, t) = (" << x0 << ", " << t << ") is on the singular set of the formula";
    throw SingularityError(os.str());
  }
  return num / den;
}

std::pair<cplx, cplx> c_constants(const SpectralData& sd, const PhaseData& ph, double x, double t) {
  if (!std::isfinite(x) || !std::isfinite(t)) throw InputError("c_constants: x and t must be finite");
  const double k1 = sd.k1;
  const cplx c1 = sd.gamma1 / (sd.da1_at_ik1 * ph.delta_ik1 * ph.delta_ik1) *
                  std::exp(cplx(-2.0 * k1 * x, -4.0 * k1 * k1 * t));
  return {ph.c0, c1};
}

void write_asymptotics_csv(const std::vector<AsymptoticRow>& rows, const std::string& path,
                           const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << header_comment;
  out << "x,t,xi,regime,Re q,Im q,abs q,error_order,Im_nu,Re_nu,Re delta0,Im delta0\n";
  char buf[768];
  for (const auto& r : rows) {
    const auto& a = r.res;
    const bool has_value = std::isfinite(std::abs(a.value));
    const std::string regime = r.label.empty() ? to_string(a.regime) : r.label;
    const std::string order = has_value ? to_string(a.error_order) : "n/a";
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g\n", r.x,
                  r.t, a.xi, regime.c_str(), a.value.real(), a.value.imag(), std::abs(a.value), order.c_str(),
                  a.nu.imag(), a.nu.real(), a.delta0.real(), a.delta0.imag());
    out << buf;
  }
}

}  // namespace nnls
