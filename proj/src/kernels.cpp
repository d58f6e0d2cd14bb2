#include "nnls/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>

namespace nnls {

void QuadratureSpec::validate() const {
  auto fail = [](const char* field, const char* why) {
    std::ostringstream os;
    os << "quadrature spec: " << field << " " << why;
    throw InputError(os.str());
  };
  if (!(truncation_radius > 0.0) || !std::isfinite(truncation_radius)) fail("truncation_radius", "must be > 0");
  if (panel_count < 1) fail("panel_count", "must be >= 1");
  if (!(grading_ratio > 0.0 && grading_ratio < 1.0)) fail("grading_ratio", "must lie in (0, 1)");
  if (nodes_per_panel < 2) fail("nodes_per_panel", "must be >= 2");
  if (!(tail_tolerance > 0.0)) fail("tail_tolerance", "must be > 0");
}

// ---------------------------------------------------------------------------
// Gamma

cplx complex_gamma(cplx z) {
  if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real()))
    throw InputError("complex_gamma: pole at non-positive integer");
  if (z.real() < 0.5) {
    // Γ(z)Γ(1-z) = π / sin(πz)
    return kPi / (std::sin(kPi * z) * complex_gamma(1.0 - z));
  }
  static constexpr std::array<double, 9> p = {
      0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
      771.32342877765313,   -176.61502916214059,   12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  const cplx w = z - 1.0;
  cplx x = p[0];
  for (std::size_t i = 1; i < p.size(); ++i) x += p[i] / (w + static_cast<double>(i));
  const cplx t = w + g + 0.5;
  return std::exp(0.5 * std::log(2.0 * kPi) + (w + 0.5) * std::log(t) - t + std::log(x));
}

// ---------------------------------------------------------------------------
// Dilogarithm

namespace {

// Li2(x) = Σ B_n u^{n+1}/(n+1)!, u = -ln(1-x); valid for |u| < 2π.
double dilog_bernoulli(double x) {
  static constexpr std::array<double, 12> c = {
      1.0,                       // B0/1!
      -0.25,                     // B1/2!
      1.0 / 36.0,                // B2/3!
      -1.0 / 3600.0,             // B4/5!
      1.0 / 211680.0,            // B6/7!
      -1.0 / 10886400.0,         // B8/9!
      1.0 / 526901760.0,         // B10/11!
      -4.0647616451442255e-11,   // B12/13!
      8.9216910204564526e-13,    // B14/15!
      -1.9939295860721076e-14,   // B16/17!
      4.5189800296199182e-16,    // B18/19!
      -1.0356517612181247e-17};  // B20/21!
  const double u = -std::log1p(-x);
  const double u2 = u * u;
  double sum = c[0] * u + c[1] * u2;
  double pw = u * u2;  // u^3
  for (std::size_t i = 2; i < c.size(); ++i) {
    sum += c[i] * pw;
    pw *= u2;
  }
  return sum;
}

}  // namespace

double dilog(double x) {
  constexpr double pi2_6 = kPi * kPi / 6.0;
  if (std::isnan(x) || x > 1.0) throw InputError("dilog: argument must be <= 1");
  if (x == 1.0) return pi2_6;
  if (x == 0.0) return 0.0;
  if (x < -1.0) {
    const double l = std::log(-x);
    return -pi2_6 - 0.5 * l * l - dilog_bernoulli(1.0 / x);
  }
  if (x <= 0.5) return dilog_bernoulli(x);
  return pi2_6 - std::log(x) * std::log1p(-x) - dilog_bernoulli(1.0 - x);
}

// ---------------------------------------------------------------------------
// Branch tracking

std::vector<double> unwrap_arg(std::span<const cplx> values, double max_step) {
  std::vector<double> out;
  out.reserve(values.size());
  double prev_principal = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const cplx v = values[j];
    if (v == 0.0) throw NumericalError("unwrap_arg: zero value at index " + std::to_string(j));
    const double a = std::arg(v);
    if (j == 0) {
      out.push_back(a);
    } else {
      double d = a - prev_principal;
      if (d > kPi) d -= 2.0 * kPi;
      if (d <= -kPi) d += 2.0 * kPi;
      if (std::abs(d) >= max_step)
        throw NumericalError("unwrap_arg: phase step " + std::to_string(d) + " at index " +
                             std::to_string(j) + " (grid too coarse)");
      out.push_back(out.back() + d);
    }
    prev_principal = a;
  }
  return out;
}

std::vector<cplx> unwrap_log(std::span<const cplx> values, double max_step) {
  const auto arg = unwrap_arg(values, max_step);
  std::vector<cplx> out(values.size());
  for (std::size_t j = 0; j < values.size(); ++j) out[j] = cplx(std::log(std::abs(values[j])), arg[j]);
  return out;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre

namespace {

GaussRule make_gauss_legendre(int n) {
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(m);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(make_gauss_legendre(n));
  return *slot;
}

std::vector<double> graded_breakpoints(double a, double b, bool toward_b, const QuadratureSpec& spec) {
  const int m = spec.panel_count;
  std::vector<double> t(m + 1);
  const double len = b - a;
  for (int j = 0; j <= m; ++j) {
    const double frac = (j == 0) ? 0.0 : std::pow(spec.grading_ratio, m - j);
    t[j] = toward_b ? b - len * frac : a + len * frac;
  }
  if (toward_b) std::reverse(t.begin(), t.end());
  t.front() = a;
  t.back() = b;
  return t;
}

// ---------------------------------------------------------------------------
// Cauchy integrals

namespace {

// Collects abscissae, samples them in one ascending sweep, and hands back the
// values in insertion order.
class SamplePlan {
 public:
  std::size_t add(double x) {
    pts_.push_back(x);
    return pts_.size() - 1;
  }

  void run(const Sampler& f) {
    std::vector<std::size_t> order(pts_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return pts_[i] < pts_[j]; });
    std::vector<double> sorted(pts_.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = pts_[order[i]];
    const auto vals = f(sorted);
    if (vals.size() != sorted.size()) throw InputError("sampler returned wrong number of values");
    vals_.resize(pts_.size());
    for (std::size_t i = 0; i < order.size(); ++i) vals_[order[i]] = vals[i];
  }

  cplx operator[](std::size_t i) const { return vals_[i]; }
  double x(std::size_t i) const { return pts_[i]; }

 private:
  std::vector<double> pts_;
  std::vector<cplx> vals_;
};

struct Node {
  std::size_t idx;
  double w;
};

void add_panels(SamplePlan& plan, std::vector<Node>& nodes, const std::vector<double>& bp, int n) {
  const auto& gl = gauss_legendre(n);
  for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
    const double mid = 0.5 * (bp[p] + bp[p + 1]);
    const double half = 0.5 * (bp[p + 1] - bp[p]);
    if (half <= 0.0) continue;
    for (int i = 0; i < n; ++i) nodes.push_back({plan.add(mid + half * gl.nodes[i]), half * gl.weights[i]});
  }
}

// Sum of a power series in k whose n-th term is coef(n) * (k/R)^n.
template <class Coef>
cplx series_in(cplx k, double R, Coef coef) {
  cplx sum = 0.0, kn = 1.0;
  for (int n = 0; n < 400; ++n) {
    const cplx add = coef(n) * kn;
    sum += add;
    if (n > 2 && std::abs(add) < 1e-20 * std::abs(sum) + 1e-300) break;
    kn *= k / R;
  }
  return sum;
}

// ∫_R^∞ ζ^{-p} / (ζ - k) dζ
cplx right_tail_kernel(cplx k, double R, int p) {
  return series_in(k, R, [&](int n) { return 1.0 / ((n + p) * std::pow(R, p)); });
}

// ∫_{-∞}^{-R} ζ^{-p} / (ζ - k) dζ
cplx left_tail_kernel(cplx k, double R, int p) {
  const double sign = (p % 2 == 0) ? -1.0 : 1.0;
  return sign * series_in(-k, R, [&](int n) { return 1.0 / ((n + p) * std::pow(R, p)); });
}

// ∫_{-∞}^{-R} ln(k - ζ) ζ^{-p} dζ, p >= 2
cplx left_log_tail_kernel(cplx k, double R, int p) {
  const double sign = (p % 2 == 0) ? 1.0 : -1.0;
  const double lnR = std::log(R);
  const cplx head = std::pow(R, 1 - p) * (lnR / (p - 1) + 1.0 / ((p - 1.0) * (p - 1.0)));
  const cplx rest = series_in(k, R, [&](int n) {
    if (n == 0) return 0.0;
    return ((n % 2 == 1) ? 1.0 : -1.0) / (n * (p + n - 1.0) * std::pow(R, p - 1));
  });
  return sign * (head + rest);
}

// Samples at ζ = s R ρ_j used to model the integrand beyond R as
// Σ_m c_m ζ^{-(p0+m)}.
constexpr std::array<double, 4> kTailRho = {1.0, 0.8, 0.64, 0.512};

// Solves the (n x n) Vandermonde system Σ_m c_m w_j^m = g_j.
template <std::size_t N>
std::array<cplx, N> vandermonde_solve(const std::array<cplx, N>& w, const std::array<cplx, N>& g, std::size_t n) {
  std::array<std::array<cplx, N + 1>, N> a{};
  for (std::size_t j = 0; j < n; ++j) {
    cplx wm = 1.0;
    for (std::size_t m = 0; m < n; ++m, wm *= w[j]) a[j][m] = wm;
    a[j][n] = g[j];
  }
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const cplx f = a[r][c] / a[c][c];
      for (std::size_t m = c; m <= n; ++m) a[r][m] -= f * a[c][m];
    }
  }
  std::array<cplx, N> x{};
  for (std::size_t c = n; c-- > 0;) {
    cplx v = a[c][n];
    for (std::size_t m = c + 1; m < n; ++m) v -= a[c][m] * x[m];
    x[c] = v / a[c][c];
  }
  return x;
}

struct TailPoints {
  std::array<std::size_t, 4> idx;
  std::array<cplx, 4> values(const SamplePlan& plan) const {
    std::array<cplx, 4> v{};
    for (std::size_t j = 0; j < 4; ++j) v[j] = plan[idx[j]];
    return v;
  }
};

TailPoints add_tail_points(SamplePlan& plan, double side, double R) {
  TailPoints t{};
  for (std::size_t j = 0; j < 4; ++j) t.idx[j] = plan.add(side * R * kTailRho[j]);
  return t;
}

struct TailModel {
  cplx value;
  double estimate;
};

// Tail integral from a four-term fit; the estimate is the change against
// the three-term fit through the samples closest to R.
template <class Kernel>
TailModel fit_tail(const std::array<cplx, 4>& samples, double side, double R, int p0, Kernel kernel) {
  std::array<cplx, 4> w{}, g{};
  for (std::size_t j = 0; j < 4; ++j) {
    const double z = side * R * kTailRho[j];
    w[j] = 1.0 / z;
    g[j] = samples[j] * std::pow(z, p0);
  }
  const auto c4 = vandermonde_solve(w, g, 4);
  const auto c3 = vandermonde_solve(w, g, 3);
  cplx t4 = 0.0, t3 = 0.0;
  for (int m = 0; m < 4; ++m) {
    const cplx kv = kernel(p0 + m);
    t4 += c4[m] * kv;
    if (m < 3) t3 += c3[m] * kv;
  }
  return {t4, std::abs(t4 - t3)};
}

// ∫_a^b dζ/(ζ - k); principal value when k is real and inside (a, b).
cplx log_term(double a, double b, cplx k) {
  if (k.imag() == 0.0) return std::log(std::abs(b - k.real())) - std::log(std::abs(a - k.real()));
  return std::log(b - k) - std::log(a - k);
}

const cplx kTwoPiI{0.0, 2.0 * kPi};

}  // namespace

QuadResult cauchy_line(const Sampler& f, cplx k, const QuadratureSpec& spec) {
  spec.validate();
  const double R = spec.truncation_radius;
  if (std::abs(k) >= 0.5 * R) throw InputError("cauchy_line: |k| must be below half the truncation radius");
  const double c = k.real();

  SamplePlan plan;
  std::vector<Node> nodes;
  add_panels(plan, nodes, graded_breakpoints(-R, c, true, spec), spec.nodes_per_panel);
  add_panels(plan, nodes, graded_breakpoints(c, R, false, spec), spec.nodes_per_panel);
  const auto ic = plan.add(c);
  const auto lt = add_tail_points(plan, -1.0, R);
  const auto rt = add_tail_points(plan, 1.0, R);
  plan.run(f);

  const cplx fc = plan[ic];
  cplx sum = 0.0;
  for (const auto& n : nodes) sum += n.w * (plan[n.idx] - fc) / (plan.x(n.idx) - k);
  sum += fc * log_term(-R, R, k);

  const auto tl = fit_tail(lt.values(plan), -1.0, R, 2, [&](int p) { return left_tail_kernel(k, R, p); });
  const auto tr = fit_tail(rt.values(plan), 1.0, R, 2, [&](int p) { return right_tail_kernel(k, R, p); });
  const cplx tail = tl.value + tr.value;
  const double est = tl.estimate + tr.estimate;
  return {sum + tail, tail, est, est <= spec.tail_tolerance};
}

QuadResult pv_cauchy(const Sampler& f, double pole, const QuadratureSpec& spec) {
  return cauchy_line(f, cplx(pole, 0.0), spec);
}

QuadResult cauchy_halfline(const Sampler& g, double endpoint, cplx k, const QuadratureSpec& spec) {
  spec.validate();
  const double R = spec.truncation_radius;
  if (!(endpoint > -0.5 * R && endpoint < 0.5 * R))
    throw InputError("cauchy_halfline: endpoint must lie inside half the truncation radius");
  if (k.imag() == 0.0 && k.real() <= endpoint) throw InputError("cauchy_halfline: evaluation point on the cut");
  if (std::abs(k) >= 0.5 * R) throw InputError("cauchy_halfline: |k| must be below half the truncation radius");

  const double c = std::clamp(k.real(), -R, endpoint);
  SamplePlan plan;
  std::vector<Node> nodes;
  if (c > -R && c < endpoint) {
    add_panels(plan, nodes, graded_breakpoints(-R, c, true, spec), spec.nodes_per_panel);
    add_panels(plan, nodes, graded_breakpoints(c, endpoint, false, spec), spec.nodes_per_panel);
  } else {
    add_panels(plan, nodes, graded_breakpoints(-R, endpoint, true, spec), spec.nodes_per_panel);
  }
  const auto ic = plan.add(c);
  const auto lt = add_tail_points(plan, -1.0, R);
  plan.run(g);

  const cplx gc = plan[ic];
  cplx sum = 0.0;
  for (const auto& n : nodes) sum += n.w * (plan[n.idx] - gc) / (plan.x(n.idx) - k);
  sum += gc * log_term(-R, endpoint, k);

  const auto tl = fit_tail(lt.values(plan), -1.0, R, 2, [&](int p) { return left_tail_kernel(k, R, p); });
  const cplx tail = tl.value;
  const double est = tl.estimate;
  return {(sum + tail) / kTwoPiI, tail / kTwoPiI, est / (2.0 * kPi), est / (2.0 * kPi) <= spec.tail_tolerance};
}

QuadResult stieltjes_log_integral(const Sampler& dg, double endpoint, cplx k, const QuadratureSpec& spec) {
  spec.validate();
  const double R = spec.truncation_radius;
  if (!(endpoint > -0.5 * R && endpoint < 0.5 * R))
    throw InputError("stieltjes_log_integral: endpoint must lie inside half the truncation radius");
  if (k.imag() == 0.0 && k.real() < endpoint)
    throw InputError("stieltjes_log_integral: evaluation point on the cut");
  if (std::abs(k) >= 0.5 * R)
    throw InputError("stieltjes_log_integral: |k| must be below half the truncation radius");

  SamplePlan plan;
  std::vector<Node> nodes;
  add_panels(plan, nodes, graded_breakpoints(-R, endpoint, true, spec), spec.nodes_per_panel);
  const auto ie = plan.add(endpoint);
  const auto lt = add_tail_points(plan, -1.0, R);
  plan.run(dg);

  // ln(k - ζ) (dg - dg(e)) is integrated by Gauss; the dg(e) part exactly.
  const cplx dge = plan[ie];
  auto antiderivative = [&](cplx u) { return u == 0.0 ? cplx(0.0) : u * std::log(u) - u; };
  const cplx exact = antiderivative(k + R) - antiderivative(k - endpoint);

  std::vector<Node> sorted = nodes;
  std::sort(sorted.begin(), sorted.end(), [&](const Node& a, const Node& b) { return plan.x(a.idx) < plan.x(b.idx); });
  cplx sum = 0.0;
  double prev_arg = 0.0;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    const cplx lk = std::log(k - plan.x(sorted[j].idx));
    if (j > 0 && std::abs(lk.imag() - prev_arg) >= kMaxPhaseStep)
      throw NumericalError("stieltjes_log_integral: branch of ln(k - ζ) jumps between nodes");
    prev_arg = lk.imag();
    sum += sorted[j].w * lk * (plan[sorted[j].idx] - dge);
  }
  sum += dge * exact;

  // dg decays like ζ^{-3} beyond the truncation radius
  const auto tl = fit_tail(lt.values(plan), -1.0, R, 3, [&](int p) { return left_log_tail_kernel(k, R, p); });
  const cplx tail = tl.value;
  const double est = tl.estimate / (2.0 * kPi);
  return {-(sum + tail) / kTwoPiI, -tail / kTwoPiI, est, est <= spec.tail_tolerance};
}

QuadResult stieltjes_log_endpoint(const Sampler& g, double endpoint, const QuadratureSpec& spec) {
  spec.validate();
  const double R = spec.truncation_radius;
  if (!(endpoint > -0.5 * R && endpoint < 0.5 * R))
    throw InputError("stieltjes_log_endpoint: endpoint must lie inside half the truncation radius");

  SamplePlan plan;
  std::vector<Node> nodes;
  add_panels(plan, nodes, graded_breakpoints(-R, endpoint, true, spec), spec.nodes_per_panel);
  const auto ie = plan.add(endpoint);
  const auto lt = add_tail_points(plan, -1.0, R);
  plan.run(g);

  // -∫ ln(e - ζ) dg = ∫_{-R}^{e} (g - g(e))/(ζ - e) dζ - g(e) ln(R + e) + ∫_{-∞}^{-R} g/(ζ - e) dζ
  const cplx ge = plan[ie];
  cplx sum = 0.0;
  for (const auto& n : nodes) sum += n.w * (plan[n.idx] - ge) / (plan.x(n.idx) - endpoint);
  sum -= ge * std::log(R + endpoint);

  const cplx e(endpoint, 0.0);
  const auto tl = fit_tail(lt.values(plan), -1.0, R, 2, [&](int p) { return left_tail_kernel(e, R, p); });
  const double est = tl.estimate / (2.0 * kPi);
  return {(sum + tl.value) / kTwoPiI, tl.value / kTwoPiI, est, est <= spec.tail_tolerance};
}

}  // namespace nnls
