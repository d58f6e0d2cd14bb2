#include "nnls/scattering.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace nnls {

namespace {

const double kGaussLo = 0.5 - std::sqrt(3.0) / 6.0;
const double kGaussHi = 0.5 + std::sqrt(3.0) / 6.0;
const cplx kTwoPiI{0.0, 2.0 * kPi};

Mat2 gen(cplx k, cplx q, cplx r) {
  Mat2 b;
  b << -kI * k, q, r, kI * k;
  return b;
}

bool finite(const Mat2& m) {
  for (int i = 0; i < 4; ++i)
    if (!std::isfinite(m(i).real()) || !std::isfinite(m(i).imag())) return false;
  return true;
}

cplx det2(const Vec2& u, const Vec2& w) { return u(0) * w(1) - u(1) * w(0); }

}  // namespace

// ---------------------------------------------------------------------------
// JostSolver

JostSolver::JostSolver(const InitialProfile& profile, int substeps, double max_phase_step)
    : profile_(profile), base_substeps_(substeps), max_phase_step_(max_phase_step) {
  if (substeps < 1) throw InputError("jost: substeps must be >= 1");
  if (!(max_phase_step > 0.0)) throw InputError("jost: max_phase_step must be > 0");
}

int JostSolver::substeps_for(cplx k) const {
  const double need = std::ceil(std::abs(k) * profile_.grid_step() / max_phase_step_);
  return std::max(base_substeps_, static_cast<int>(std::min(need, 1e6)));
}

std::shared_ptr<const JostSolver::Table> JostSolver::table(int m) const {
  {
    std::lock_guard lock(mu_);
    auto it = tables_.find(m);
    if (it != tables_.end()) return it->second;
  }
  auto t = std::make_shared<Table>();
  const std::size_t half = profile_.centre();
  const auto mm = static_cast<std::size_t>(m);
  t->step = profile_.grid_step() / static_cast<double>(m);
  t->centre = half * mm;
  t->cells.resize(2 * t->centre);
  // Left sub-cells are built from x = -N; right sub-cells are their exact
  // mirror images so the discrete scheme keeps the x -> -x symmetry.
  for (std::size_t i = 0; i < t->centre; ++i) {
    const double x_lo = profile_.x_at(i / mm) + t->step * static_cast<double>(i % mm);
    const double g_lo = x_lo + kGaussLo * t->step;
    const double g_hi = x_lo + kGaussHi * t->step;
    const cplx q_lo = profile_.value(g_lo), q_lo_m = profile_.value(-g_lo);
    const cplx q_hi = profile_.value(g_hi), q_hi_m = profile_.value(-g_hi);
    t->cells[i] = {q_lo, -std::conj(q_lo_m), q_hi, -std::conj(q_hi_m)};
    // mirror cell: lower Gauss point at -g_hi, upper at -g_lo
    t->cells[2 * t->centre - 1 - i] = {q_hi_m, -std::conj(q_hi), q_lo_m, -std::conj(q_lo)};
  }
  std::lock_guard lock(mu_);
  return tables_.emplace(m, std::move(t)).first->second;
}

Mat2 JostSolver::propagator(const Cell& c, double step, cplx k, bool backward) {
  const double h = backward ? -step : step;
  const Mat2 lo = gen(k, c.q_lo, c.r_lo);
  const Mat2 hi = gen(k, c.q_hi, c.r_hi);
  const Mat2& b1 = backward ? hi : lo;
  const Mat2& b2 = backward ? lo : hi;
  const Mat2 omega = (0.5 * h) * (b1 + b2) + (std::sqrt(3.0) / 12.0 * h * h) * (b2 * b1 - b1 * b2);
  return expm2(omega);
}

Mat2 JostSolver::solve(double k, Side side) const {
  if (k == 0.0 || !std::isfinite(k)) throw InputError("jost: k must be real and nonzero");
  const cplx ck(k, 0.0);
  const auto t = table(substeps_for(ck));
  const double A = amplitude();
  const cplx ph = std::exp(kI * ck * t->step);
  Mat2 psi;
  if (side == Side::Left) {
    psi = n_minus(A, ck);
    for (std::size_t i = 0; i < t->centre; ++i) {
      psi = propagator(t->cells[i], t->step, ck, false) * psi;
      psi.col(0) *= ph;
      psi.col(1) /= ph;
    }
  } else {
    psi = n_plus(A, ck);
    for (std::size_t i = t->cells.size(); i-- > t->centre;) {
      psi = propagator(t->cells[i], t->step, ck, true) * psi;
      psi.col(0) /= ph;
      psi.col(1) *= ph;
    }
  }
  if (!finite(psi)) throw NumericalError("jost: overflow in the Jost integration");
  return psi;
}

Vec2 JostSolver::trusted_column(cplx k, Side side) const {
  if (k == 0.0) throw InputError("jost: k must be nonzero");
  if (k.imag() < 0.0) throw InputError("jost: trusted columns are defined for Im k >= 0");
  const auto t = table(substeps_for(k));
  const double A = amplitude();
  const cplx ph = std::exp(kI * k * t->step);
  Vec2 col;
  if (side == Side::Left) {
    col = n_minus(A, k).col(0);
    for (std::size_t i = 0; i < t->centre; ++i) col = (propagator(t->cells[i], t->step, k, false) * col) * ph;
  } else {
    col = n_plus(A, k).col(1);
    for (std::size_t i = t->cells.size(); i-- > t->centre;)
      col = (propagator(t->cells[i], t->step, k, true) * col) * ph;
  }
  if (!std::isfinite(std::abs(col(0))) || !std::isfinite(std::abs(col(1))))
    throw NumericalError("jost: overflow in the Jost integration");
  return col;
}

Mat2 JostSolver::scattering_matrix(double k) const {
  const Mat2 p1 = solve(k, Side::Left);
  const Mat2 p2 = solve(k, Side::Right);
  const cplx d = p2(0, 0) * p2(1, 1) - p2(0, 1) * p2(1, 0);
  Mat2 inv;
  inv << p2(1, 1), -p2(0, 1), -p2(1, 0), p2(0, 0);
  return (inv / d) * p1;
}

cplx JostSolver::a1_det(cplx k) const {
  return det2(trusted_column(k, Side::Left), trusted_column(k, Side::Right));
}

JostSolver::SmallK JostSolver::small_k() const {
  const auto t = table(base_substeps_);
  const auto m = static_cast<std::size_t>(base_substeps_);
  const std::size_t nodes = profile_.size();
  SmallK out;
  out.x.resize(nodes);
  out.v1.resize(nodes);
  out.v2.resize(nodes);
  for (std::size_t j = 0; j < nodes; ++j) out.x[j] = profile_.x_at(j);
  out.x[profile_.centre()] = 0.0;
  Vec2 v(0.0, -kI * amplitude() / 2.0);
  out.v1[0] = v(0);
  out.v2[0] = v(1);
  for (std::size_t i = 0; i < t->cells.size(); ++i) {
    v = propagator(t->cells[i], t->step, 0.0, false) * v;
    if ((i + 1) % m == 0) {
      out.v1[(i + 1) / m] = v(0);
      out.v2[(i + 1) / m] = v(1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral sources

std::vector<SpectralPoint> SpectralSource::at_many(std::span<const double> ks) const {
  std::vector<SpectralPoint> out(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) out[i] = at(ks[i]);
  return out;
}

namespace {
SpectralPoint from_matrix(const Mat2& s) { return {s(0, 0), s(1, 1), s(1, 0), s(0, 1)}; }
}  // namespace

ProfileSource::ProfileSource(InitialProfile profile, int substeps)
    : profile_(std::move(profile)), solver_(profile_, substeps) {}

SpectralPoint ProfileSource::at(double k) const {
  {
    std::lock_guard lock(mu_);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
  }
  const SpectralPoint p = from_matrix(solver_.scattering_matrix(k));
  std::lock_guard lock(mu_);
  cache_.emplace(k, p);
  return p;
}

std::vector<SpectralPoint> ProfileSource::at_many(std::span<const double> ks) const {
  std::vector<double> missing;
  {
    std::lock_guard lock(mu_);
    for (double k : ks)
      if (!cache_.count(k)) missing.push_back(k);
  }
  std::sort(missing.begin(), missing.end());
  missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
  std::vector<SpectralPoint> fresh(missing.size());
  parallel_for(missing.size(), [&](std::size_t i) { fresh[i] = from_matrix(solver_.scattering_matrix(missing[i])); });
  std::vector<SpectralPoint> out(ks.size());
  std::lock_guard lock(mu_);
  for (std::size_t i = 0; i < missing.size(); ++i) cache_.emplace(missing[i], fresh[i]);
  for (std::size_t i = 0; i < ks.size(); ++i) out[i] = cache_.at(ks[i]);
  return out;
}

cplx ProfileSource::a1_imag_axis(double kappa) const {
  if (!(kappa > 0.0)) throw InputError("a1_imag_axis: kappa must be > 0");
  return solver_.a1_det(cplx(0.0, kappa));
}

cplx ProfileSource::norming(double k1) const { return gamma1_norming(profile_, k1); }

double ProfileSource::small_k_invariant() const {
  const auto sk = solver_.small_k();
  const std::size_t c = sk.x.size() / 2;
  return std::norm(sk.v2[c]) - std::norm(sk.v1[c]);
}

std::string ProfileSource::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "profile:" << profile_.name() << ':' << profile_.amplitude() << ':' << profile_.support_radius() << ':'
     << profile_.grid_step();
  std::uint64_t h = fnv1a(os.str());
  for (const auto& v : profile_.samples()) {
    const double parts[2] = {v.real(), v.imag()};
    h = fnv1a(std::string_view(reinterpret_cast<const char*>(parts), sizeof(parts)), h);
  }
  return "profile:" + profile_.name() + ":" + hex64(h);
}

PureStepSource::PureStepSource(double A) : A_(A) {
  if (!(A > 0.0)) throw InputError("pure step: A must be > 0");
}

SpectralPoint PureStepSource::at(double k) const {
  if (k == 0.0) throw InputError("pure step: k must be nonzero");
  const cplx c = A_ / (2.0 * kI * k);
  return {1.0 + A_ * A_ / (4.0 * k * k), 1.0, c, -c};
}

cplx PureStepSource::a1_imag_axis(double kappa) const { return 1.0 - A_ * A_ / (4.0 * kappa * kappa); }

cplx PureStepSource::norming(double k1) const {
  const cplx k(0.0, k1);
  const Vec2 u = n_minus(A_, k).col(0);
  const Vec2 w = n_plus(A_, k).col(1);
  return w.dot(u) / w.squaredNorm();
}

std::string PureStepSource::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "pure_step_exact:" << A_;
  return os.str();
}

ReflectionlessSource::ReflectionlessSource(double A, double phi1) : A_(A), phi1_(phi1) {
  if (!(A > 0.0)) throw InputError("reflectionless: A must be > 0");
}

SpectralPoint ReflectionlessSource::at(double k) const {
  if (k == 0.0) throw InputError("reflectionless: k must be nonzero");
  const cplx kk(k, 0.0);
  const cplx z = kI * (A_ / 2.0);
  return {(kk - z) / kk, kk / (kk - z), 0.0, 0.0};
}

cplx ReflectionlessSource::a1_imag_axis(double kappa) const { return (kappa - A_ / 2.0) / kappa; }

std::string ReflectionlessSource::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "reflectionless:" << A_ << ':' << phi1_;
  return os.str();
}

// ---------------------------------------------------------------------------
// Small-k system

std::string to_string(CaseTag c) { return c == CaseTag::CaseI ? "CaseI" : "CaseII"; }

std::vector<cplx> SmallKVectors::conserved() const {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = v2[j] * std::conj(v2[n - 1 - j]) - v1[j] * std::conj(v1[n - 1 - j]);
  return out;
}

SmallKVectors small_k_limit(const InitialProfile& profile) {
  auto sk = JostSolver(profile).small_k();
  return {std::move(sk.x), std::move(sk.v1), std::move(sk.v2)};
}

// ---------------------------------------------------------------------------
// Grid and small-k extrapolation

void ScatteringOptions::validate() const {
  quad.validate();
  if (!(k_min > 0.0)) throw InputError("scatter: k_min must be > 0");
  if (!(k_max > k_min)) throw InputError("scatter: k_max must exceed k_min");
  if (nodes_per_sign < 4) throw InputError("scatter: nodes_per_sign must be >= 4");
  if (!(case_eps_factor > 0.0)) throw InputError("scatter: case_eps_factor must be > 0");
  if (!(k1_tolerance > 0.0)) throw InputError("scatter: k1_tolerance must be > 0");
}

std::vector<double> default_k_grid(const ScatteringOptions& opt) {
  opt.validate();
  const std::size_t n = opt.nodes_per_sign;
  std::vector<double> pos(n);
  const double ratio = std::log(opt.k_max / opt.k_min);
  for (std::size_t j = 0; j < n; ++j)
    pos[j] = opt.k_min * std::exp(ratio * static_cast<double>(j) / static_cast<double>(n - 1));
  pos.back() = opt.k_max;
  std::vector<double> grid;
  grid.reserve(2 * n);
  for (std::size_t j = n; j-- > 0;) grid.push_back(-pos[j]);
  for (double k : pos) grid.push_back(k);
  return grid;
}

namespace {

std::size_t index_of(std::span<const double> grid, double k) {
  auto it = std::lower_bound(grid.begin(), grid.end(), k);
  if (it == grid.end() || *it != k) throw InputError("k-grid must be symmetric about 0");
  return static_cast<std::size_t>(it - grid.begin());
}

void check_grid(std::span<const double> grid) {
  if (grid.size() < 4) throw InputError("k-grid needs at least 4 nodes");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] == 0.0 || !std::isfinite(grid[i])) throw InputError("k-grid must exclude 0");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("k-grid must be strictly ascending");
  }
}

}  // namespace

SmallKLimits small_k_limits(std::span<const double> grid, std::span<const cplx> a1, std::span<const cplx> a2,
                            std::span<const cplx> b) {
  check_grid(grid);
  auto first_pos = std::upper_bound(grid.begin(), grid.end(), 0.0);
  if (std::distance(first_pos, grid.end()) < 2) throw InputError("k-grid needs two positive nodes");
  const std::size_t p1 = static_cast<std::size_t>(first_pos - grid.begin()), p2 = p1 + 1;
  const double k1 = grid[p1], k2 = grid[p2];
  const std::size_t m1 = index_of(grid, -k1), m2 = index_of(grid, -k2);

  auto extrapolate = [&](auto f) {
    const cplx e1 = 0.5 * (f(p1) + f(m1));
    const cplx e2 = 0.5 * (f(p2) + f(m2));
    return (e1 * k2 * k2 - e2 * k1 * k1) / (k2 * k2 - k1 * k1);
  };
  SmallKLimits s;
  s.a2_at_0 = extrapolate([&](std::size_t i) { return a2[i]; });
  s.a11 = extrapolate([&](std::size_t i) { return grid[i] * a1[i]; });
  s.da2_at_0 = extrapolate([&](std::size_t i) { return a2[i] / grid[i]; });
  s.b0 = extrapolate([&](std::size_t i) { return b[i]; });
  s.k2a1_at_0 = extrapolate([&](std::size_t i) { return grid[i] * grid[i] * a1[i]; });
  return s;
}

// ---------------------------------------------------------------------------
// Pipeline

std::string SpectralData::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << (source ? source->fingerprint() : "none") << "|grid:" << k_grid.size();
  if (!k_grid.empty()) os << ':' << k_grid.front() << ':' << k_grid.back();
  os << "|quad:" << quad.truncation_radius << ':' << quad.panel_count << ':' << quad.grading_ratio << ':'
     << quad.nodes_per_panel;
  return hex64(fnv1a(os.str()));
}

CaseTag classify_case(const SpectralData& sd, double eps_case) {
  if (!sd.source) throw InputError("classify_case: spectral data has no source");
  const SmallKLimits lim = small_k_limits(sd.k_grid, sd.a1, sd.a2, sd.b);
  const bool by_a2 = std::abs(lim.a2_at_0) < eps_case;
  const double inv = sd.source->small_k_invariant();
  const double a2_from_v = 4.0 * inv / (sd.A * sd.A);
  const bool by_v = std::abs(a2_from_v) < eps_case;
  if (by_a2 != by_v) {
    std::ostringstream os;
    os << "classify_case: criteria disagree, |a2(0)| = " << std::abs(lim.a2_at_0)
       << " but 4(|v2(0)|^2-|v1(0)|^2)/A^2 = " << a2_from_v << " (eps_case = " << eps_case << ")";
    throw ValidationError(os.str());
  }
  return by_a2 ? CaseTag::CaseII : CaseTag::CaseI;
}

Sampler trace_log_sampler(const SpectralData& sd) {
  const bool case1 = sd.case_tag == CaseTag::CaseI;
  cplx limit0;
  if (case1) {
    const cplx a20 = sd.a2_at_0.value_or(cplx(0.0));
    limit0 = sd.A * sd.A / 4.0 * a20 * a20;
  } else {
    limit0 = 1.0 - std::norm(sd.b0);
  }
  auto src = sd.source;
  return [src, case1, limit0](std::span<const double> xs) {
    std::vector<double> ks;
    for (double x : xs)
      if (x != 0.0) ks.push_back(x);
    const auto pts = src->at_many(ks);
    std::vector<cplx> vals(xs.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (xs[i] == 0.0) {
        vals[i] = limit0;
        continue;
      }
      const auto& p = pts[j++];
      cplx f = 1.0 + p.s12 * p.b;  // 1 - b(k) conj(b(-k))
      if (case1) f *= xs[i] * xs[i] / (xs[i] * xs[i] + 1.0);
      vals[i] = f;
    }
    return unwrap_log(vals);
  };
}

double compute_k1(const SpectralData& sd) {
  if (!sd.source) throw InputError("compute_k1: spectral data has no source");
  const QuadResult pv = pv_cauchy(trace_log_sampler(sd), 0.0, sd.quad);
  if (!pv.converged) throw NumericalError("compute_k1: principal-value tail did not converge");
  const cplx x = pv.value / kTwoPiI;
  double k1;
  if (sd.case_tag == CaseTag::CaseI) {
    const cplx v = sd.A / 2.0 * std::exp(-x);
    if (std::abs(v.imag()) > 1e-6 * std::abs(v)) throw NumericalError("compute_k1: formula gives a non-real k1");
    k1 = v.real();
  } else {
    const double e2sq = 1.0 - std::norm(sd.b0);
    if (!(e2sq > 0.0)) throw NumericalError("compute_k1: 1 - |b(0)|^2 must be positive");
    const cplx e1c = std::exp(x);
    if (std::abs(e1c.imag()) > 1e-6 * std::abs(e1c)) throw NumericalError("compute_k1: E1 is not real");
    const double e1 = e1c.real(), e2 = std::sqrt(e2sq);
    const double rb = sd.b0.real();
    k1 = sd.A * (std::sqrt(rb * rb + e2sq) - rb) / (2.0 * e1 * e2);
  }
  if (!(k1 > 0.0) || !std::isfinite(k1)) throw NumericalError("compute_k1: k1 must be positive");
  return k1;
}

double k1_root_search(const SpectralSource& src, double guess) {
  if (!(guess > 0.0)) throw InputError("k1_root_search: guess must be > 0");
  auto f = [&](double kappa) { return src.a1_imag_axis(kappa).real(); };
  double lo = guess * 0.95, hi = guess * 1.05;
  double flo = f(lo), fhi = f(hi);
  for (int i = 0; i < 40 && flo * fhi > 0.0; ++i) {
    if (i % 2 == 0) {
      lo *= 0.7;
      flo = f(lo);
    } else {
      hi *= 1.4;
      fhi = f(hi);
    }
  }
  if (flo * fhi > 0.0) throw NumericalError("k1_root_search: no sign change of a1 on the imaginary axis");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

namespace {

// ln F at a real point on the branch that is continuous from -infinity.
cplx branch_log_at(const SpectralData& sd, double k) {
  const Sampler f = trace_log_sampler(sd);
  const double R = sd.quad.truncation_radius;
  std::vector<double> xs;
  const int n = 4000;
  for (int i = 0; i <= n; ++i) xs.push_back(-R + (k + R) * static_cast<double>(i) / n);
  xs.back() = k;
  return f(xs).back();
}

}  // namespace

cplx trace_eval(const SpectralData& sd, cplx k, TraceWhich which) {
  if (k == 0.0) throw InputError("trace_eval: k must be nonzero");
  if (which == TraceWhich::A1 && k.imag() < 0.0) throw InputError("trace_eval: a1 is defined for Im k >= 0");
  if (which == TraceWhich::A2 && k.imag() > 0.0) throw InputError("trace_eval: a2 is defined for Im k <= 0");
  const QuadResult q = cauchy_line(trace_log_sampler(sd), k, sd.quad);
  cplx x = q.value / kTwoPiI;
  if (k.imag() == 0.0) {
    const cplx half = 0.5 * branch_log_at(sd, k.real());
    x += which == TraceWhich::A1 ? half : -half;
  }
  const cplx ik1(0.0, sd.k1);
  if (sd.case_tag == CaseTag::CaseI) {
    if (which == TraceWhich::A1) return (k - ik1) * (k + kI) / (k * k) * std::exp(x);
    return (k - kI) / (k - ik1) * std::exp(-x);
  }
  if (which == TraceWhich::A1) return (k - ik1) / k * std::exp(x);
  return k / (k - ik1) * std::exp(-x);
}

cplx trace_da1_at_ik1(const SpectralData& sd) {
  const cplx ik1(0.0, sd.k1);
  const QuadResult q = cauchy_line(trace_log_sampler(sd), ik1, sd.quad);
  const cplx x = q.value / kTwoPiI;
  if (sd.case_tag == CaseTag::CaseI) return (ik1 + kI) / (ik1 * ik1) * std::exp(x);
  return std::exp(x) / ik1;
}

ReflectionCoeffs reflection_coeffs(const SpectralPoint& p) {
  if (p.a1 == 0.0 || p.a2 == 0.0) throw NumericalError("reflection_coeffs: a1 or a2 vanishes at the node");
  const cplx r1 = p.b / p.a1;
  const cplx r2 = -p.s12 / p.a2;
  return {r1, r2, 1.0 + r1 * r2};
}

ReflectionCoeffs reflection_coeffs(const SpectralData& sd, double k) {
  if (k == 0.0) throw InputError("reflection_coeffs: k must be nonzero");
  if (!sd.source) throw InputError("reflection_coeffs: spectral data has no source");
  return reflection_coeffs(sd.source->at(k));
}

cplx gamma1_norming(const InitialProfile& profile, double k1) {
  if (!(k1 > 0.0)) throw InputError("gamma1_norming: k1 must be > 0");
  const JostSolver solver(profile);
  const cplx k(0.0, k1);
  const Vec2 u = solver.trusted_column(k, Side::Left);
  const Vec2 w = solver.trusted_column(k, Side::Right);
  const cplx g = w.dot(u) / w.squaredNorm();
  const double mismatch = (u - g * w).norm() / u.norm();
  if (mismatch > 1e-4) {
    std::ostringstream os;
    os << "gamma1_norming: columns are not proportional at ik1 (relative mismatch " << mismatch << ")";
    throw NumericalError(os.str());
  }
  return g;
}

SpectralData scattering_data(std::shared_ptr<const SpectralSource> source, std::span<const double> k_grid,
                             const ScatteringOptions& opt) {
  opt.validate();
  if (!source) throw InputError("scattering_data: no spectral source");
  check_grid(k_grid);
  SpectralData sd;
  sd.A = source->amplitude();
  sd.k_grid.assign(k_grid.begin(), k_grid.end());
  sd.source = source;
  sd.quad = opt.quad;
  const auto pts = source->at_many(sd.k_grid);
  sd.a1.resize(pts.size());
  sd.a2.resize(pts.size());
  sd.b.resize(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    sd.a1[i] = pts[i].a1;
    sd.a2[i] = pts[i].a2;
    sd.b[i] = pts[i].b;
  }
  const SmallKLimits lim = small_k_limits(sd.k_grid, sd.a1, sd.a2, sd.b);
  sd.case_tag = classify_case(sd, opt.case_eps_factor * std::max(1.0, sd.A));
  sd.b0 = lim.b0;
  if (sd.case_tag == CaseTag::CaseI) {
    sd.a2_at_0 = lim.a2_at_0;
  } else {
    sd.a11 = lim.a11;
    sd.da2_at_0 = lim.da2_at_0;
  }
  sd.k1 = compute_k1(sd);
  sd.k1_root = k1_root_search(*source, sd.k1);
  if (std::abs(sd.k1 - sd.k1_root) > opt.k1_tolerance) {
    std::ostringstream os;
    os.precision(12);
    os << "compute_k1: formula gives " << sd.k1 << " but the root of a1 is at " << sd.k1_root;
    throw ValidationError(os.str());
  }
  sd.gamma1 = source->norming(sd.k1);
  sd.da1_at_ik1 = trace_da1_at_ik1(sd);
  return sd;
}

SpectralData scattering_data(const InitialProfile& profile, const ScatteringOptions& opt) {
  auto src = std::make_shared<ProfileSource>(profile);
  return scattering_data(src, default_k_grid(opt), opt);
}

// ---------------------------------------------------------------------------
// Validation and output

bool ValidationReport::all_pass() const { return failures() == 0; }

std::size_t ValidationReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const Check& c) { return !c.pass; }));
}

ValidationReport validate_spectral(const SpectralData& sd, const SmallKVectors* vv) {
  ValidationReport rep;
  auto add = [&](std::string name, double value, double tol) { rep.checks.push_back({std::move(name), value, tol, value < tol}); };
  const std::size_t n = sd.k_grid.size();
  double det_err = 0.0, sym1 = 0.0, sym2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = n - 1 - i;
    if (sd.k_grid[m] != -sd.k_grid[i]) throw InputError("validate: k-grid must be symmetric about 0");
    const cplx ab = sd.a1[i] * sd.a2[i];
    const cplx bb = sd.b[i] * std::conj(sd.b[m]);
    const double scale = std::max({1.0, std::abs(ab), std::abs(bb)});
    det_err = std::max(det_err, std::abs(ab + bb - 1.0) / scale);
    sym1 = std::max(sym1, std::abs(std::conj(sd.a1[m]) - sd.a1[i]) / std::max(1.0, std::abs(sd.a1[i])));
    sym2 = std::max(sym2, std::abs(std::conj(sd.a2[m]) - sd.a2[i]) / std::max(1.0, std::abs(sd.a2[i])));
  }
  add("det relation a1 a2 + b conj(b(-k)) = 1", det_err, 1e-8);
  add("symmetry conj(a1(-k)) = a1(k)", sym1, 1e-8);
  add("symmetry conj(a2(-k)) = a2(k)", sym2, 1e-8);
  add("k1 formula vs root search", std::abs(sd.k1 - sd.k1_root), 1e-6);
  add("| |gamma1| - 1 |", std::abs(std::abs(sd.gamma1) - 1.0), 1e-6);
  const SmallKLimits lim = small_k_limits(sd.k_grid, sd.a1, sd.a2, sd.b);
  if (sd.case_tag == CaseTag::CaseI) {
    const cplx target = sd.A * sd.A * lim.a2_at_0 / 4.0;
    add("small-k law k^2 a1 -> A^2 a2(0)/4 (relative)", std::abs(lim.k2a1_at_0 - target) / std::abs(target), 1e-3);
  } else {
    const cplx a11 = sd.a11.value_or(0.0);
    add("a11 purely imaginary (relative real part)", std::abs(a11.real()) / std::max(1e-300, std::abs(a11)), 1e-6);
    add("Im a11 < 0", a11.imag() < 0.0 ? 0.0 : 1.0, 0.5);
  }
  if (vv) {
    const auto c = vv->conserved();
    double lo_re = c[0].real(), hi_re = lo_re, lo_im = c[0].imag(), hi_im = lo_im;
    for (const auto& v : c) {
      lo_re = std::min(lo_re, v.real());
      hi_re = std::max(hi_re, v.real());
      lo_im = std::min(lo_im, v.imag());
      hi_im = std::max(hi_im, v.imag());
    }
    add("small-k conserved combination spread / A^2", std::hypot(hi_re - lo_re, hi_im - lo_im) / (sd.A * sd.A), 1e-8);
  }
  return rep;
}

void write_spectral_csv(const SpectralData& sd, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << header_comment;
  out << "k,Re a1,Im a1,Re a2,Im a2,Re b,Im b\n";
  char buf[512];
  for (std::size_t i = 0; i < sd.k_grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", sd.k_grid[i], sd.a1[i].real(),
                  sd.a1[i].imag(), sd.a2[i].real(), sd.a2[i].imag(), sd.b[i].real(), sd.b[i].imag());
    out << buf;
  }
}

namespace {
nlohmann::json cjson(cplx v) { return nlohmann::json::array({v.real(), v.imag()}); }
template <class T>
nlohmann::json opt_json(const std::optional<T>& v) {
  return v ? cjson(*v) : nlohmann::json(nullptr);
}
}  // namespace

nlohmann::json spectral_sidecar(const SpectralData& sd) {
  nlohmann::json j;
  j["amplitude"] = sd.A;
  j["k1"] = sd.k1;
  j["k1_root_search"] = sd.k1_root;
  j["gamma1"] = cjson(sd.gamma1);
  j["case_tag"] = to_string(sd.case_tag);
  j["a11"] = opt_json(sd.a11);
  j["a2_at_0"] = opt_json(sd.a2_at_0);
  j["da2_at_0"] = opt_json(sd.da2_at_0);
  j["da1_at_ik1"] = cjson(sd.da1_at_ik1);
  j["b0"] = cjson(sd.b0);
  j["grid_nodes"] = sd.k_grid.size();
  j["source"] = sd.source ? sd.source->fingerprint() : "";
  return j;
}

}  // namespace nnls
