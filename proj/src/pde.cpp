#include "nnls/pde.hpp"

#include "nnls/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nnls {

FieldState::FieldState(double half_width, std::size_t n_points, double amplitude, std::vector<cplx> q, double t)
    : L_(half_width), h_(0.0), A_(amplitude), q_(std::move(q)), t_(t) {
  if (!(L_ > 0.0)) throw InputError("field: half-width L must be > 0");
  if (n_points < 3 || n_points % 2 == 0) throw InputError("field: n_points must be odd and >= 3");
  if (q_.size() != n_points) throw InputError("field: sample count does not match n_points");
  if (!(A_ >= 0.0)) throw InputError("field: amplitude must be >= 0");
  h_ = 2.0 * L_ / static_cast<double>(n_points - 1);
  q_.front() = 0.0;
  q_.back() = A_;
}

FieldState FieldState::from_function(double L, std::size_t n, double A, const std::function<cplx(double)>& f,
                                     double t) {
  if (n < 3 || n % 2 == 0) throw InputError("field: n_points must be odd and >= 3");
  std::vector<cplx> q(n);
  const double h = 2.0 * L / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < n; ++j) q[j] = f(-L + h * static_cast<double>(j));
  return FieldState(L, n, A, std::move(q), t);
}

FieldState FieldState::from_step(double L, double h, double A, const std::function<cplx(double)>& f, double t) {
  if (!(h > 0.0)) throw InputError("field: grid step must be > 0");
  const double cells = L / h;
  const double r = std::round(cells);
  if (r < 1.0 || std::abs(cells - r) > 1e-9 * cells) throw InputError("field: grid step must divide L");
  return from_function(L, 2 * static_cast<std::size_t>(r) + 1, A, f, t);
}

bool FieldState::same_grid(const FieldState& o) const {
  return q_.size() == o.q_.size() && L_ == o.L_ && A_ == o.A_;
}

void EvolveConfig::validate(double h) const {
  if (!(dt > 0.0)) throw InputError("evolve: dt must be > 0");
  if (!(c_cfl > 0.0)) throw InputError("evolve: stability constant must be > 0");
  if (dt > c_cfl * h * h) {
    std::ostringstream os;
    os << "evolve: CFL violation, dt = " << dt << " exceeds c_cfl*h^2 = " << c_cfl * h * h;
    throw InputError(os.str());
  }
  for (double t : snapshot_times)
    if (t < 0.0 || t > dt * static_cast<double>(steps) + 0.5 * dt)
      throw InputError("evolve: snapshot time outside the evolution interval");
  if (!(validity_margin >= 0.0)) throw InputError("evolve: validity_margin must be >= 0");
}

std::vector<cplx> mirror(const FieldState& s) {
  const auto q = s.q();
  std::vector<cplx> m(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) m[j] = std::conj(q[q.size() - 1 - j]);
  return m;
}

namespace {

void rhs_into(std::span<const cplx> q, double h, std::span<cplx> out) {
  const std::size_t n = q.size();
  const double inv_h2 = 1.0 / (h * h);
  out[0] = 0.0;
  out[n - 1] = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    const cplx lap = (q[j + 1] - 2.0 * q[j] + q[j - 1]) * inv_h2;
    const cplx nl = 2.0 * q[j] * q[j] * std::conj(q[n - 1 - j]);
    out[j] = kI * (lap + nl);
  }
}

double sup_norm(std::span<const cplx> q) {
  double m = 0.0;
  for (const auto& v : q) {
    const double a = std::abs(v);
    if (std::isnan(a)) return a;
    m = std::max(m, a);
  }
  return m;
}

}  // namespace

std::vector<cplx> rhs(const FieldState& s) {
  std::vector<cplx> out(s.size());
  rhs_into(s.q(), s.h(), out);
  return out;
}

double trusted_half_width(const FieldState& s, double margin) {
  return std::max(0.0, s.half_width() - margin * std::sqrt(std::max(0.0, s.t())));
}

EvolveResult evolve(const FieldState& initial, const EvolveConfig& cfg) {
  cfg.validate(initial.h());
  const std::size_t n = initial.size();
  const double dt = cfg.dt;
  const double h = initial.h();

  std::vector<std::pair<std::size_t, double>> wanted;  // (step index, requested time)
  for (double t : cfg.snapshot_times)
    wanted.emplace_back(static_cast<std::size_t>(std::llround((t - initial.t()) / dt)), t);
  std::stable_sort(wanted.begin(), wanted.end());

  EvolveResult res;
  FieldState state = initial;
  std::vector<cplx> k1(n), k2(n), k3(n), k4(n), tmp(n);
  const double limit = cfg.blowup_factor * std::max(1.0, initial.amplitude());
  std::size_t next = 0;

  auto take_snapshots = [&](std::size_t step) {
    while (next < wanted.size() && wanted[next].first == step) {
      res.snapshots.push_back({state, trusted_half_width(state, cfg.validity_margin)});
      ++next;
    }
  };

  take_snapshots(0);
  for (std::size_t step = 1; step <= cfg.steps; ++step) {
    auto q = state.q_mut();
    rhs_into(q, h, k1);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = q[j] + 0.5 * dt * k1[j];
    rhs_into(tmp, h, k2);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = q[j] + 0.5 * dt * k2[j];
    rhs_into(tmp, h, k3);
    for (std::size_t j = 0; j < n; ++j) tmp[j] = q[j] + dt * k3[j];
    rhs_into(tmp, h, k4);
    for (std::size_t j = 1; j + 1 < n; ++j) q[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    state.set_t(initial.t() + dt * static_cast<double>(step));
    res.steps_taken = step;

    const double sup = sup_norm(q);
    if (!(sup <= limit)) {
      res.blow_up = BlowUp{state.t(), sup};
      break;
    }
    take_snapshots(step);
    if (next == wanted.size() && step >= cfg.steps) break;
  }
  return res;
}

RaySeries ray_sample(std::span<const Snapshot> snapshots, double xi, std::span<const double> times) {
  RaySeries out;
  for (double t : times) {
    const Snapshot* best = nullptr;
    for (const auto& s : snapshots)
      if (!best || std::abs(s.state.t() - t) < std::abs(best->state.t() - t)) best = &s;
    if (!best) {
      out.truncated = true;
      continue;
    }
    const FieldState& st = best->state;
    const double tt = st.t();
    const double x = 4.0 * xi * tt;
    if (std::abs(x) > best->trusted_half_width) {
      out.truncated = true;
      continue;
    }
    const double u = (x + st.half_width()) / st.h();
    auto j = static_cast<std::size_t>(std::floor(u));
    j = std::min(j, st.size() - 2);
    const double w = u - static_cast<double>(j);
    const cplx q = (1.0 - w) * st.q()[j] + w * st.q()[j + 1];
    out.samples.push_back({tt, x, q, true});
  }
  return out;
}

FieldState field_from_profile(const InitialProfile& p, double L, double h, double ramp_width) {
  const auto left = p.origin_left();
  if (!left) return FieldState::from_step(L, h, p.amplitude(), [&p](double x) { return p.value(x); });
  const double w = ramp_width > 0.0 ? ramp_width : 0.5 / std::max(p.amplitude(), 1e-300);
  const cplx jump = p.value(0.0) - *left;
  return FieldState::from_step(L, h, p.amplitude(), [&](double x) {
    const double ramp = 0.5 * (1.0 + std::tanh(x / w));
    return p.value(x) + jump * (ramp - (x < 0.0 ? 0.0 : 1.0));
  });
}

void write_snapshot_csv(const FieldState& s, const std::string& path, const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << header_comment;
  out << "x,Re q,Im q,abs q\n";
  char buf[256];
  const auto q = s.q();
  for (std::size_t j = 0; j < q.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", s.x_at(j), q[j].real(), q[j].imag(), std::abs(q[j]));
    out << buf;
  }
}

nlohmann::json evolve_manifest(const FieldState& initial, const EvolveConfig& cfg, const EvolveResult& res,
                               const std::vector<std::string>& snapshot_files) {
  nlohmann::json j;
  j["grid"] = {{"L", initial.half_width()},
               {"n_points", initial.size()},
               {"h", initial.h()},
               {"amplitude", initial.amplitude()}};
  j["dt"] = cfg.dt;
  j["steps_requested"] = cfg.steps;
  j["steps_taken"] = res.steps_taken;
  j["c_cfl"] = cfg.c_cfl;
  j["validity_margin"] = cfg.validity_margin;
  nlohmann::json snaps = nlohmann::json::array();
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    const auto& s = res.snapshots[i];
    nlohmann::json e;
    e["t"] = s.state.t();
    e["trusted_window"] = {-s.trusted_half_width, s.trusted_half_width};
    if (i < snapshot_files.size()) e["file"] = snapshot_files[i];
    snaps.push_back(e);
  }
  j["snapshots"] = snaps;
  if (res.blow_up)
    j["blow_up"] = {{"detected", true}, {"time", res.blow_up->time}, {"sup_norm", res.blow_up->sup_norm}};
  else
    j["blow_up"] = {{"detected", false}};
  return j;
}

}  // namespace nnls
