// nnls: command-line driver for scattering, asymptotics, PDE evolution and
// the comparisons between them.

#include "nnls/asymptotics.hpp"
#include "nnls/exact.hpp"
#include "nnls/kernels.hpp"
#include "nnls/pde.hpp"
#include "nnls/profile.hpp"
#include "nnls/scattering.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;
using namespace nnls;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------------------
// Config access

double num(const json& j, const std::string& key, double fallback, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw InputError("config: field '" + where + "." + key + "' must be a number");
  return j.at(key).get<double>();
}

std::vector<double> num_list(const json& j, const std::string& key, std::vector<double> fallback,
                             const std::string& where) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array()) throw InputError("config: field '" + where + "." + key + "' must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number())
      throw InputError("config: field '" + where + "." + key + "[" + std::to_string(i) + "]' must be a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

const json& section(const json& cfg, const std::string& name) {
  static const json empty = json::object();
  if (!cfg.contains(name)) return empty;
  if (!cfg.at(name).is_object()) throw InputError("config: section '" + name + "' must be an object");
  return cfg.at(name);
}

QuadratureSpec quad_from(const json& s) {
  QuadratureSpec q;
  if (!s.contains("quadrature")) return q;
  const json& j = s.at("quadrature");
  if (!j.is_object()) throw InputError("config: field 'scatter.quadrature' must be an object");
  q.truncation_radius = num(j, "truncation_radius", q.truncation_radius, "scatter.quadrature");
  q.panel_count = static_cast<int>(num(j, "panel_count", q.panel_count, "scatter.quadrature"));
  q.grading_ratio = num(j, "grading_ratio", q.grading_ratio, "scatter.quadrature");
  q.nodes_per_panel = static_cast<int>(num(j, "nodes_per_panel", q.nodes_per_panel, "scatter.quadrature"));
  q.tail_tolerance = num(j, "tail_tolerance", q.tail_tolerance, "scatter.quadrature");
  q.validate();
  return q;
}

ScatteringOptions scatter_options(const json& cfg) {
  const json& s = section(cfg, "scatter");
  ScatteringOptions o;
  o.quad = quad_from(s);
  o.k_min = num(s, "k_min", o.k_min, "scatter");
  o.k_max = num(s, "k_max", o.k_max, "scatter");
  o.nodes_per_sign = static_cast<std::size_t>(num(s, "nodes_per_sign", static_cast<double>(o.nodes_per_sign), "scatter"));
  o.case_eps_factor = num(s, "case_eps_factor", o.case_eps_factor, "scatter");
  o.k1_tolerance = num(s, "k1_tolerance", o.k1_tolerance, "scatter");
  o.validate();
  return o;
}

// The profile description after --profile and profile_params are applied:
// either {"builtin": name, params...} or {"file": path}.
json profile_spec(const json& cfg) {
  json params = json::object();
  if (cfg.contains("profile_params")) {
    if (!cfg.at("profile_params").is_object()) throw InputError("config: field 'profile_params' must be an object");
    params = cfg.at("profile_params");
  }
  const json p = cfg.value("profile", json("pure_step"));
  if (p.is_object()) {
    json spec = p;
    for (auto it = params.begin(); it != params.end(); ++it) spec[it.key()] = it.value();
    return spec;
  }
  if (!p.is_string()) throw InputError("config: field 'profile' must be a name, a path or an object");
  const auto name = p.get<std::string>();
  if (name == "pure_step" || name == "soliton" || name == "smoothed_step" || name == "zero") {
    json spec = params;
    spec["builtin"] = name;
    return spec;
  }
  return json{{"file", name}};
}

InitialProfile make_profile(const json& spec) {
  if (spec.contains("file")) return load_profile(spec.at("file").get<std::string>());
  if (spec.value("builtin", std::string()) == "zero")
    throw InputError("profile: 'zero' is only available for the evolve command");
  return profile_from_json(spec);
}

bool is_builtin(const json& spec, const std::string& name) { return spec.value("builtin", std::string()) == name; }

SpectralData make_spectral(const json& cfg, const json& spec, const InitialProfile& profile) {
  const ScatteringOptions opt = scatter_options(cfg);
  const json& s = section(cfg, "scatter");
  const std::string src = s.value("source", std::string("numeric"));
  if (src == "numeric") return scattering_data(profile, opt);
  if (src != "exact") throw InputError("config: field 'scatter.source' must be 'numeric' or 'exact'");
  const auto grid = default_k_grid(opt);
  if (is_builtin(spec, "pure_step"))
    return scattering_data(std::make_shared<PureStepSource>(profile.amplitude()), grid, opt);
  if (is_builtin(spec, "soliton"))
    return scattering_data(std::make_shared<ReflectionlessSource>(profile.amplitude(), num(spec, "phi1", kPi, "profile")),
                           grid, opt);
  throw InputError("config: 'scatter.source = exact' needs the pure_step or soliton builtin");
}

struct Context {
  json cfg;
  fs::path out;
  std::string command;
  std::string fingerprint;

  std::string header() const {
    std::ostringstream os;
    os << "# nnls " << command << " config " << fingerprint << "\n";
    return os.str();
  }
  std::string path(const std::string& name) const { return (out / name).string(); }
};

void write_json(const Context& ctx, const std::string& name, json j) {
  j["config_fingerprint"] = ctx.fingerprint;
  std::ofstream f(ctx.path(name));
  if (!f) throw InputError("cannot write '" + ctx.path(name) + "'");
  f << j.dump(2) << "\n";
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Evolution set-up shared by evolve and compare

struct EvolveSetup {
  FieldState initial;
  EvolveConfig cfg;
};

EvolveSetup evolve_setup(const json& cfg, const json& spec, std::vector<double> extra_times) {
  const json& e = section(cfg, "evolve");
  const double L = num(e, "L", 40.0, "evolve");
  const double h = num(e, "h", 0.02, "evolve");
  EvolveConfig ec;
  ec.dt = num(e, "dt", 5e-5, "evolve");
  ec.c_cfl = num(e, "c_cfl", ec.c_cfl, "evolve");
  ec.validity_margin = num(e, "validity_margin", ec.validity_margin, "evolve");
  ec.blowup_factor = num(e, "blowup_factor", ec.blowup_factor, "evolve");
  auto times = num_list(e, "snapshot_times", {}, "evolve");
  times.insert(times.end(), extra_times.begin(), extra_times.end());
  double t_end = num(e, "t_end", 1.0, "evolve");
  for (double t : times) t_end = std::max(t_end, t);
  if (times.empty()) times.push_back(t_end);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (!(ec.dt > 0.0)) throw InputError("config: field 'evolve.dt' must be > 0");
  if (!(t_end >= 0.0)) throw InputError("config: field 'evolve.t_end' must be >= 0");
  ec.steps = static_cast<std::size_t>(std::llround(t_end / ec.dt));
  ec.snapshot_times = times;

  if (is_builtin(spec, "zero")) {
    const auto n = static_cast<std::size_t>(std::llround(2.0 * L / h)) + 1;
    FieldState z(L, n, 0.0, std::vector<cplx>(n, 0.0));
    ec.validate(z.h());
    return {z, ec};
  }
  const InitialProfile profile = make_profile(spec);
  FieldState init = field_from_profile(profile, L, h, num(e, "ramp_width", 0.0, "evolve"));
  ec.validate(init.h());
  return {init, ec};
}

cplx sample_at(const FieldState& s, double x) {
  const double u = (x + s.half_width()) / s.h();
  auto j = static_cast<std::size_t>(std::clamp(std::floor(u), 0.0, static_cast<double>(s.size() - 2)));
  const double w = u - static_cast<double>(j);
  return (1.0 - w) * s.q()[j] + w * s.q()[j + 1];
}

// ---------------------------------------------------------------------------
// Commands

int cmd_scatter(const Context& ctx) {
  const json spec = profile_spec(ctx.cfg);
  const InitialProfile profile = make_profile(spec);
  const SpectralData sd = make_spectral(ctx.cfg, spec, profile);
  std::optional<SmallKVectors> vv;
  if (section(ctx.cfg, "scatter").value("source", std::string("numeric")) == "numeric") vv = small_k_limit(profile);
  const ValidationReport rep = validate_spectral(sd, vv ? &*vv : nullptr);

  write_spectral_csv(sd, ctx.path("spectral.csv"), ctx.header());
  json side = spectral_sidecar(sd);
  side["profile"] = profile.name();
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
  side["validation"] = checks;
  write_json(ctx, "spectral.json", side);

  std::printf("profile %s  case %s  k1 = %.12g  (root search %.12g)\n", profile.name().c_str(),
              to_string(sd.case_tag).c_str(), sd.k1, sd.k1_root);
  for (const auto& c : rep.checks)
    std::printf("  %-4s %-52s %.3e (tol %.1e)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.tolerance);
  std::printf("validation: %zu passed, %zu failed\n", rep.checks.size() - rep.failures(), rep.failures());
  return rep.all_pass() ? kExitOk : kExitValidation;
}

int cmd_asym(const Context& ctx) {
  const json spec = profile_spec(ctx.cfg);
  const InitialProfile profile = make_profile(spec);
  const SpectralData sd = make_spectral(ctx.cfg, spec, profile);
  const json& a = section(ctx.cfg, "asym");
  const auto xis = num_list(a, "xi", {-1.0, -0.5, -0.25, 0.25, 0.5, 1.0}, "asym");
  const auto ts = num_list(a, "t", {25.0, 50.0, 100.0}, "asym");

  std::vector<AsymptoticRow> rows;
  std::size_t violations = 0;
  for (double xi : xis) {
    for (double t : ts) {
      if (!(t > 0.0)) throw InputError("config: field 'asym.t' entries must be > 0");
      AsymptoticRow row{4.0 * xi * t, t, {}, ""};
      row.res.xi = xi;
      row.res.value = cplx(kNaN, kNaN);
      row.res.nu = cplx(kNaN, kNaN);
      row.res.delta0 = cplx(kNaN, kNaN);
      if (xi == 0.0) {
        row.label = "transition-zone unsupported";
        row.res.transition_zone = true;
        std::fprintf(stderr, "xi = 0, t = %g: transition zone, unsupported\n", t);
      } else {
        try {
          row.res = q_asymptotic(sd, row.x, t);
          if (row.res.transition_zone) row.label = to_string(row.res.regime) + " [transition-zone unsupported]";
        } catch (const ValidationError& e) {
          row.label = "assumption-b-violated";
          ++violations;
          std::fprintf(stderr, "xi = %g, t = %g: %s\n", xi, t, e.what());
        }
      }
      rows.push_back(row);
    }
  }
  write_asymptotics_csv(rows, ctx.path("asymptotics.csv"), ctx.header());
  std::printf("asymptotics: %zu rows written, %zu assumption (b) violations\n", rows.size(), violations);
  return violations ? kExitValidation : kExitOk;
}

int cmd_evolve(const Context& ctx) {
  const json spec = profile_spec(ctx.cfg);
  const EvolveSetup setup = evolve_setup(ctx.cfg, spec, {});
  const EvolveResult res = evolve(setup.initial, setup.cfg);

  std::vector<std::string> files;
  for (std::size_t i = 0; i < res.snapshots.size(); ++i) {
    char name[64];
    std::snprintf(name, sizeof(name), "snapshot_%03zu.csv", i);
    write_snapshot_csv(res.snapshots[i].state, ctx.path(name), ctx.header());
    files.emplace_back(name);
  }
  write_json(ctx, "manifest.json", evolve_manifest(setup.initial, setup.cfg, res, files));
  std::printf("evolve: %zu steps, %zu snapshots\n", res.steps_taken, res.snapshots.size());
  if (res.blow_up) {
    std::fprintf(stderr, "blow-up detected at t = %.6g (sup |q| = %.3e)\n", res.blow_up->time, res.blow_up->sup_norm);
    return kExitRuntime;
  }
  return kExitOk;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int cmd_compare(const Context& ctx) {
  const json spec = profile_spec(ctx.cfg);
  const InitialProfile profile = make_profile(spec);
  const json& c = section(ctx.cfg, "compare");
  const auto xis = num_list(c, "xi", {-0.5, 0.5}, "compare");
  const auto times = num_list(c, "times", {10.0, 20.0, 30.0, 40.0}, "compare");
  const auto x0s = num_list(c, "x0", {}, "compare");

  const EvolveSetup setup = evolve_setup(ctx.cfg, spec, times);
  const EvolveResult res = evolve(setup.initial, setup.cfg);
  const SpectralData sd = make_spectral(ctx.cfg, spec, profile);

  std::ofstream out(ctx.path("compare.csv"));
  if (!out) throw InputError("cannot write '" + ctx.path("compare.csv") + "'");
  out << ctx.header();
  out << "t,x,Re q_pde,Im q_pde,Re q_asym,Im q_asym,abs_err,rel_err,regime,trusted\n";
  auto row = [&](double t, double x, cplx qp, cplx qa, const std::string& regime, bool trusted) {
    const double err = std::abs(qp - qa);
    out << fmt(t) << ',' << fmt(x) << ',' << fmt(qp.real()) << ',' << fmt(qp.imag()) << ',' << fmt(qa.real()) << ','
        << fmt(qa.imag()) << ',' << fmt(err) << ',' << fmt(err / std::abs(qa)) << ',' << regime << ','
        << (trusted ? 1 : 0) << '\n';
  };

  json summary = json::object();
  json rays = json::array();
  for (double xi : xis) {
    if (xi == 0.0) throw InputError("config: field 'compare.xi' entries must be nonzero");
    const RaySeries series = ray_sample(res.snapshots, xi, times);
    std::vector<double> lt, lq;
    double last_t = kNaN, last_abs = kNaN;
    for (double t : times) {
      const double x = 4.0 * xi * t;
      cplx qa(kNaN, kNaN);
      std::string regime = "n/a";
      try {
        const auto ar = q_asymptotic(sd, x, t);
        qa = ar.value;
        regime = to_string(ar.regime);
      } catch (const ValidationError&) {
        regime = "assumption-b-violated";
      }
      const RaySample* hit = nullptr;
      for (const auto& s : series.samples)
        if (std::abs(s.t - t) <= 0.5 * setup.cfg.dt) hit = &s;
      if (hit) {
        row(hit->t, hit->x, hit->q, qa, regime, true);
        lt.push_back(std::log(hit->t));
        lq.push_back(std::log(std::abs(hit->q)));
        last_t = hit->t;
        last_abs = std::abs(hit->q);
      } else {
        row(t, x, cplx(kNaN, kNaN), qa, regime, false);
      }
    }
    json r{{"xi", xi}, {"trusted_samples", lt.size()}, {"truncated", series.truncated}};
    if (xi < 0.0) {
      r["fitted_decay_exponent"] = lt.size() >= 2 ? json(fit_slope(lt, lq)) : json(nullptr);
      r["predicted_exponent"] = -0.5;
    } else {
      const cplx mc = modulated_constant(sd, xi);
      r["abs_modulated_constant"] = std::abs(mc);
      r["largest_trusted_t"] = std::isnan(last_t) ? json(nullptr) : json(last_t);
      r["abs_q_pde_at_largest_t"] = std::isnan(last_abs) ? json(nullptr) : json(last_abs);
      if (!std::isnan(last_abs)) r["relative_deviation"] = std::abs(last_abs - std::abs(mc)) / std::abs(mc);
    }
    rays.push_back(r);
  }
  for (double x0 : x0s) {
    for (double t : times) {
      const Snapshot* snap = nullptr;
      for (const auto& s : res.snapshots)
        if (std::abs(s.state.t() - t) <= 0.5 * setup.cfg.dt) snap = &s;
      cplx qa(kNaN, kNaN);
      std::string regime = to_string(Regime::SolitonRegion);
      try {
        qa = q_soliton_region(sd, x0, t);
      } catch (const Error&) {
        regime = "soliton-region-unavailable";
      }
      if (snap && std::abs(x0) <= snap->trusted_half_width)
        row(snap->state.t(), x0, sample_at(snap->state, x0), qa, regime, true);
      else
        row(t, x0, cplx(kNaN, kNaN), qa, regime, false);
    }
  }
  summary["rays"] = rays;
  if (res.blow_up) summary["blow_up"] = {{"time", res.blow_up->time}, {"sup_norm", res.blow_up->sup_norm}};
  write_json(ctx, "compare_summary.json", summary);
  std::printf("%s\n", summary.dump(2).c_str());
  if (res.blow_up) {
    std::fprintf(stderr, "blow-up detected at t = %.6g; later rows are untrusted\n", res.blow_up->time);
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_soliton(const Context& ctx) {
  const json& s = section(ctx.cfg, "soliton");
  const json spec = profile_spec(ctx.cfg);
  SolitonParams p;
  p.A = num(s, "amplitude", num(spec, "amplitude", 1.0, "profile_params"), "soliton");
  p.phi1 = num(s, "phi1", num(spec, "phi1", kPi, "profile_params"), "soliton");
  p.validate();
  const auto xs = num_list(s, "x", {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}, "soliton");
  const auto ts = num_list(s, "t", {0.5, 1.0, 2.0, 5.0}, "soliton");
  const auto nr = num_list(s, "n_range", {-2.0, 2.0}, "soliton");
  if (nr.size() != 2) throw InputError("config: field 'soliton.n_range' must have two entries");

  ScatteringOptions opt = scatter_options(ctx.cfg);
  const SpectralData sd =
      scattering_data(std::make_shared<ReflectionlessSource>(p.A, p.phi1), default_k_grid(opt), opt);

  std::ofstream out(ctx.path("soliton.csv"));
  if (!out) throw InputError("cannot write '" + ctx.path("soliton.csv") + "'");
  out << ctx.header();
  out << "x,t,Re q,Im q,abs q,Re q_region,Im q_region,abs_diff\n";
  for (double t : ts) {
    for (double x : xs) {
      cplx q(kNaN, kNaN), qr(kNaN, kNaN);
      try {
        q = one_soliton(p, x, t);
      } catch (const SingularityError&) {
      }
      if (t > 0.0) {
        try {
          qr = q_soliton_region(sd, x, t);
        } catch (const SingularityError&) {
        }
      }
      out << fmt(x) << ',' << fmt(t) << ',' << fmt(q.real()) << ',' << fmt(q.imag()) << ',' << fmt(std::abs(q)) << ','
          << fmt(qr.real()) << ',' << fmt(qr.imag()) << ',' << fmt(std::abs(q - qr)) << '\n';
    }
  }
  json j;
  j["amplitude"] = p.A;
  j["phi1"] = p.phi1;
  j["singularity_times"] =
      singularity_times(p, static_cast<int>(std::lround(nr[0])), static_cast<int>(std::lround(nr[1])));
  write_json(ctx, "soliton.json", j);
  std::printf("soliton: %zu rows written\n", xs.size() * ts.size());
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Self-check

struct CheckRow {
  std::string name;
  double value;
  double tolerance;
  bool pass;
  std::string note;
};

class Suite {
 public:
  void add(const std::string& name, double value, double tol) {
    rows_.push_back({name, value, tol, value <= tol, ""});
  }
  // Runs body; an exception becomes a named failure.
  template <class F>
  void run(const std::string& name, F body) {
    try {
      body();
    } catch (const std::exception& e) {
      rows_.push_back({name, kNaN, kNaN, false, e.what()});
    }
  }
  const std::vector<CheckRow>& rows() const { return rows_; }

 private:
  std::vector<CheckRow> rows_;
};

int cmd_selfcheck(const Context& ctx, const std::string& inject) {
  QuadratureSpec quad;
  if (inject == "quadrature") quad.panel_count = 0;
  else if (!inject.empty()) throw InputError("selfcheck: unknown fault '" + inject + "' (known: quadrature)");
  ScatteringOptions opt;
  opt.quad = quad;

  Suite s;
  s.run("kernels.gamma_recurrence", [&] {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const cplx z(u(rng), u(rng));
      if (std::abs(z.imag()) < 1e-3) continue;
      const cplx g1 = complex_gamma(z + 1.0);
      worst = std::max(worst, std::abs(g1 - z * complex_gamma(z)) / std::abs(g1));
    }
    s.add("kernels.gamma_recurrence", worst, 1e-10);
  });
  s.run("kernels.gamma_imaginary_modulus", [&] {
    const double y = 1.0;
    s.add("kernels.gamma_imaginary_modulus",
          std::abs(std::norm(complex_gamma(cplx(0.0, y))) - kPi / (y * std::sinh(kPi * y))), 1e-12);
  });
  s.run("kernels.dilog_minus_one", [&] { s.add("kernels.dilog_minus_one", std::abs(dilog(-1.0) + kPi * kPi / 12.0), 1e-12); });
  s.run("kernels.pv_residue", [&] {
    Sampler f = [](std::span<const double> xs) {
      std::vector<cplx> v;
      for (double x : xs) v.emplace_back(1.0 / (x * x + 1.0), 0.0);
      return v;
    };
    s.add("kernels.pv_residue", std::abs(pv_cauchy(f, 1.0, quad).value + kPi / 2.0), 1e-8);
  });
  s.run("asymptotics.pure_step_delta", [&] {
    const auto sd = scattering_data(std::make_shared<PureStepSource>(1.0), default_k_grid(opt), opt);
    const cplx d = delta_at(sd, 0.5, 0.0);
    s.add("asymptotics.pure_step_delta", std::abs(d - std::polar(1.0, -kPi / 48.0)), 1e-8);
    s.add("asymptotics.pure_step_delta_unimodular", std::abs(std::abs(d) - 1.0), 1e-10);
    const auto r = q_asymptotic(sd, 40.0, 20.0);
    s.add("asymptotics.pure_step_regime_b", r.regime == Regime::RightB ? 0.0 : 1.0, 0.0);
  });
  s.run("asymptotics.soliton_region_reflectionless", [&] {
    const SolitonParams p{1.0, kPi};
    const auto sd = scattering_data(std::make_shared<ReflectionlessSource>(p.A, p.phi1), default_k_grid(opt), opt);
    double worst = 0.0;
    for (double x0 : {-2.0, 0.0, 1.5})
      for (double t : {0.5, 2.0, 7.0}) worst = std::max(worst, std::abs(q_soliton_region(sd, x0, t) - one_soliton(p, x0, t)));
    s.add("asymptotics.soliton_region_reflectionless", worst, 1e-10);
  });
  s.run("scattering.pure_step_oracle", [&] {
    const JostSolver js(InitialProfile::pure_step(1.0));
    double worst = 0.0;
    for (int i = 0; i < 24; ++i) {
      const double mag = 0.05 * std::pow(200.0, i / 23.0);
      for (double k : {-mag, mag}) {
        const Mat2 S = js.scattering_matrix(k);
        const Mat2 E = pure_step_S(1.0, k);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b)
            if (!(a == 0 && b == 1)) worst = std::max(worst, std::abs(S(a, b) - E(a, b)) / std::abs(E(a, b)));
      }
    }
    s.add("scattering.pure_step_oracle", worst, 1e-6);
  });
  for (const auto& prof : {InitialProfile::pure_step(1.0), InitialProfile::smoothed_step(1.0),
                           InitialProfile::soliton(1.0, kPi)}) {
    const std::string tag = "scattering." + prof.name();
    s.run(tag, [&] {
      const auto vv = small_k_limit(prof);
      const auto sd = scattering_data(prof, opt);
      for (const auto& c : validate_spectral(sd, &vv).checks) s.add(tag + ": " + c.name, c.value, c.tolerance);
      s.add(tag + ": k1 - A/2", std::abs(sd.k1 - 0.5), 1e-6);
    });
  }
  s.run("exact.residual_order", [&] {
    const SolitonParams p{1.0, kPi};
    auto residual = [&](double h, double dt) {
      std::array<FieldState, 3> f{FieldState::from_step(10.0, h, 1.0, [&](double x) { return one_soliton(p, x, 1.0 - dt); }),
                                  FieldState::from_step(10.0, h, 1.0, [&](double x) { return one_soliton(p, x, 1.0); }),
                                  FieldState::from_step(10.0, h, 1.0, [&](double x) { return one_soliton(p, x, 1.0 + dt); })};
      return pde_residual(f, dt);
    };
    const double r1 = residual(0.04, 2e-3), r2 = residual(0.02, 1e-3);
    s.add("exact.residual_order", std::abs(std::log2(r1 / r2) - 2.0), 0.1);
    std::array<FieldState, 3> c{FieldState::from_step(5.0, 0.05, 1.0, [](double) { return cplx(1.0); }),
                                FieldState::from_step(5.0, 0.05, 1.0, [](double) { return cplx(1.0); }),
                                FieldState::from_step(5.0, 0.05, 1.0, [](double) { return cplx(1.0); })};
    s.add("exact.constant_field_residual", std::abs(pde_residual(c, 1e-3) - 2.0), 1e-12);
  });
  s.run("pde.soliton_short", [&] {
    const SolitonParams p{1.0, kPi};
    const auto init = FieldState::from_step(20.0, 0.05, 1.0, [&](double x) { return one_soliton(p, x, 0.0); });
    EvolveConfig ec;
    ec.dt = 2.5e-4;
    ec.steps = 400;
    ec.snapshot_times = {0.1};
    const auto res = evolve(init, ec);
    double err = 0.0;
    const auto& st = res.snapshots.at(0).state;
    for (std::size_t j = 0; j < st.size(); ++j)
      if (std::abs(st.x_at(j)) <= 10.0) err = std::max(err, std::abs(st.q()[j] - one_soliton(p, st.x_at(j), st.t())));
    s.add("pde.soliton_short", err, 1e-3);
    const auto m = mirror(st);
    double inv = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) inv = std::max(inv, std::abs(std::conj(m[m.size() - 1 - j]) - st.q()[j]));
    s.add("pde.mirror_involution", inv, 0.0);
  });

  std::ofstream out(ctx.path("selfcheck.csv"));
  if (!out) throw InputError("cannot write '" + ctx.path("selfcheck.csv") + "'");
  out << ctx.header();
  out << "check,value,tolerance,pass,note\n";
  std::size_t failed = 0;
  for (const auto& r : s.rows()) {
    if (!r.pass) ++failed;
    std::string note = r.note;
    std::replace(note.begin(), note.end(), ',', ';');
    out << r.name << ',' << fmt(r.value) << ',' << fmt(r.tolerance) << ',' << (r.pass ? "pass" : "FAIL") << ',' << note
        << '\n';
    std::printf("%-4s %-70s %.3e%s%s\n", r.pass ? "ok" : "FAIL", r.name.c_str(), r.value, r.note.empty() ? "" : "  ",
                r.note.c_str());
  }
  std::printf("selfcheck: %zu passed, %zu failed\n", s.rows().size() - failed, failed);
  return failed ? kExitValidation : kExitOk;
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw InputError("config: document must be an object");
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scattering data, long-time asymptotics and PDE checks for the nonlocal NLS equation with step-like data"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", profile, inject;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--profile", profile, "builtin profile name or profile JSON file");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"scatter", "compute spectral data and run the validation suite"},
      {"asym", "evaluate the long-time asymptotic formulas on (xi, t) grids"},
      {"evolve", "evolve the initial profile and write snapshots"},
      {"compare", "compare the PDE evolution against the asymptotics"},
      {"soliton", "tabulate the exact one-soliton and the soliton-region formula"},
      {"selfcheck", "run the invariant suite on builtin profiles"}};
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    if (name == "selfcheck") sub->add_option("--inject", inject, "inject a fault (quadrature)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    Context ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.cfg = load_config(config_path);
    if (!profile.empty()) ctx.cfg["profile"] = profile;
    ctx.fingerprint = hex64(fnv1a(ctx.command + "|" + ctx.cfg.dump()));
    ctx.out = out_dir;
    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    if (ec) throw InputError("cannot create output directory '" + out_dir + "': " + ec.message());

    if (ctx.command == "scatter") return cmd_scatter(ctx);
    if (ctx.command == "asym") return cmd_asym(ctx);
    if (ctx.command == "evolve") return cmd_evolve(ctx);
    if (ctx.command == "compare") return cmd_compare(ctx);
    if (ctx.command == "soliton") return cmd_soliton(ctx);
    return cmd_selfcheck(ctx, inject);
  } catch (const InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInput;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "validation failure: %s\n", e.what());
    return kExitValidation;
  } catch (const SingularityError& e) {
    std::fprintf(stderr, "singularity proximity: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return kExitRuntime;
  }
}
