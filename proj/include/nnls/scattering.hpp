#pragma once

// Direct scattering for step-like data: Jost solutions, the scattering
// matrix, spectral functions and the discrete data k1, gamma1.

#include "nnls/common.hpp"
#include "nnls/kernels.hpp"
#include "nnls/profile.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nnls {

enum class Side { Left, Right };

// Integrates Psi_x = -ik[sigma3, Psi] + U Psi across the support of the
// profile with a fourth-order Magnus scheme (two Gauss points per cell,
// exact 2x2 exponentials). The Gauss-point potentials are computed once.
class JostSolver {
 public:
  // substeps: minimum number of Magnus steps per profile cell. The actual
  // count also grows with |k| so that |k| times the step stays below
  // max_phase_step.
  explicit JostSolver(const InitialProfile& profile, int substeps = 1, double max_phase_step = 0.25);

  double amplitude() const { return profile_.amplitude(); }
  double support_radius() const { return profile_.support_radius(); }

  // Psi_1(0, 0, k) (Left) or Psi_2(0, 0, k) (Right) for real k != 0.
  Mat2 solve(double k, Side side) const;

  // The column that is trusted for Im k > 0: column 1 of Psi_1 (Left) or
  // column 2 of Psi_2 (Right), integrated in its dominant direction.
  Vec2 trusted_column(cplx k, Side side) const;

  // S(k) = Psi_2(0,0,k)^{-1} Psi_1(0,0,k).
  Mat2 scattering_matrix(double k) const;

  // a1(k) = det(Psi_1^(1), Psi_2^(2)) at x = 0 for Im k >= 0.
  cplx a1_det(cplx k) const;

  // Solution of v' = U v from x = -N with v(-N) = (0, -iA/2), at the
  // profile grid nodes.
  struct SmallK {
    std::vector<double> x;
    std::vector<cplx> v1, v2;
  };
  SmallK small_k() const;

  int substeps_for(cplx k) const;

 private:
  struct Cell {
    cplx q_lo, r_lo;  // q(x) and -conj(q(-x)) at the lower Gauss point
    cplx q_hi, r_hi;  // same at the upper Gauss point
  };
  struct Table {
    double step;
    std::size_t centre;       // number of sub-cells in [-N, 0]
    std::vector<Cell> cells;  // ordered from x = -N to x = N
  };
  InitialProfile profile_;
  int base_substeps_;
  double max_phase_step_;
  mutable std::mutex mu_;
  mutable std::map<int, std::shared_ptr<const Table>> tables_;

  std::shared_ptr<const Table> table(int substeps) const;
  static Mat2 propagator(const Cell& c, double step, cplx k, bool backward);
};

inline Mat2 n_minus(double A, cplx k) {
  Mat2 m;
  m << 1.0, 0.0, A / (2.0 * kI * k), 1.0;
  return m;
}
inline Mat2 n_plus(double A, cplx k) {
  Mat2 m;
  m << 1.0, A / (2.0 * kI * k), 0.0, 1.0;
  return m;
}

inline Mat2 jost_solve(const InitialProfile& profile, double k, Side side) {
  return JostSolver(profile).solve(k, side);
}
inline Mat2 scattering_matrix(const InitialProfile& profile, double k) {
  return JostSolver(profile).scattering_matrix(k);
}

// Scattering-matrix entries at one real k:
// S = [[a1, s12], [b, a2]] with s12 = -conj(b(-k)).
struct SpectralPoint {
  cplx a1, a2, b, s12;
};

// Provider of spectral functions for real k (and of the discrete data that
// need more than the real axis). Implementations are thread safe.
class SpectralSource {
 public:
  virtual ~SpectralSource() = default;
  virtual double amplitude() const = 0;
  virtual SpectralPoint at(double k) const = 0;
  // Evaluates every k (in parallel where useful); result order follows ks.
  virtual std::vector<SpectralPoint> at_many(std::span<const double> ks) const;
  // a1 on the upper imaginary axis, computed without the trace formula.
  virtual cplx a1_imag_axis(double kappa) const = 0;
  // gamma1 with Psi_1^(1)(ik1) = gamma1 Psi_2^(2)(ik1).
  virtual cplx norming(double k1) const = 0;
  // |v2(0)|^2 - |v1(0)|^2 of the small-k system.
  virtual double small_k_invariant() const = 0;
  virtual std::string fingerprint() const = 0;
};

class ProfileSource : public SpectralSource {
 public:
  explicit ProfileSource(InitialProfile profile, int substeps = 1);
  double amplitude() const override { return solver_.amplitude(); }
  SpectralPoint at(double k) const override;
  std::vector<SpectralPoint> at_many(std::span<const double> ks) const override;
  cplx a1_imag_axis(double kappa) const override;
  cplx norming(double k1) const override;
  double small_k_invariant() const override;
  std::string fingerprint() const override;

  const InitialProfile& profile() const { return profile_; }
  const JostSolver& solver() const { return solver_; }

 private:
  InitialProfile profile_;
  JostSolver solver_;
  mutable std::mutex mu_;
  mutable std::map<double, SpectralPoint> cache_;
};

// Closed-form data of the pure step.
class PureStepSource : public SpectralSource {
 public:
  explicit PureStepSource(double A);
  double amplitude() const override { return A_; }
  SpectralPoint at(double k) const override;
  cplx a1_imag_axis(double kappa) const override;
  cplx norming(double k1) const override;
  double small_k_invariant() const override { return A_ * A_ / 4.0; }
  std::string fingerprint() const override;

 private:
  double A_;
};

// b = 0, a1 = (k - iA/2)/k, a2 = k/(k - iA/2), gamma1 = exp(i phi1).
class ReflectionlessSource : public SpectralSource {
 public:
  ReflectionlessSource(double A, double phi1);
  double amplitude() const override { return A_; }
  SpectralPoint at(double k) const override;
  cplx a1_imag_axis(double kappa) const override;
  cplx norming(double) const override { return std::polar(1.0, phi1_); }
  double small_k_invariant() const override { return 0.0; }
  std::string fingerprint() const override;

 private:
  double A_;
  double phi1_;
};

enum class CaseTag { CaseI, CaseII };
std::string to_string(CaseTag c);

struct SmallKVectors {
  std::vector<double> x;
  std::vector<cplx> v1, v2;

  // v2(x) conj(v2(-x)) - v1(x) conj(v1(-x)) at each node.
  std::vector<cplx> conserved() const;
};

SmallKVectors small_k_limit(const InitialProfile& profile);

struct ScatteringOptions {
  QuadratureSpec quad;
  double k_min = 1e-3;
  double k_max = 50.0;
  std::size_t nodes_per_sign = 2000;
  double case_eps_factor = 1e-6;  // eps_case = factor * max(1, A)
  double k1_tolerance = 1e-6;     // formula vs root search

  void validate() const;
};

// Symmetric log-spaced grid, ascending, without 0.
std::vector<double> default_k_grid(const ScatteringOptions& opt);

struct SpectralData {
  double A = 0.0;
  std::vector<double> k_grid;
  std::vector<cplx> a1, a2, b;
  double k1 = 0.0;
  double k1_root = 0.0;  // independent root of a1 on the imaginary axis
  cplx gamma1;
  CaseTag case_tag = CaseTag::CaseI;
  std::optional<cplx> a11;
  std::optional<cplx> a2_at_0;
  std::optional<cplx> da2_at_0;
  cplx da1_at_ik1;
  cplx b0;
  std::shared_ptr<const SpectralSource> source;
  QuadratureSpec quad;

  std::string fingerprint() const;
};

// Small-k limits read off the grid by even/odd extrapolation in k^2 from
// the two smallest |k| pairs.
struct SmallKLimits {
  cplx a2_at_0;   // even part of a2
  cplx a11;       // even part of k a1
  cplx da2_at_0;  // even part of a2 / k
  cplx b0;        // even part of b
  cplx k2a1_at_0; // even part of k^2 a1
};
SmallKLimits small_k_limits(std::span<const double> k_grid, std::span<const cplx> a1, std::span<const cplx> a2,
                            std::span<const cplx> b);

// Fills a1, a2, b on the grid and runs the full pipeline. Throws
// ValidationError when the classification criteria disagree or k1 from the
// formula and from the root search differ beyond tolerance.
SpectralData scattering_data(std::shared_ptr<const SpectralSource> source, std::span<const double> k_grid,
                             const ScatteringOptions& opt = {});
SpectralData scattering_data(const InitialProfile& profile, const ScatteringOptions& opt = {});

CaseTag classify_case(const SpectralData& sd, double eps_case);

// ln(F) sampler for the trace formulas (F = zeta^2/(zeta^2+1)(1 - b conj b(-zeta))
// in Case I and 1 - b conj b(-zeta) in Case II), continuous from -infinity.
Sampler trace_log_sampler(const SpectralData& sd);

// k1 from the closed formulas; sd needs case_tag, b0 and the source.
double compute_k1(const SpectralData& sd);

// Positive root of a1 on the imaginary axis via the determinant relation,
// bracketed near the guess.
double k1_root_search(const SpectralSource& src, double guess);

enum class TraceWhich { A1, A2 };
// a1 for Im k >= 0 or a2 for Im k <= 0 (boundary values on the real axis).
cplx trace_eval(const SpectralData& sd, cplx k, TraceWhich which);

// d a1/dk at ik1 from the factorised trace formula.
cplx trace_da1_at_ik1(const SpectralData& sd);

struct ReflectionCoeffs {
  cplx r1, r2;
  cplx one_plus_r1r2;
};
ReflectionCoeffs reflection_coeffs(const SpectralPoint& p);
ReflectionCoeffs reflection_coeffs(const SpectralData& sd, double k);

cplx gamma1_norming(const InitialProfile& profile, double k1);

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};
struct ValidationReport {
  std::vector<Check> checks;
  bool all_pass() const;
  std::size_t failures() const;
};

ValidationReport validate_spectral(const SpectralData& sd, const SmallKVectors* vv = nullptr);

// CSV with columns k, Re a1, Im a1, Re a2, Im a2, Re b, Im b.
void write_spectral_csv(const SpectralData& sd, const std::string& path, const std::string& header_comment);
nlohmann::json spectral_sidecar(const SpectralData& sd);

}  // namespace nnls
