#pragma once

// Method-of-lines evolution of  i q_t + q_xx + 2 q(x)^2 conj(q(-x)) = 0
// on a symmetric truncated domain [-L, L] with q(-L) = 0 and q(L) = A pinned.

#include "nnls/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nnls {

class InitialProfile;

class FieldState {
 public:
  // n_points must be odd so that x = 0 and every mirror pair are nodes.
  // Boundary samples are overwritten with 0 and A.
  FieldState(double half_width, std::size_t n_points, double amplitude, std::vector<cplx> q, double t = 0.0);

  // Samples f on the grid.
  static FieldState from_function(double half_width, std::size_t n_points, double amplitude,
                                  const std::function<cplx(double)>& f, double t = 0.0);
  // Grid step h instead of node count; h must divide L.
  static FieldState from_step(double half_width, double h, double amplitude, const std::function<cplx(double)>& f,
                              double t = 0.0);

  double half_width() const { return L_; }
  std::size_t size() const { return q_.size(); }
  double h() const { return h_; }
  double amplitude() const { return A_; }
  double t() const { return t_; }
  void set_t(double t) { t_ = t; }
  double x_at(std::size_t j) const { return -L_ + h_ * static_cast<double>(j); }
  std::size_t mirror_index(std::size_t j) const { return q_.size() - 1 - j; }

  std::span<const cplx> q() const { return q_; }
  std::span<cplx> q_mut() { return q_; }

  bool same_grid(const FieldState& o) const;

 private:
  double L_;
  double h_;
  double A_;
  std::vector<cplx> q_;
  double t_;
};

struct EvolveConfig {
  double dt = 5e-5;
  std::size_t steps = 0;
  double c_cfl = 0.2;
  std::vector<double> snapshot_times;
  double validity_margin = 4.0;
  double blowup_factor = 1e6;

  void validate(double h) const;
};

struct Snapshot {
  FieldState state;
  double trusted_half_width;  // |x| <= L - margin * sqrt(t)
};

struct BlowUp {
  double time;
  double sup_norm;
};

struct EvolveResult {
  std::vector<Snapshot> snapshots;
  std::optional<BlowUp> blow_up;
  std::size_t steps_taken = 0;
};

// Node j holds conj(q at node n-1-j).
std::vector<cplx> mirror(const FieldState& s);

// Semi-discrete right-hand side q_t = i q_xx + 2i q^2 mirror(q); zero at the
// pinned boundary nodes.
std::vector<cplx> rhs(const FieldState& s);

// Classical four-stage explicit time stepping. Snapshots are taken at the
// step nearest to each requested time (time 0 included if requested).
// Throws InputError on a CFL violation; blow-up is reported in the result.
EvolveResult evolve(const FieldState& initial, const EvolveConfig& cfg);

double trusted_half_width(const FieldState& s, double margin);

struct RaySample {
  double t;
  double x;
  cplx q;
  bool trusted;
};

struct RaySeries {
  std::vector<RaySample> samples;  // only trusted samples
  bool truncated = false;          // some requested times fell outside the window
};

// q along x = 4 xi t, linearly interpolated in x on the snapshot nearest
// to each requested time.
RaySeries ray_sample(std::span<const Snapshot> snapshots, double xi, std::span<const double> times);

// Initial field for the evolution from a step-like profile; outside the
// profile support the background constants are used. A jump at the origin is
// replaced by a tanh ramp of the given width (0 selects 0.5/A).
FieldState field_from_profile(const InitialProfile& p, double half_width, double h, double ramp_width = 0.0);

// CSV with columns x, Re q, Im q, abs q.
void write_snapshot_csv(const FieldState& s, const std::string& path, const std::string& header_comment);

// Snapshot times, grid parameters, trusted windows and the blow-up report.
nlohmann::json evolve_manifest(const FieldState& initial, const EvolveConfig& cfg, const EvolveResult& res,
                               const std::vector<std::string>& snapshot_files);

}  // namespace nnls
