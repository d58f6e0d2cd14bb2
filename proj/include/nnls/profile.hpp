#pragma once

#include "nnls/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nnls {

// Step-like initial datum: a compact perturbation of the pure step of height
// A supported in [-N, N], sampled on a uniform grid that contains x = 0.
// Outside the grid q0 = 0 (x < -N) and q0 = A (x > N).
//
// The profile may carry a jump at the origin (the pure step does). In that
// case samples[centre] is the right limit q0(0+) and origin_left is q0(0-);
// interpolation never crosses the origin.
class InitialProfile {
 public:
  InitialProfile(double amplitude, double support_radius, double grid_step, std::vector<cplx> samples,
                 std::optional<cplx> origin_left = std::nullopt, std::string name = "custom");

  static InitialProfile pure_step(double amplitude, double support_radius = 20.0, double grid_step = 0.02);
  static InitialProfile soliton(double amplitude, double phi1, double support_radius = 40.0,
                                double grid_step = 0.02);
  // A (1 + tanh(x / width)) / 2; width defaults to 0.5 / A.
  static InitialProfile smoothed_step(double amplitude, double width = 0.0, double support_radius = 20.0,
                                      double grid_step = 0.02);

  double amplitude() const { return amplitude_; }
  double support_radius() const { return support_radius_; }
  double grid_step() const { return grid_step_; }
  std::size_t size() const { return samples_.size(); }
  std::size_t centre() const { return samples_.size() / 2; }
  std::span<const cplx> samples() const { return samples_; }
  std::optional<cplx> origin_left() const { return origin_left_; }
  const std::string& name() const { return name_; }
  double x_at(std::size_t j) const { return -support_radius_ + grid_step_ * static_cast<double>(j); }

  // q0(x) by 4-point Lagrange interpolation. At x == 0 with a jump the right
  // limit is returned.
  cplx value(double x) const;

  // Same profile resampled at grid step h (must divide N).
  InitialProfile resampled(double grid_step) const;

  nlohmann::json to_json() const;

 private:
  double amplitude_;
  double support_radius_;
  double grid_step_;
  std::vector<cplx> samples_;
  std::optional<cplx> origin_left_;
  std::string name_;
  // builtin generator for resampling; empty for file-backed data
  std::function<cplx(double)> generator_;
  bool jump_generator_ = false;

  cplx node(std::size_t j, bool left_of_origin) const;
};

// Parses {"amplitude", "support_radius", "grid_step", "samples": [[re, im], ...]}
// or {"builtin": "pure_step" | "soliton" | "smoothed_step", ...parameters}.
// Throws InputError naming the offending field.
InitialProfile profile_from_json(const nlohmann::json& j);
InitialProfile load_profile(const std::string& name_or_path, const nlohmann::json& overrides = {});

}  // namespace nnls
