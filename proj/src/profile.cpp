#include "nnls/profile.hpp"

#include "nnls/exact.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace nnls {

namespace {

std::size_t checked_node_count(double support_radius, double grid_step) {
  if (!(support_radius > 0.0) || !std::isfinite(support_radius)) throw InputError("profile: support_radius must be > 0");
  if (!(grid_step > 0.0) || !std::isfinite(grid_step)) throw InputError("profile: grid_step must be > 0");
  const double cells = support_radius / grid_step;
  const double rounded = std::round(cells);
  if (rounded < 2.0 || std::abs(cells - rounded) > 1e-9 * std::max(1.0, cells))
    throw InputError("profile: grid_step must divide support_radius into at least 2 cells");
  return 2 * static_cast<std::size_t>(rounded) + 1;
}

std::vector<cplx> tabulate(double N, double h, const std::function<cplx(double)>& f, double A) {
  const std::size_t n = checked_node_count(N, h);
  std::vector<cplx> s(n);
  for (std::size_t j = 0; j < n; ++j) s[j] = f(-N + h * static_cast<double>(j));
  s.front() = 0.0;
  s.back() = A;
  return s;
}

}  // namespace

InitialProfile::InitialProfile(double amplitude, double support_radius, double grid_step, std::vector<cplx> samples,
                               std::optional<cplx> origin_left, std::string name)
    : amplitude_(amplitude),
      support_radius_(support_radius),
      grid_step_(grid_step),
      samples_(std::move(samples)),
      origin_left_(origin_left),
      name_(std::move(name)) {
  if (!(amplitude_ > 0.0) || !std::isfinite(amplitude_)) throw InputError("profile: amplitude must be > 0");
  const std::size_t n = checked_node_count(support_radius_, grid_step_);
  if (samples_.size() != n)
    throw InputError("profile: samples has " + std::to_string(samples_.size()) + " entries, grid needs " +
                     std::to_string(n));
  if (samples_.front() != 0.0) throw InputError("profile: samples must be exactly 0 at x = -N");
  if (samples_.back() != cplx(amplitude_, 0.0)) throw InputError("profile: samples must be exactly A at x = N");
  for (const auto& v : samples_)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw InputError("profile: samples must be finite");
}

InitialProfile InitialProfile::pure_step(double A, double N, double h) {
  auto f = [A](double x) { return x < 0.0 ? cplx(0.0) : cplx(A); };
  InitialProfile p(A, N, h, tabulate(N, h, f, A), cplx(0.0), "pure_step");
  p.generator_ = f;
  p.jump_generator_ = true;
  return p;
}

InitialProfile InitialProfile::soliton(double A, double phi1, double N, double h) {
  const SolitonParams sp{A, phi1};
  auto f = [sp](double x) { return one_soliton(sp, x, 0.0); };
  InitialProfile p(A, N, h, tabulate(N, h, f, A), std::nullopt, "soliton");
  p.generator_ = f;
  return p;
}

InitialProfile InitialProfile::smoothed_step(double A, double width, double N, double h) {
  if (width <= 0.0) width = 0.5 / A;
  auto f = [A, width](double x) { return cplx(0.5 * A * (1.0 + std::tanh(x / width))); };
  InitialProfile p(A, N, h, tabulate(N, h, f, A), std::nullopt, "smoothed_step");
  p.generator_ = f;
  return p;
}

cplx InitialProfile::node(std::size_t j, bool left_of_origin) const {
  if (origin_left_ && left_of_origin && j == centre()) return *origin_left_;
  return samples_[j];
}

cplx InitialProfile::value(double x) const {
  const double N = support_radius_;
  if (x <= -N) return x < -N ? cplx(0.0) : samples_.front();
  if (x >= N) return x > N ? cplx(amplitude_) : samples_.back();
  std::size_t lo = 0, hi = samples_.size() - 1;
  const bool left = x < 0.0;
  if (origin_left_) {
    if (left)
      hi = centre();
    else
      lo = centre();
  }
  const double u = (x + N) / grid_step_;
  auto cell = static_cast<std::ptrdiff_t>(std::floor(u));
  cell = std::clamp<std::ptrdiff_t>(cell, static_cast<std::ptrdiff_t>(lo), static_cast<std::ptrdiff_t>(hi) - 1);
  std::ptrdiff_t s = cell - 1;
  if (hi - lo >= 3) {
    s = std::clamp<std::ptrdiff_t>(s, static_cast<std::ptrdiff_t>(lo), static_cast<std::ptrdiff_t>(hi) - 3);
  } else {
    // segment too short for a cubic: linear between the cell ends
    const double t = u - static_cast<double>(cell);
    return (1.0 - t) * node(cell, left) + t * node(cell + 1, left);
  }
  const double t = u - static_cast<double>(s);  // local coordinate, nodes at 0,1,2,3
  const double w0 = -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0;
  const double w1 = t * (t - 2.0) * (t - 3.0) / 2.0;
  const double w2 = -t * (t - 1.0) * (t - 3.0) / 2.0;
  const double w3 = t * (t - 1.0) * (t - 2.0) / 6.0;
  return w0 * node(s, left) + w1 * node(s + 1, left) + w2 * node(s + 2, left) + w3 * node(s + 3, left);
}

InitialProfile InitialProfile::resampled(double h) const {
  const double N = support_radius_;
  std::function<cplx(double)> f = generator_;
  if (!f) f = [this](double x) { return value(x); };
  auto samples = tabulate(N, h, f, amplitude_);
  std::optional<cplx> left;
  if (origin_left_) left = jump_generator_ ? generator_(-std::numeric_limits<double>::min()) : *origin_left_;
  InitialProfile p(amplitude_, N, h, std::move(samples), left, name_);
  p.generator_ = generator_;
  p.jump_generator_ = jump_generator_;
  return p;
}

nlohmann::json InitialProfile::to_json() const {
  nlohmann::json j;
  j["name"] = name_;
  j["amplitude"] = amplitude_;
  j["support_radius"] = support_radius_;
  j["grid_step"] = grid_step_;
  auto arr = nlohmann::json::array();
  for (const auto& v : samples_) arr.push_back({v.real(), v.imag()});
  j["samples"] = std::move(arr);
  if (origin_left_) j["origin_left"] = {origin_left_->real(), origin_left_->imag()};
  return j;
}

namespace {

double number_field(const nlohmann::json& j, const char* key, std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw InputError(std::string("profile: missing field '") + key + "'");
  }
  if (!j.at(key).is_number()) throw InputError(std::string("profile: field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

cplx complex_field(const nlohmann::json& v, const std::string& where) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw InputError("profile: " + where + " must be a [re, im] pair");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

InitialProfile profile_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("profile: document must be an object");
  if (j.contains("builtin")) {
    if (!j.at("builtin").is_string()) throw InputError("profile: field 'builtin' must be a string");
    const auto kind = j.at("builtin").get<std::string>();
    const double A = number_field(j, "amplitude", 1.0);
    if (kind == "pure_step")
      return InitialProfile::pure_step(A, number_field(j, "support_radius", 20.0), number_field(j, "grid_step", 0.02));
    if (kind == "soliton")
      return InitialProfile::soliton(A, number_field(j, "phi1", kPi), number_field(j, "support_radius", 40.0 / A),
                                     number_field(j, "grid_step", 0.02));
    if (kind == "smoothed_step")
      return InitialProfile::smoothed_step(A, number_field(j, "width", 0.5 / A), number_field(j, "support_radius", 20.0),
                                           number_field(j, "grid_step", 0.02));
    throw InputError("profile: unknown builtin '" + kind + "'");
  }
  const double A = number_field(j, "amplitude");
  const double N = number_field(j, "support_radius");
  const double h = number_field(j, "grid_step");
  if (!j.contains("samples")) throw InputError("profile: missing field 'samples'");
  if (!j.at("samples").is_array()) throw InputError("profile: field 'samples' must be an array");
  std::vector<cplx> samples;
  samples.reserve(j.at("samples").size());
  for (std::size_t i = 0; i < j.at("samples").size(); ++i)
    samples.push_back(complex_field(j.at("samples")[i], "samples[" + std::to_string(i) + "]"));
  std::optional<cplx> left;
  if (j.contains("origin_left")) left = complex_field(j.at("origin_left"), "origin_left");
  std::string name = j.value("name", std::string("custom"));
  return InitialProfile(A, N, h, std::move(samples), left, name);
}

InitialProfile load_profile(const std::string& name_or_path, const nlohmann::json& overrides) {
  if (name_or_path == "pure_step" || name_or_path == "soliton" || name_or_path == "smoothed_step") {
    nlohmann::json j = overrides.is_object() ? overrides : nlohmann::json::object();
    j["builtin"] = name_or_path;
    return profile_from_json(j);
  }
  std::ifstream in(name_or_path);
  if (!in) throw InputError("profile: cannot open '" + name_or_path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("profile: '" + name_or_path + "' is not valid JSON: " + e.what());
  }
  return profile_from_json(j);
}

}  // namespace nnls
