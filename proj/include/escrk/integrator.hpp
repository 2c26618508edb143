#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "escrk/errors.hpp"
#include "escrk/method_catalog.hpp"
#include "escrk/rk_core.hpp"

namespace escrk {

/// A matrix-free linear system u' = L u with a quadratic energy
/// E(u) = 1/2 ||u||_H^2. `apply` writes L*in into out; in and out never
/// alias.
template <class S>
concept LinearSystemLike = requires(const S& sys, std::span<const double> in, std::span<double> out) {
  { sys.dim() } -> std::convertible_to<std::size_t>;
  sys.apply(in, out);
  { sys.energy(in) } -> std::convertible_to<double>;
};

/// Type-erased system, for operators assembled at run time.
struct LinearSystem {
  std::size_t dimension = 0;
  std::function<void(std::span<const double>, std::span<double>)> apply_L;
  std::function<double(std::span<const double>)> energy_fn;
  std::function<std::vector<double>(double)> exact;  // empty when unknown
  std::optional<double> norm_L;

  [[nodiscard]] std::size_t dim() const noexcept { return dimension; }
  void apply(std::span<const double> in, std::span<double> out) const { apply_L(in, out); }
  [[nodiscard]] double energy(std::span<const double> u) const { return energy_fn(u); }
};

/// One step of the nested form
///
///   k_0 = 0,  k_j = c_j h L (u + k_{j-1}),  u <- u + k_s,
///
/// which applies L once per stage and keeps one stage vector plus a
/// shifted-state scratch buffer.
class LowStorageStepper {
 public:
  LowStorageStepper(std::vector<double> ratios, std::size_t dim)
      : ratios_(std::move(ratios)), stage_(dim), shifted_(dim) {
    if (ratios_.empty()) throw std::invalid_argument("LowStorageStepper: no stages");
  }

  explicit LowStorageStepper(const RKCoefficients& a, std::size_t dim) : LowStorageStepper(stage_ratios(a), dim) {}

  [[nodiscard]] std::size_t stages() const noexcept { return ratios_.size(); }

  template <LinearSystemLike S>
  void step(const S& sys, double h, std::span<double> u, std::size_t step_index = 0) {
    const std::size_t n = u.size();
    if (n != stage_.size()) throw std::invalid_argument("LowStorageStepper: state size mismatch");
    std::fill(stage_.begin(), stage_.end(), 0.0);
    for (std::size_t j = 0; j < ratios_.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) shifted_[i] = u[i] + stage_[i];
      sys.apply(std::span<const double>(shifted_), std::span<double>(stage_));
      const double scale = ratios_[j] * h;
      bool finite = true;
      for (std::size_t i = 0; i < n; ++i) {
        stage_[i] *= scale;
        finite = finite && std::isfinite(stage_[i]);
      }
      if (!finite) throw StageOverflow(j + 1, step_index);
    }
    for (std::size_t i = 0; i < n; ++i) u[i] += stage_[i];
  }

 private:
  std::vector<double> ratios_;
  std::vector<double> stage_;
  std::vector<double> shifted_;
};

template <LinearSystemLike S>
[[nodiscard]] std::vector<double> rk_step(const S& sys, std::span<const double> ratios, double h,
                                          std::span<const double> u) {
  std::vector<double> out(u.begin(), u.end());
  LowStorageStepper stepper(std::vector<double>(ratios.begin(), ratios.end()), out.size());
  stepper.step(sys, h, std::span<double>(out));
  return out;
}

struct SimulationRecord {
  std::vector<std::size_t> steps;
  std::vector<double> times;
  std::vector<double> energies;
  std::vector<double> final_state;
  double initial_energy = 0.0;
  double final_energy = 0.0;
};

/// Observer called at every integer step (including step 0) with the
/// current state; the default does nothing.
struct NoObserver {
  void operator()(std::size_t, double, std::span<const double>) const noexcept {}
};

/// Applies `n_steps` uniform steps of size h. Energies are recorded at step 0,
/// at every multiple of `record_every`, and at the final step.
template <LinearSystemLike S, class Observer = NoObserver>
[[nodiscard]] SimulationRecord integrate(const S& sys, const MethodDescriptor& method, double h,
                                         std::span<const double> u0, std::size_t n_steps,
                                         std::size_t record_every = 1, Observer&& observer = {}) {
  if (n_steps < 1) throw std::invalid_argument("integrate: n_steps must be >= 1");
  if (record_every < 1) throw std::invalid_argument("integrate: record_every must be >= 1");
  if (u0.size() != sys.dim()) throw std::invalid_argument("integrate: initial state has wrong dimension");

  SimulationRecord rec;
  std::vector<double> u(u0.begin(), u0.end());
  LowStorageStepper stepper(method.coefficients, u.size());

  const auto record = [&](std::size_t n) {
    rec.steps.push_back(n);
    rec.times.push_back(static_cast<double>(n) * h);
    rec.energies.push_back(sys.energy(std::span<const double>(u)));
  };
  record(0);
  observer(std::size_t{0}, 0.0, std::span<const double>(u));
  for (std::size_t n = 1; n <= n_steps; ++n) {
    stepper.step(sys, h, std::span<double>(u), n);
    observer(n, static_cast<double>(n) * h, std::span<const double>(u));
    if (n % record_every == 0 || n == n_steps) record(n);
  }
  rec.initial_energy = rec.energies.front();
  rec.final_energy = rec.energies.back();
  rec.final_state = std::move(u);
  return rec;
}

struct NormEstimate {
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Power iteration on -L^2, which is the H-adjoint composition L* L for an
/// H-antisymmetric L. The H-norm is read off the energy functional, so only
/// `apply` and `energy` are needed. The estimate approaches ||L||_H from
/// below.
template <LinearSystemLike S>
[[nodiscard]] NormEstimate operator_norm_estimate(const S& sys, double tol = 1e-10, std::size_t max_iter = 5000,
                                                  std::uint64_t seed = 12345) {
  const std::size_t n = sys.dim();
  if (n < 1) throw std::invalid_argument("operator_norm_estimate: empty system");
  const auto h_norm = [&](const std::vector<double>& v) {
    return std::sqrt(std::max(0.0, 2.0 * sys.energy(std::span<const double>(v))));
  };

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n), w(n), z(n);

  for (int attempt = 0; attempt < 4; ++attempt) {
    for (auto& x : v) x = dist(rng);
    double nv = h_norm(v);
    if (!(nv > 0.0) || !std::isfinite(nv)) continue;
    for (auto& x : v) x /= nv;

    NormEstimate est;
    double previous = 0.0;
    bool breakdown = false;
    for (std::size_t it = 1; it <= max_iter; ++it) {
      sys.apply(std::span<const double>(v), std::span<double>(w));
      const double value = h_norm(w);
      sys.apply(std::span<const double>(w), std::span<double>(z));
      const double nz = h_norm(z);
      est.value = value;
      est.iterations = it;
      if (!(nz > 0.0) || !std::isfinite(nz)) {
        breakdown = true;
        break;
      }
      for (std::size_t i = 0; i < n; ++i) v[i] = -z[i] / nz;
      if (it > 1 && std::abs(value - previous) <= tol * value) {
        est.converged = true;
        break;
      }
      previous = value;
    }
    if (!breakdown) return est;
  }
  throw NumericalError("operator_norm_estimate: power iteration broke down after 3 restarts");
}

/// h_max = lambda / ||L|| for a strongly stable method.
[[nodiscard]] inline double max_stable_step(const MethodDescriptor& method, double norm_L) {
  if (!(norm_L > 0.0)) throw std::invalid_argument("max_stable_step: norm_L must be positive");
  if (!method.profile.lambda) {
    throw std::domain_error("max_stable_step: " + method.name + " has no strong-stability bound");
  }
  return *method.profile.lambda / norm_L;
}

}  // namespace escrk
