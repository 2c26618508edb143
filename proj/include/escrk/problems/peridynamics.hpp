#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "escrk/errors.hpp"

namespace escrk::problems {

struct PeridynamicsSpec {
  double x_lo = -20.0;
  double x_hi = 20.0;
  std::size_t nx = 100;
  double delta = 5.0;  ///< horizon
  double rho = 1.0;
  double T = 5.0;

  [[nodiscard]] double length() const noexcept { return x_hi - x_lo; }
  [[nodiscard]] double dx() const noexcept { return length() / static_cast<double>(nx); }
};

/// Gaussian micromodulus (4/sqrt(pi)) exp(-x^2), truncated at the horizon.
[[nodiscard]] inline double micromodulus(double x, double delta) noexcept {
  const double d = std::abs(x);
  return d < delta ? 4.0 / std::sqrt(std::numbers::pi) * std::exp(-d * d) : 0.0;
}

/// Linear bond-based bar on a periodic domain, midpoint quadrature on cell
/// centres: U'' = -A U, packed as u = [U; V].
///
/// A is circulant because the grid is uniform and distances use the minimal
/// periodic image, so it is stored as the weights of the off-diagonal
/// offsets that fall inside the horizon.
class Peridynamics {
 public:
  explicit Peridynamics(const PeridynamicsSpec& spec) : spec_(spec) {
    if (!(spec.delta > 0.0)) throw std::invalid_argument("Peridynamics: horizon must be positive");
    if (spec.nx < 2) throw std::invalid_argument("Peridynamics: need at least 2 cells");
    if (!(spec.x_hi > spec.x_lo)) throw std::invalid_argument("Peridynamics: empty domain");
    if (!(spec.rho > 0.0)) throw std::invalid_argument("Peridynamics: density must be positive");
    if (spec.delta > 0.5 * spec.length()) {
      throw std::invalid_argument("Peridynamics: horizon exceeds half the periodic domain");
    }
    const std::size_t n = spec.nx;
    const double dx = spec.dx();
    weights_.assign(n, 0.0);
    diagonal_ = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
      const double dist = static_cast<double>(std::min(k, n - k)) * dx;
      weights_[k] = dx / spec.rho * micromodulus(dist, spec.delta);
      diagonal_ += weights_[k];
    }
    for (std::size_t k = 1; k < n; ++k) {
      if (weights_[k] != 0.0) offsets_.push_back(k);
    }
  }

  [[nodiscard]] std::size_t cells() const noexcept { return spec_.nx; }
  [[nodiscard]] std::size_t dim() const noexcept { return 2 * spec_.nx; }
  [[nodiscard]] const PeridynamicsSpec& spec() const noexcept { return spec_; }

  [[nodiscard]] double center(std::size_t i) const noexcept {
    return spec_.x_lo + (static_cast<double>(i) + 0.5) * spec_.dx();
  }

  /// out = A in, for vectors of length nx.
  void apply_stiffness(std::span<const double> in, std::span<double> out) const noexcept {
    const std::size_t n = spec_.nx;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diagonal_ * in[i];
      for (std::size_t k : offsets_) {
        const std::size_t j = i + k < n ? i + k : i + k - n;
        acc -= weights_[k] * in[j];
      }
      out[i] = acc;
    }
  }

  /// [U; V] -> [V; -A U]
  void apply(std::span<const double> in, std::span<double> out) const noexcept {
    const std::size_t n = spec_.nx;
    const auto U = in.first(n);
    const auto V = in.subspan(n, n);
    auto dU = out.first(n);
    auto dV = out.subspan(n, n);
    std::copy(V.begin(), V.end(), dU.begin());
    apply_stiffness(U, dV);
    for (auto& x : dV) x = -x;
  }

  /// 1/2 V^T V + 1/2 U^T A U. A is only positive semidefinite (constants lie
  /// in its kernel), so this is a seminorm.
  [[nodiscard]] double energy(std::span<const double> u) const noexcept {
    const std::size_t n = spec_.nx;
    double kinetic = 0.0, potential = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = diagonal_ * u[i];
      for (std::size_t k : offsets_) {
        const std::size_t j = i + k < n ? i + k : i + k - n;
        row -= weights_[k] * u[j];
      }
      kinetic += u[n + i] * u[n + i];
      potential += u[i] * row;
    }
    return 0.5 * kinetic + 0.5 * potential;
  }

  /// U_i = exp(-x_i^2), V = 0.
  [[nodiscard]] std::vector<double> initial_state() const {
    std::vector<double> u(dim(), 0.0);
    for (std::size_t i = 0; i < spec_.nx; ++i) {
      const double x = center(i);
      u[i] = std::exp(-x * x);
    }
    return u;
  }

  /// Dense A, row-major, for small-grid checks.
  [[nodiscard]] std::vector<double> stiffness_matrix() const {
    const std::size_t n = spec_.nx;
    std::vector<double> A(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      A[i * n + i] = diagonal_;
      for (std::size_t k : offsets_) {
        const std::size_t j = i + k < n ? i + k : i + k - n;
        A[i * n + j] -= weights_[k];
      }
    }
    return A;
  }

 private:
  PeridynamicsSpec spec_;
  std::vector<double> weights_;
  std::vector<std::size_t> offsets_;
  double diagonal_ = 0.0;
};

[[nodiscard]] inline Peridynamics pd_build(const PeridynamicsSpec& spec) { return Peridynamics(spec); }

/// Exact displacement for the Gaussian initial pulse on the infinite bar,
///
///   u_e(x,t) = 2/sqrt(pi) int_0^inf exp(-xi^2) cos(2 x xi) cos(2t sqrt(1 - exp(-xi^2))) dxi,
///
/// integrated adaptively on [0, 8] (the tail is below exp(-64)).
[[nodiscard]] inline double pd_exact(double x, double t, double quad_tol = 1e-12) {
  if (!(quad_tol > 0.0)) throw std::invalid_argument("pd_exact: tolerance must be positive");
  const auto integrand = [x, t](double xi) {
    const double g = std::exp(-xi * xi);
    return g * std::cos(2.0 * x * xi) * std::cos(2.0 * t * std::sqrt(1.0 - g));
  };
  double error = 0.0;
  // Boost's tolerance is relative to the L1 norm of the integrand, which is
  // at most sqrt(pi)/2 here; after scaling, quad_tol is an absolute bound.
  constexpr unsigned max_depth = 15;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 8.0, max_depth, quad_tol, &error);
  const double scale = 2.0 / std::sqrt(std::numbers::pi);
  if (!(scale * error <= quad_tol)) {
    throw NumericalError("pd_exact: quadrature did not reach tolerance " + std::to_string(quad_tol) +
                         " (estimate " + std::to_string(scale * error) + ")");
  }
  return scale * value;
}

}  // namespace escrk::problems
