#pragma once

// Algebra of explicit RK methods written in monomial form
//
//   G_s(z) = sum_{k=0}^{s} a_k z^k,   u_{n+1} = G_s(hL) u_n,
//
// for linear autonomous systems u' = Lu whose operator is antisymmetric in
// some inner product H. For such systems the per-step energy update is
//
//   E_{n+1} = E_n + 1/2 sum_{k=1}^{s} b_k h^{2k} ||L^k u_n||_H^2,
//
// and everything in this header (energy order, strong-stability bound,
// low-storage stage ratios) is a function of the coefficients a_k alone.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "escrk/errors.hpp"

namespace escrk {

/// Relative threshold separating exact zeros of b_k (rounding noise near
/// 1e-17) from genuinely small leading coefficients (|b_6| ~ 1.2e-7 for
/// RK(7,4,11)).
inline constexpr double kEnergyZeroTol = 1e-10;

/// Absolute tolerance for a_k == 1/k! when counting the solution order.
inline constexpr double kOrderTol = 1e-12;

/// Coefficients a_0..a_s of the stability polynomial. a_0 is exactly 1 and
/// a_s is nonzero; both are checked on construction.
class RKCoefficients {
 public:
  explicit RKCoefficients(std::vector<double> a, std::string name = {}) : a_(std::move(a)), name_(std::move(name)) {
    if (a_.size() < 2) {
      throw std::invalid_argument("RKCoefficients: need at least a_0 and a_1");
    }
    if (a_.front() != 1.0) {
      throw std::invalid_argument("RKCoefficients: a_0 must equal 1");
    }
    if (!(std::abs(a_.back()) > 1e-15)) {
      throw std::invalid_argument("RKCoefficients: a_s must be nonzero");
    }
    for (double v : a_) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("RKCoefficients: non-finite coefficient");
      }
    }
  }

  [[nodiscard]] std::size_t stages() const noexcept { return a_.size() - 1; }
  [[nodiscard]] double operator[](std::size_t k) const noexcept { return k < a_.size() ? a_[k] : 0.0; }
  [[nodiscard]] std::span<const double> values() const noexcept { return a_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

 private:
  std::vector<double> a_;
  std::string name_;
};

struct LeadingIndex {
  std::size_t m;  ///< smallest k with b_k != 0 (1-based)
  std::size_t r;  ///< energy order 2m - 1
};

struct StrongStability {
  double lambda;  ///< bound on h*||L||
  double b_sm1;   ///< b_{s-1}, strictly negative
};

struct EnergyProfile {
  std::vector<double> b;  ///< b_1..b_s stored at b[0]..b[s-1]
  std::size_t m = 0;
  std::size_t r = 0;
  std::size_t p = 0;
  std::optional<double> lambda;
  bool strongly_stable = false;

  /// 1-based access matching the usual b_k indexing.
  [[nodiscard]] double coefficient(std::size_t k) const { return b.at(k - 1); }
};

/// b_k = a_k^2 + 2 sum_{i=1}^{min(k,s-k)} (-1)^i a_{k-i} a_{k+i}, k = 1..s.
[[nodiscard]] inline std::vector<double> energy_coefficients(const RKCoefficients& a) {
  const std::size_t s = a.stages();
  std::vector<double> b(s);
  for (std::size_t k = 1; k <= s; ++k) {
    double sum = 0.0;
    const std::size_t top = std::min(k, s - k);
    for (std::size_t i = 1; i <= top; ++i) {
      const double term = a[k - i] * a[k + i];
      sum += (i % 2 == 1) ? -term : term;
    }
    b[k - 1] = a[k] * a[k] + 2.0 * sum;
  }
  return b;
}

[[nodiscard]] inline LeadingIndex leading_index(std::span<const double> b, double tol = kEnergyZeroTol) {
  if (b.empty()) {
    throw std::invalid_argument("leading_index: empty coefficient sequence");
  }
  if (!(tol > 0.0)) {
    throw std::invalid_argument("leading_index: tolerance must be positive");
  }
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) {
    throw std::invalid_argument("leading_index: all energy coefficients vanish (malformed input)");
  }
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (std::abs(b[k]) > tol * scale) {
      return {k + 1, 2 * (k + 1) - 1};
    }
  }
  // unreachable: the maximum itself exceeds tol * scale
  throw std::logic_error("leading_index: no leading coefficient");
}

[[nodiscard]] inline std::size_t solution_order(const RKCoefficients& a, double tol = kOrderTol) {
  double factorial = 1.0;
  std::size_t p = 0;
  for (std::size_t k = 1; k <= a.stages(); ++k) {
    factorial *= static_cast<double>(k);
    if (std::abs(a[k] - 1.0 / factorial) > tol) break;
    p = k;
  }
  return p;
}

/// Multipliers of the low-storage form k_j = c_j h L (u + k_{j-1}),
/// c_j = a_{s-j+1} / a_{s-j}.
[[nodiscard]] inline std::vector<double> stage_ratios(const RKCoefficients& a) {
  const std::size_t s = a.stages();
  for (std::size_t k = 0; k <= s; ++k) {
    if (a[k] == 0.0) {
      throw std::invalid_argument("stage_ratios: degenerate coefficient a_" + std::to_string(k) +
                                  " = 0; stage form unavailable");
    }
  }
  std::vector<double> c(s);
  for (std::size_t j = 1; j <= s; ++j) {
    c[j - 1] = a[s - j + 1] / a[s - j];
  }
  return c;
}

/// lambda = sqrt(-b_{s-1} / b_s), valid when b_1..b_{s-2} vanish and b_{s-1} < 0.
[[nodiscard]] inline StrongStability strong_stability_bound(const RKCoefficients& a, double tol = kEnergyZeroTol) {
  const std::size_t s = a.stages();
  const auto b = energy_coefficients(a);
  if (s < 2) {
    throw NotStronglyStable(s, b[s - 1]);
  }
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 1; k + 2 <= s; ++k) {
    if (std::abs(b[k - 1]) > tol * scale) {
      throw NotStronglyStable(k, b[k - 1]);
    }
  }
  const double b_sm1 = b[s - 2];
  const double b_s = b[s - 1];
  if (!(b_sm1 < 0.0) || std::abs(b_sm1) <= tol * scale) {
    throw NotStronglyStable(s - 1, b_sm1);
  }
  return {std::sqrt(-b_sm1 / b_s), b_sm1};
}

/// G_s(z) by Horner recursion.
[[nodiscard]] inline std::complex<double> amplification(const RKCoefficients& a, std::complex<double> z) {
  const auto v = a.values();
  std::complex<double> acc = v.back();
  for (std::size_t k = v.size() - 1; k-- > 0;) {
    acc = acc * z + v[k];
  }
  return acc;
}

[[nodiscard]] inline EnergyProfile energy_profile(const RKCoefficients& a) {
  EnergyProfile prof;
  prof.b = energy_coefficients(a);
  const auto lead = leading_index(prof.b);
  prof.m = lead.m;
  prof.r = lead.r;
  prof.p = solution_order(a);
  try {
    prof.lambda = strong_stability_bound(a).lambda;
    prof.strongly_stable = true;
  } catch (const NotStronglyStable&) {
    prof.strongly_stable = false;
  }
  return prof;
}

}  // namespace escrk
