#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "escrk/rk_core.hpp"

namespace escrk {

/// A named method "RK(s,p,r)[-a|-b]" whose triple has been checked against
/// the coefficients.
struct MethodDescriptor {
  std::string name;
  RKCoefficients coefficients;
  EnergyProfile profile;

  [[nodiscard]] std::size_t stages() const noexcept { return coefficients.stages(); }
};

namespace detail {

[[nodiscard]] inline double inverse_factorial(std::size_t k) {
  double f = 1.0;
  for (std::size_t i = 2; i <= k; ++i) f *= static_cast<double>(i);
  return 1.0 / f;
}

[[nodiscard]] inline std::vector<double> taylor_prefix(std::size_t s) {
  std::vector<double> a(s + 1);
  for (std::size_t k = 0; k <= s; ++k) a[k] = inverse_factorial(k);
  return a;
}

struct Triple {
  std::size_t s, p, r;
};

[[nodiscard]] inline std::optional<Triple> parse_name(std::string_view name) {
  unsigned s = 0, p = 0, r = 0;
  int consumed = 0;
  const std::string buf(name);
  if (std::sscanf(buf.c_str(), "RK(%u,%u,%u)%n", &s, &p, &r, &consumed) != 3) return std::nullopt;
  const auto rest = name.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest != "-a" && rest != "-b") return std::nullopt;
  return Triple{s, p, r};
}

}  // namespace detail

/// Builds a descriptor and verifies that the (s, p, r) triple in `name`
/// matches what the coefficients actually produce.
[[nodiscard]] inline MethodDescriptor make_method(std::string name, RKCoefficients a) {
  const auto triple = detail::parse_name(name);
  if (!triple) {
    throw std::invalid_argument("make_method: malformed method name '" + name + "'");
  }
  auto profile = energy_profile(a);
  if (triple->s != a.stages() || triple->p != profile.p || triple->r != profile.r) {
    throw std::logic_error("make_method: " + name + " recomputes to RK(" + std::to_string(a.stages()) + "," +
                           std::to_string(profile.p) + "," + std::to_string(profile.r) + ")");
  }
  RKCoefficients named(std::vector<double>(a.values().begin(), a.values().end()), name);
  return {std::move(name), std::move(named), std::move(profile)};
}

/// p = s Taylor method: a_k = 1/k!.
[[nodiscard]] inline RKCoefficients taylor_method(std::size_t s) {
  if (s < 1) throw std::invalid_argument("taylor_method: s must be >= 1");
  return RKCoefficients(detail::taylor_prefix(s));
}

/// Odd s > 1: a_k = 1/k! for k < s and a_s = 1/s! - 1/(s+1)!, giving
/// p = s - 1 and r = s + 2.
[[nodiscard]] inline RKCoefficients family_one_below(std::size_t s) {
  if (s < 3 || s % 2 == 0) {
    throw std::invalid_argument("family_one_below: s must be odd and > 1");
  }
  auto a = detail::taylor_prefix(s);
  a[s] = detail::inverse_factorial(s) - detail::inverse_factorial(s + 1);
  return RKCoefficients(std::move(a));
}

/// Even s > 4: p = s - 2 and r = s + 3.
[[nodiscard]] inline RKCoefficients family_two_below(std::size_t s) {
  if (s < 6 || s % 2 != 0) {
    throw std::invalid_argument("family_two_below: s must be even and > 4");
  }
  auto a = detail::taylor_prefix(s);
  const double tail = 3.0 * detail::inverse_factorial(s + 2) - 3.0 * detail::inverse_factorial(s + 1);
  a[s - 1] = tail + detail::inverse_factorial(s - 1);
  a[s] = tail + detail::inverse_factorial(s);
  return RKCoefficients(std::move(a));
}

namespace detail {

[[nodiscard]] inline std::vector<MethodDescriptor> build_catalog() {
  const double r2 = std::sqrt(2.0);
  const double r5 = std::sqrt(5.0);
  const double r10 = std::sqrt(10.0);
  const auto second_order = [](std::vector<double> tail) {
    std::vector<double> a{1.0, 1.0, 0.5};
    a.insert(a.end(), tail.begin(), tail.end());
    return RKCoefficients(std::move(a));
  };
  const auto fourth_order = [](std::vector<double> tail) {
    std::vector<double> a{1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    a.insert(a.end(), tail.begin(), tail.end());
    return RKCoefficients(std::move(a));
  };

  std::vector<MethodDescriptor> out;
  out.push_back(make_method("RK(3,2,5)", second_order({1.0 / 8.0})));
  out.push_back(make_method("RK(4,2,7)-a", second_order({(2.0 - r2) / 4.0, (3.0 - 2.0 * r2) / 8.0})));
  out.push_back(make_method("RK(4,2,7)-b", second_order({(2.0 + r2) / 4.0, (3.0 + 2.0 * r2) / 8.0})));
  out.push_back(make_method("RK(5,2,9)-a", second_order({(r5 - 1.0) / 8.0, (r5 - 2.0) / 8.0,
                                                          (r5 - 2.0) * (r5 - 2.0) / (16.0 * (r5 - 1.0))})));
  out.push_back(make_method("RK(5,2,9)-b", second_order({1.0 / 4.0, 1.0 / 8.0, 1.0 / 32.0})));
  out.push_back(make_method("RK(4,4,5)", fourth_order({})));
  out.push_back(make_method("RK(5,4,7)", fourth_order({1.0 / 144.0})));
  out.push_back(make_method("RK(6,4,9)", fourth_order({1.0 / 128.0, 1.0 / 1152.0})));
  out.push_back(make_method("RK(7,4,11)",
                            fourth_order({(r10 - 2.0) / 144.0, (r10 - 3.0) / 144.0, (8.0 * r10 - 25.0) / 3456.0})));
  return out;
}

}  // namespace detail

/// The nine named methods: the p = 2 family of stage counts 3..5 and the
/// p = 4 family of stage counts 4..7. Built once, validated on first use.
[[nodiscard]] inline const std::vector<MethodDescriptor>& catalog() {
  static const std::vector<MethodDescriptor> methods = detail::build_catalog();
  return methods;
}

[[nodiscard]] inline const MethodDescriptor* find_method(std::string_view name) {
  for (const auto& m : catalog()) {
    if (m.name == name) return &m;
  }
  return nullptr;
}

[[nodiscard]] inline const MethodDescriptor& method(std::string_view name) {
  if (const auto* m = find_method(name)) return *m;
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Numeric re-derivation of energy-superconvergent coefficients.

struct EscOptions {
  std::size_t random_seeds = 32;
  std::uint64_t rng_seed = 20240611;
  double residual_tol = 1e-14;
  std::size_t max_iterations = 100;
  std::size_t max_halvings = 40;
  double dedup_distance = 1e-9;
};

struct EscResult {
  std::vector<RKCoefficients> roots;  ///< sorted by a_{p+1} ascending
  std::vector<std::string> diagnostics;
};

namespace detail {

/// Square system b_k(a) = 0, k = p/2+1 .. s-p/2, in unknowns a_{p+1}..a_s.
class EscSystem {
 public:
  EscSystem(std::size_t s, std::size_t p) : s_(s), p_(p), n_(s - p), a_(taylor_prefix(s)) {}

  [[nodiscard]] std::size_t unknowns() const noexcept { return n_; }

  void set(const Eigen::VectorXd& x) {
    for (std::size_t i = 0; i < n_; ++i) a_[p_ + 1 + i] = x[static_cast<Eigen::Index>(i)];
  }

  [[nodiscard]] Eigen::VectorXd residual() const {
    Eigen::VectorXd f(static_cast<Eigen::Index>(n_));
    for (std::size_t row = 0; row < n_; ++row) f[static_cast<Eigen::Index>(row)] = b(first_eq() + row);
    return f;
  }

  /// d b_k / d a_j = 2 (-1)^{k+j} a_{2k-j}.
  [[nodiscard]] Eigen::MatrixXd jacobian() const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd J(n, n);
    for (std::size_t row = 0; row < n_; ++row) {
      const std::size_t k = first_eq() + row;
      for (std::size_t col = 0; col < n_; ++col) {
        const std::size_t j = p_ + 1 + col;
        double v = 0.0;
        if (2 * k >= j && 2 * k - j <= s_) {
          v = 2.0 * a_[2 * k - j] * (((k + j) % 2 == 0) ? 1.0 : -1.0);
        }
        J(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
      }
    }
    return J;
  }

  [[nodiscard]] const std::vector<double>& coefficients() const noexcept { return a_; }

 private:
  [[nodiscard]] std::size_t first_eq() const noexcept { return p_ / 2 + 1; }

  [[nodiscard]] double b(std::size_t k) const {
    const std::size_t lo = 2 * k > s_ ? 2 * k - s_ : 0;
    const std::size_t hi = std::min(2 * k, s_);
    double sum = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      const double term = a_[i] * a_[2 * k - i];
      sum += ((k + i) % 2 == 0) ? term : -term;
    }
    return sum;
  }

  std::size_t s_, p_, n_;
  std::vector<double> a_;
};

}  // namespace detail

/// Multi-start damped Newton on the interior energy equations. Every
/// returned root has solution order exactly p and energy order 2s - p + 1.
[[nodiscard]] inline EscResult solve_esc(std::size_t s, std::size_t p, const EscOptions& opt = {}) {
  if (p < 2 || p % 2 != 0) throw std::invalid_argument("solve_esc: p must be even and >= 2");
  if (s <= p || s > p + 3) throw std::invalid_argument("solve_esc: need p < s <= p + 3");

  detail::EscSystem sys(s, p);
  const auto n = static_cast<Eigen::Index>(sys.unknowns());

  std::vector<Eigen::VectorXd> seeds;
  {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x[i] = detail::inverse_factorial(p + 1 + static_cast<std::size_t>(i));
    seeds.push_back(x);
  }
  std::mt19937_64 rng(opt.rng_seed);
  std::uniform_real_distribution<double> log_mag(-6.0, 0.0);
  std::bernoulli_distribution sign;
  for (std::size_t k = 0; k < opt.random_seeds; ++k) {
    Eigen::VectorXd x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      x[i] = std::pow(10.0, log_mag(rng)) * (sign(rng) ? 1.0 : -1.0);
    }
    seeds.push_back(x);
  }

  EscResult result;
  std::vector<Eigen::VectorXd> found;
  std::size_t singular = 0, stalled = 0, rejected = 0;
  for (const auto& seed : seeds) {
    Eigen::VectorXd x = seed;
    sys.set(x);
    Eigen::VectorXd f = sys.residual();
    bool converged = f.lpNorm<Eigen::Infinity>() < opt.residual_tol;
    bool abandoned = false;
    for (std::size_t it = 0; it < opt.max_iterations && !converged; ++it) {
      const auto lu = sys.jacobian().fullPivLu();
      if (!lu.isInvertible()) {
        abandoned = true;
        ++singular;
        break;
      }
      const Eigen::VectorXd dx = lu.solve(-f);
      const double f_norm = f.norm();
      double step = 1.0;
      Eigen::VectorXd trial = x + dx;
      sys.set(trial);
      Eigen::VectorXd f_trial = sys.residual();
      for (std::size_t halving = 0; halving < opt.max_halvings && !(f_trial.norm() < f_norm); ++halving) {
        step *= 0.5;
        trial = x + step * dx;
        sys.set(trial);
        f_trial = sys.residual();
      }
      if (!(f_trial.norm() < f_norm)) {
        // no descent: either already at the precision floor or stuck
        sys.set(x);
        break;
      }
      x = trial;
      f = f_trial;
      converged = f.lpNorm<Eigen::Infinity>() < opt.residual_tol;
    }
    if (abandoned) continue;
    if (!converged) {
      ++stalled;
      continue;
    }
    const bool duplicate = std::any_of(found.begin(), found.end(), [&](const Eigen::VectorXd& y) {
      return (y - x).lpNorm<Eigen::Infinity>() < opt.dedup_distance;
    });
    if (duplicate) continue;

    sys.set(x);
    const auto& coeffs = sys.coefficients();
    if (!(std::abs(coeffs.back()) > 1e-15)) {
      ++rejected;
      continue;
    }
    RKCoefficients a(coeffs);
    const auto prof = energy_profile(a);
    if (prof.p != p || prof.r != 2 * s - p + 1) {
      ++rejected;
      continue;
    }
    found.push_back(x);
    result.roots.push_back(std::move(a));
  }

  std::sort(result.roots.begin(), result.roots.end(),
            [p](const RKCoefficients& l, const RKCoefficients& r) { return l[p + 1] < r[p + 1]; });

  if (result.roots.empty()) {
    result.diagnostics.push_back("no convergent seed for (s=" + std::to_string(s) + ", p=" + std::to_string(p) +
                                 ")");
  }
  if (singular > 0) result.diagnostics.push_back(std::to_string(singular) + " seed(s) hit a singular Jacobian");
  if (stalled > 0) result.diagnostics.push_back(std::to_string(stalled) + " seed(s) did not reach the residual tolerance");
  if (rejected > 0) result.diagnostics.push_back(std::to_string(rejected) + " root(s) rejected for wrong (p, r)");
  return result;
}

}  // namespace escrk
