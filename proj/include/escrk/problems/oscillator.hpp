#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace escrk::problems {

struct OscillatorSpec {
  double a = 1.0;  ///< angular frequency
  double x0 = 1.0;
  double v0 = 0.0;
  double T = 80.0;
};

/// x'' + a^2 x = 0 as u = [x, v], u' = [[0, 1], [-a^2, 0]] u, with
/// H = diag(a^2, 1).
class Oscillator {
 public:
  explicit Oscillator(const OscillatorSpec& spec) : spec_(spec) {
    if (!(spec.a > 0.0)) throw std::invalid_argument("Oscillator: a must be positive");
    if (!(spec.T > 0.0)) throw std::invalid_argument("Oscillator: T must be positive");
  }

  [[nodiscard]] std::size_t dim() const noexcept { return 2; }

  void apply(std::span<const double> in, std::span<double> out) const noexcept {
    out[0] = in[1];
    out[1] = -spec_.a * spec_.a * in[0];
  }

  [[nodiscard]] double energy(std::span<const double> u) const noexcept {
    return 0.5 * (spec_.a * spec_.a * u[0] * u[0] + u[1] * u[1]);
  }

  [[nodiscard]] std::vector<double> initial_state() const { return {spec_.x0, spec_.v0}; }

  [[nodiscard]] std::array<double, 2> exact(double t) const noexcept {
    const double a = spec_.a;
    return {spec_.x0 * std::cos(a * t) + (spec_.v0 / a) * std::sin(a * t),
            -a * spec_.x0 * std::sin(a * t) + spec_.v0 * std::cos(a * t)};
  }

  /// ||L||_H; L is a times an H-isometric rotation generator.
  [[nodiscard]] double norm_bound() const noexcept { return spec_.a; }

  [[nodiscard]] const OscillatorSpec& spec() const noexcept { return spec_; }

 private:
  OscillatorSpec spec_;
};

[[nodiscard]] inline Oscillator oscillator_build(const OscillatorSpec& spec) { return Oscillator(spec); }

}  // namespace escrk::problems
