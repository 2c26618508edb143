#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "escrk/integrator.hpp"

namespace escrk::problems {

struct MaxwellSpec {
  double x_lo = -5.0;
  double x_hi = 5.0;
  std::size_t nx = 2000;
  double lambda0 = 0.2;  ///< carrier wavelength [m]
  /// Decay rate alpha of the pulse envelope exp(-alpha x^2). The reference
  /// convergence tables for this benchmark correspond to alpha = 10.
  double envelope_rate = 10.0;
  double T = 1e-8;  ///< final time [s]
  double eps0 = 8.8541878128e-12;
  double mu0 = 1.25663706212e-6;

  [[nodiscard]] double c() const noexcept { return 1.0 / std::sqrt(eps0 * mu0); }
  [[nodiscard]] double dx() const noexcept { return (x_hi - x_lo) / static_cast<double>(nx); }
  /// Radius beyond which the envelope is below 1e-16.
  [[nodiscard]] double pulse_radius() const noexcept { return std::sqrt(16.0 * std::numbers::ln10 / envelope_rate); }
};

/// Initial pulse exp(-alpha x^2) sin(2 pi x / lambda0).
[[nodiscard]] inline double maxwell_pulse(const MaxwellSpec& spec, double x) noexcept {
  return std::exp(-spec.envelope_rate * x * x) * std::sin(2.0 * std::numbers::pi * x / spec.lambda0);
}

namespace detail {
inline void validate(const MaxwellSpec& spec) {
  if (spec.nx < 4) throw std::invalid_argument("Maxwell: need at least 4 cells");
  if (!(spec.x_hi > spec.x_lo) || !(spec.lambda0 > 0.0) || !(spec.envelope_rate > 0.0)) {
    throw std::invalid_argument("Maxwell: invalid geometry or pulse parameters");
  }
  if (!(spec.eps0 > 0.0) || !(spec.mu0 > 0.0) || !(spec.T >= 0.0)) {
    throw std::invalid_argument("Maxwell: invalid material constants or final time");
  }
  const double room = std::min(-spec.x_lo, spec.x_hi) - spec.pulse_radius();
  if (!(spec.c() * spec.T < room)) {
    throw std::invalid_argument("Maxwell: pulse reaches the PEC boundary before T");
  }
}
}  // namespace detail

/// Staggered-grid semi-discretisation with PEC walls. State layout is
/// [E_0..E_N, H_{1/2}..H_{N+1/2}]. E_0, E_N and H_{N+1/2} are held at zero:
/// their derivatives are zero and the interior stencil reads them as zero,
/// so L restricted to the interior unknowns is the curl block and L is
/// antisymmetric in the (eps0, mu0)-weighted inner product on the whole
/// vector.
class Maxwell {
 public:
  explicit Maxwell(const MaxwellSpec& spec) : spec_(spec) { detail::validate(spec); }

  [[nodiscard]] std::size_t nodes() const noexcept { return spec_.nx + 1; }
  [[nodiscard]] std::size_t dim() const noexcept { return 2 * nodes(); }
  [[nodiscard]] const MaxwellSpec& spec() const noexcept { return spec_; }

  [[nodiscard]] double e_node(std::size_t j) const noexcept { return spec_.x_lo + static_cast<double>(j) * spec_.dx(); }
  [[nodiscard]] double h_node(std::size_t j) const noexcept {
    return spec_.x_lo + (static_cast<double>(j) + 0.5) * spec_.dx();
  }

  void apply(std::span<const double> in, std::span<double> out) const noexcept {
    const std::size_t N = spec_.nx;
    const auto E = in.first(N + 1);
    const auto H = in.subspan(N + 1, N + 1);
    auto dE = out.first(N + 1);
    auto dH = out.subspan(N + 1, N + 1);
    const double se = 1.0 / (spec_.eps0 * spec_.dx());
    const double sh = 1.0 / (spec_.mu0 * spec_.dx());
    dE[0] = 0.0;
    dE[N] = 0.0;
    for (std::size_t j = 1; j < N; ++j) dE[j] = se * (H[j] - H[j - 1]);
    dH[0] = sh * E[1];
    for (std::size_t j = 1; j + 1 < N; ++j) dH[j] = sh * (E[j + 1] - E[j]);
    dH[N - 1] = -sh * E[N - 1];
    dH[N] = 0.0;
  }

  /// 1/2 (eps0 |E|^2 + mu0 |H|^2), plain Euclidean sums.
  [[nodiscard]] double energy(std::span<const double> u) const noexcept {
    const std::size_t n = nodes();
    double e = 0.0, h = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      e += u[j] * u[j];
      h += u[n + j] * u[n + j];
    }
    return 0.5 * (spec_.eps0 * e + spec_.mu0 * h);
  }

  [[nodiscard]] std::vector<double> initial_state() const {
    std::vector<double> u(dim(), 0.0);
    for (std::size_t j = 1; j < spec_.nx; ++j) u[j] = maxwell_pulse(spec_, e_node(j));
    return u;
  }

  /// d'Alembert solution: E = (phi(x+ct) + phi(x-ct))/2 and
  /// H = eps0 c (phi(x+ct) - phi(x-ct))/2.
  [[nodiscard]] std::vector<double> exact_state(double t) const {
    const std::size_t n = nodes();
    const double ct = spec_.c() * t;
    std::vector<double> u(dim(), 0.0);
    for (std::size_t j = 1; j < spec_.nx; ++j) {
      const double x = e_node(j);
      u[j] = 0.5 * (maxwell_pulse(spec_, x + ct) + maxwell_pulse(spec_, x - ct));
    }
    const double scale = 0.5 * spec_.eps0 * spec_.c();
    for (std::size_t j = 0; j < spec_.nx; ++j) {
      const double x = h_node(j);
      u[n + j] = scale * (maxwell_pulse(spec_, x + ct) - maxwell_pulse(spec_, x - ct));
    }
    return u;
  }

  [[nodiscard]] double exact_e(double t, double x) const noexcept {
    const double ct = spec_.c() * t;
    return 0.5 * (maxwell_pulse(spec_, x + ct) + maxwell_pulse(spec_, x - ct));
  }

  /// Upper bound 2c/dx on the weighted operator norm.
  [[nodiscard]] double norm_bound() const noexcept { return 2.0 * spec_.c() / spec_.dx(); }

  /// The (N+1)x(N+1) difference matrix C, row-major: 1/dx on the diagonal
  /// and -1/dx on the subdiagonal.
  [[nodiscard]] std::vector<double> curl_matrix() const {
    const std::size_t n = nodes();
    const double inv = 1.0 / spec_.dx();
    std::vector<double> C(n * n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      C[j * n + j] = inv;
      if (j > 0) C[j * n + j - 1] = -inv;
    }
    return C;
  }

 private:
  MaxwellSpec spec_;
};

[[nodiscard]] inline Maxwell maxwell_build(const MaxwellSpec& spec) { return Maxwell(spec); }

struct FdtdRecord {
  double dt = 0.0;
  /// Plain energy at integer steps, with H^n taken as the mean of the two
  /// neighbouring half-step fields. final_state holds [E^n; H^{n+1/2}].
  SimulationRecord plain;
  /// 1/2 (eps0 |E^n|^2 + mu0 <H^{n-1/2}, H^{n+1/2}>), the quantity the
  /// leapfrog conserves exactly.
  std::vector<double> staggered;
};

/// How the first magnetic half step is seeded from H(0) = 0.
enum class FdtdStart {
  zero,       ///< H^{1/2} = 0; reproduces the reference FDTD error norms
  half_step,  ///< H^{1/2} from a half step of the H equation (exact at Courant 1)
};

/// Yee leapfrog with dt = courant * dx / c. H^{-1/2} = H^{1/2} - (dt/mu0) D E^0
/// is the backward value consistent with the first update, which keeps the
/// staggered energy constant from step 0.
[[nodiscard]] inline FdtdRecord fdtd_run(const MaxwellSpec& spec, double courant, std::size_t n_steps,
                                         std::size_t record_every = 1, FdtdStart start = FdtdStart::zero) {
  if (!(courant > 0.0) || courant > 1.0) {
    throw std::invalid_argument("fdtd_run: Courant number must lie in (0, 1]");
  }
  if (record_every < 1) throw std::invalid_argument("fdtd_run: record_every must be >= 1");
  const Maxwell grid(spec);
  const std::size_t N = spec.nx;
  const double dx = spec.dx();
  const double dt = courant * dx / spec.c();
  const double ce = dt / (spec.eps0 * dx);
  const double ch = dt / (spec.mu0 * dx);

  const auto init = grid.initial_state();
  std::vector<double> E(init.begin(), init.begin() + static_cast<std::ptrdiff_t>(N + 1));
  std::vector<double> H(N + 1, 0.0);
  if (start == FdtdStart::half_step) {
    for (std::size_t j = 0; j < N; ++j) H[j] = 0.5 * ch * (E[j + 1] - E[j]);
  }
  std::vector<double> H_prev(H);
  for (std::size_t j = 0; j < N; ++j) H_prev[j] -= ch * (E[j + 1] - E[j]);

  FdtdRecord rec;
  rec.dt = dt;
  const auto record = [&](std::size_t n) {
    double e2 = 0.0, hh = 0.0, hm = 0.0;
    for (std::size_t j = 0; j <= N; ++j) {
      e2 += E[j] * E[j];
      hh += H_prev[j] * H[j];
      const double mid = 0.5 * (H_prev[j] + H[j]);
      hm += mid * mid;
    }
    rec.plain.steps.push_back(n);
    rec.plain.times.push_back(static_cast<double>(n) * dt);
    rec.plain.energies.push_back(0.5 * (spec.eps0 * e2 + spec.mu0 * hm));
    rec.staggered.push_back(0.5 * (spec.eps0 * e2 + spec.mu0 * hh));
  };

  record(0);
  for (std::size_t n = 1; n <= n_steps; ++n) {
    for (std::size_t j = 1; j < N; ++j) E[j] += ce * (H[j] - H[j - 1]);
    H_prev = H;
    for (std::size_t j = 0; j < N; ++j) H[j] += ch * (E[j + 1] - E[j]);
    if (n % record_every == 0 || n == n_steps) record(n);
  }

  rec.plain.initial_energy = rec.plain.energies.front();
  rec.plain.final_energy = rec.plain.energies.back();
  rec.plain.final_state = E;
  rec.plain.final_state.insert(rec.plain.final_state.end(), H.begin(), H.end());
  return rec;
}

}  // namespace escrk::problems
