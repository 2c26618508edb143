#pragma once

// Drivers for the three benchmark problems: one resolution in, one row of a
// convergence table out.
//
// Error norms use spacing 1/N (time steps for the oscillator, cells for the
// PDEs), i.e. the grid spacing normalised by the length of the interval.
// Oscillator errors are taken on x over the whole time history; PDE errors
// on the primary field at the final time only.

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "escrk/analysis.hpp"
#include "escrk/errors.hpp"
#include "escrk/integrator.hpp"
#include "escrk/method_catalog.hpp"
#include "escrk/problems/maxwell.hpp"
#include "escrk/problems/oscillator.hpp"
#include "escrk/problems/peridynamics.hpp"

namespace escrk {

struct StudyPoint {
  std::size_t n = 0;        ///< resolution (N_t or N_x)
  std::size_t steps = 0;    ///< time steps taken
  double dt = 0.0;          ///< nominal step
  double final_time = 0.0;  ///< time the errors are measured at
  ErrorNorms norms;
  double eps_e = 0.0;
  bool unstable = false;
};

[[nodiscard]] inline ConvergenceRow to_row(const StudyPoint& p) {
  ConvergenceRow r;
  r.n = p.n;
  r.eps1 = p.norms.eps1;
  r.eps2 = p.norms.eps2;
  r.eps_inf = p.norms.eps_inf;
  r.eps_e = p.eps_e;
  r.unstable = p.unstable;
  return r;
}

/// A run whose state stayed finite but whose norms or energy overflowed is
/// as unusable as one that overflowed a stage.
inline void flag_overflow(StudyPoint& p) noexcept {
  const auto& n = p.norms;
  if (!std::isfinite(n.eps1) || !std::isfinite(n.eps2) || !std::isfinite(n.eps_inf) || !std::isfinite(p.eps_e)) {
    p.unstable = true;
  }
}

/// Number of steps of size at most `dt_max` needed to reach T.
[[nodiscard]] inline std::size_t steps_to_reach(double T, double dt_max) {
  if (!(T > 0.0) || !(dt_max > 0.0)) throw std::invalid_argument("steps_to_reach: T and dt must be positive");
  return static_cast<std::size_t>(std::ceil(T / dt_max * (1.0 - 1e-12)));
}

// --- harmonic oscillator ---------------------------------------------------

[[nodiscard]] inline StudyPoint oscillator_study(const MethodDescriptor& method, const problems::OscillatorSpec& spec,
                                                 std::size_t n_t) {
  if (n_t < 1) throw std::invalid_argument("oscillator_study: N_t must be >= 1");
  const problems::Oscillator osc(spec);
  const double h = spec.T / static_cast<double>(n_t);
  std::vector<double> errors;
  errors.reserve(n_t + 1);
  const auto observe = [&](std::size_t, double t, std::span<const double> u) {
    errors.push_back(u[0] - osc.exact(t)[0]);
  };
  StudyPoint pt;
  pt.n = n_t;
  pt.steps = n_t;
  pt.dt = h;
  pt.final_time = spec.T;
  const auto u0 = osc.initial_state();
  try {
    const auto rec = integrate(osc, method, h, std::span<const double>(u0), n_t, n_t, observe);
    pt.norms = error_norms(errors, 1.0 / static_cast<double>(n_t));
    pt.eps_e = relative_energy_deviation(rec.initial_energy, rec.final_energy);
  } catch (const StageOverflow&) {
    pt.unstable = true;
  }
  flag_overflow(pt);
  return pt;
}

[[nodiscard]] inline SimulationRecord oscillator_history(const MethodDescriptor& method,
                                                         const problems::OscillatorSpec& spec, std::size_t n_t,
                                                         std::size_t record_every = 1) {
  const problems::Oscillator osc(spec);
  const auto u0 = osc.initial_state();
  return integrate(osc, method, spec.T / static_cast<double>(n_t), std::span<const double>(u0), n_t, record_every);
}

// --- peridynamics ----------------------------------------------------------

enum class Landing {
  shorten_last,  ///< ceil(T/dt) steps, the last one shortened to end at T
  overshoot,     ///< ceil(T/dt) full steps, errors measured at the end time
};

[[nodiscard]] inline StudyPoint peridynamics_study(const MethodDescriptor& method, problems::PeridynamicsSpec spec,
                                                   std::size_t nx, Landing landing = Landing::shorten_last,
                                                   double quad_tol = 1e-12) {
  spec.nx = nx;
  const problems::Peridynamics pd(spec);
  const double dt = spec.dx();
  const std::size_t steps = steps_to_reach(spec.T, dt);
  StudyPoint pt;
  pt.n = nx;
  pt.steps = steps;
  pt.dt = dt;

  auto u = pd.initial_state();
  const double e0 = pd.energy(u);
  LowStorageStepper stepper(method.coefficients, u.size());
  double t = 0.0;
  try {
    for (std::size_t n = 1; n <= steps; ++n) {
      double h = dt;
      if (n == steps && landing == Landing::shorten_last) h = spec.T - t;
      stepper.step(pd, h, std::span<double>(u), n);
      t = (n == steps && landing == Landing::shorten_last) ? spec.T : t + h;
    }
  } catch (const StageOverflow&) {
    pt.unstable = true;
    return pt;
  }
  pt.final_time = t;
  std::vector<double> errors(nx);
  for (std::size_t i = 0; i < nx; ++i) errors[i] = u[i] - problems::pd_exact(pd.center(i), t, quad_tol);
  pt.norms = error_norms(errors, 1.0 / static_cast<double>(nx));
  pt.eps_e = relative_energy_deviation(e0, pd.energy(u));
  flag_overflow(pt);
  return pt;
}

// --- Maxwell ---------------------------------------------------------------

/// Courant number at the strong-stability limit: c dt / dx = lambda / 2.
[[nodiscard]] inline double maxwell_limit_courant(const MethodDescriptor& method) {
  if (!method.profile.lambda) throw std::domain_error(method.name + " has no strong-stability bound");
  return 0.5 * *method.profile.lambda;
}

/// RK run with dt chosen as the largest step not exceeding courant*dx/c
/// that lands exactly on T.
[[nodiscard]] inline StudyPoint maxwell_study(const MethodDescriptor& method, problems::MaxwellSpec spec,
                                              std::size_t nx, std::optional<double> courant = std::nullopt) {
  spec.nx = nx;
  const problems::Maxwell mx(spec);
  const double cfl = courant.value_or(maxwell_limit_courant(method));
  if (!(cfl > 0.0)) throw std::invalid_argument("maxwell_study: Courant number must be positive");
  const std::size_t steps = steps_to_reach(spec.T, cfl * spec.dx() / spec.c());
  const double dt = spec.T / static_cast<double>(steps);
  StudyPoint pt;
  pt.n = nx;
  pt.steps = steps;
  pt.dt = dt;
  pt.final_time = spec.T;
  const auto u0 = mx.initial_state();
  try {
    const auto rec = integrate(mx, method, dt, std::span<const double>(u0), steps, steps);
    std::vector<double> errors(nx + 1);
    for (std::size_t j = 0; j <= nx; ++j) errors[j] = rec.final_state[j] - mx.exact_e(spec.T, mx.e_node(j));
    pt.norms = error_norms(errors, 1.0 / static_cast<double>(nx));
    pt.eps_e = relative_energy_deviation(rec.initial_energy, rec.final_energy);
  } catch (const StageOverflow&) {
    pt.unstable = true;
  }
  flag_overflow(pt);
  return pt;
}

/// Fixed-step RK run of `iterations` steps at the given Courant number,
/// recording the energy every `record_every` steps.
[[nodiscard]] inline SimulationRecord maxwell_history(const MethodDescriptor& method, problems::MaxwellSpec spec,
                                                      std::size_t nx, double courant, std::size_t iterations,
                                                      std::size_t record_every = 1) {
  spec.nx = nx;
  spec.T = 0.0;  // the run length is set by `iterations`, not by T
  const problems::Maxwell mx(spec);
  const double dt = courant * spec.dx() / spec.c();
  const auto u0 = mx.initial_state();
  return integrate(mx, method, dt, std::span<const double>(u0), iterations, record_every);
}

struct FdtdStudy {
  StudyPoint point;
  double staggered_drift = 0.0;  ///< max_n |E~_n - E~_0| / E~_0
};

/// Leapfrog baseline: dt = courant*dx/c exactly, round(T/dt) steps, errors
/// at the time actually reached. eps_E is reported on the staggered energy.
[[nodiscard]] inline FdtdStudy fdtd_study(problems::MaxwellSpec spec, std::size_t nx, double courant = 1.0,
                                          problems::FdtdStart start = problems::FdtdStart::zero) {
  spec.nx = nx;
  const problems::Maxwell mx(spec);
  const double dt = courant * spec.dx() / spec.c();
  const auto steps = static_cast<std::size_t>(std::llround(spec.T / dt));
  const auto rec = problems::fdtd_run(spec, courant, steps, 1, start);
  FdtdStudy out;
  auto& pt = out.point;
  pt.n = nx;
  pt.steps = steps;
  pt.dt = dt;
  pt.final_time = static_cast<double>(steps) * dt;
  std::vector<double> errors(nx + 1);
  for (std::size_t j = 0; j <= nx; ++j) errors[j] = rec.plain.final_state[j] - mx.exact_e(pt.final_time, mx.e_node(j));
  pt.norms = error_norms(errors, 1.0 / static_cast<double>(nx));
  const double e0 = rec.staggered.front();
  pt.eps_e = relative_energy_deviation(e0, rec.staggered.back());
  for (double e : rec.staggered) out.staggered_drift = std::max(out.staggered_drift, std::abs(e - e0) / e0);
  return out;
}

}  // namespace escrk
