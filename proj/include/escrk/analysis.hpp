#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "escrk/errors.hpp"
#include "escrk/integrator.hpp"
#include "escrk/rk_core.hpp"

namespace escrk {

/// Errors below this are treated as round-off when computing orders.
inline constexpr double kRoundoffFloor = 5e-16;

struct ErrorNorms {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps_inf = 0.0;
};

/// eps1 = spacing * sum|e|, eps2 = spacing * sqrt(sum e^2), eps_inf = max|e|.
/// The spacing multiplies outside the root, so eps2 picks up an extra half
/// order relative to eps1 when the sample count scales with resolution.
[[nodiscard]] inline ErrorNorms error_norms(std::span<const double> errors, double spacing) {
  if (errors.empty()) throw std::invalid_argument("error_norms: no samples");
  if (!(spacing > 0.0)) throw std::invalid_argument("error_norms: spacing must be positive");
  double l1 = 0.0, l2 = 0.0, linf = 0.0;
  for (double e : errors) {
    const double a = std::abs(e);
    l1 += a;
    l2 += e * e;
    linf = std::max(linf, a);
  }
  return {spacing * l1, spacing * std::sqrt(l2), linf};
}

/// Signed (E_T - E_0) / E_0.
[[nodiscard]] inline double relative_energy_deviation(double e0, double et) {
  if (e0 == 0.0) throw std::invalid_argument("relative_energy_deviation: initial energy is zero");
  return (et - e0) / e0;
}

struct ConvergenceRow {
  std::size_t n = 0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double eps_inf = 0.0;
  double eps_e = 0.0;
  std::optional<double> order1, order2, order_inf, order_e;
  bool unstable = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
};

namespace detail {
[[nodiscard]] inline std::optional<double> pair_order(double coarse, double fine, bool usable) {
  if (!usable) return std::nullopt;
  const double c = std::abs(coarse), f = std::abs(fine);
  if (f < kRoundoffFloor || c < kRoundoffFloor) return std::nullopt;
  return std::log2(c / f);
}
}  // namespace detail

/// Fills the order columns as log2 of consecutive error ratios. Rows must
/// be sorted with each resolution exactly double the previous one.
[[nodiscard]] inline ConvergenceTable convergence_orders(ConvergenceTable table) {
  auto& rows = table.rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].n != 2 * rows[i - 1].n) {
      throw std::invalid_argument("convergence_orders: resolutions must double between rows");
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.order1 = r.order2 = r.order_inf = r.order_e = std::nullopt;
    if (i == 0) continue;
    const auto& prev = rows[i - 1];
    const bool usable = !r.unstable && !prev.unstable;
    r.order1 = detail::pair_order(prev.eps1, r.eps1, usable);
    r.order2 = detail::pair_order(prev.eps2, r.eps2, usable);
    r.order_inf = detail::pair_order(prev.eps_inf, r.eps_inf, usable);
    r.order_e = detail::pair_order(prev.eps_e, r.eps_e, usable);
  }
  return table;
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t samples = 0;
};

[[nodiscard]] inline LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares_line: need >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("least_squares_line: degenerate abscissae");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx, x.size()};
}

/// Convergence order from a least-squares fit of log|eps| against log N.
/// The series is truncated at the first entry below `floor` (round-off has
/// taken over from there on). Returns nullopt with fewer than two points.
[[nodiscard]] inline std::optional<double> fitted_order(std::span<const std::size_t> n, std::span<const double> eps,
                                                        double floor = kRoundoffFloor) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < n.size() && i < eps.size(); ++i) {
    if (!(std::abs(eps[i]) >= floor) || !std::isfinite(eps[i])) break;
    lx.push_back(std::log2(static_cast<double>(n[i])));
    ly.push_back(std::log2(std::abs(eps[i])));
  }
  if (lx.size() < 2) return std::nullopt;
  return -least_squares_line(lx, ly).slope;
}

// ---------------------------------------------------------------------------
// Stability regions

struct ComplexWindow {
  double re_min = -6.0;
  double re_max = 1.0;
  double im_min = -5.0;
  double im_max = 5.0;
};

struct StabilityRegion {
  ComplexWindow window;
  std::size_t resolution = 0;
  std::vector<double> modulus;  ///< |G| row-major, rows along the imaginary axis
  std::vector<std::complex<double>> boundary;

  [[nodiscard]] std::complex<double> point(std::size_t row, std::size_t col) const noexcept {
    const double dr = (window.re_max - window.re_min) / static_cast<double>(resolution - 1);
    const double di = (window.im_max - window.im_min) / static_cast<double>(resolution - 1);
    return {window.re_min + static_cast<double>(col) * dr, window.im_min + static_cast<double>(row) * di};
  }
};

/// Samples |G(z)| on a resolution x resolution grid and extracts points
/// where |G| - 1 changes sign between horizontally or vertically adjacent
/// samples, by linear interpolation along that grid edge.
[[nodiscard]] inline StabilityRegion stability_region(const RKCoefficients& a, const ComplexWindow& window = {},
                                                      std::size_t resolution = 1024) {
  if (resolution < 16) throw std::invalid_argument("stability_region: resolution must be >= 16");
  if (!(window.re_max > window.re_min) || !(window.im_max > window.im_min)) {
    throw std::invalid_argument("stability_region: empty window");
  }
  StabilityRegion reg;
  reg.window = window;
  reg.resolution = resolution;
  reg.modulus.resize(resolution * resolution);
  for (std::size_t row = 0; row < resolution; ++row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      reg.modulus[row * resolution + col] = std::abs(amplification(a, reg.point(row, col)));
    }
  }
  const auto crossing = [&](std::size_t r0, std::size_t c0, std::size_t r1, std::size_t c1) {
    const double f0 = reg.modulus[r0 * resolution + c0] - 1.0;
    const double f1 = reg.modulus[r1 * resolution + c1] - 1.0;
    if ((f0 < 0.0) == (f1 < 0.0)) return;
    const double t = f0 / (f0 - f1);
    reg.boundary.push_back(reg.point(r0, c0) + t * (reg.point(r1, c1) - reg.point(r0, c0)));
  };
  for (std::size_t row = 0; row < resolution; ++row) {
    for (std::size_t col = 0; col < resolution; ++col) {
      if (col + 1 < resolution) crossing(row, col, row, col + 1);
      if (row + 1 < resolution) crossing(row, col, row + 1, col);
    }
  }
  return reg;
}

/// Sorts points by angle about their centroid.
inline void order_by_angle(std::vector<std::complex<double>>& pts) {
  if (pts.empty()) return;
  std::complex<double> centroid{};
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  std::stable_sort(pts.begin(), pts.end(), [centroid](const auto& l, const auto& r) {
    return std::arg(l - centroid) < std::arg(r - centroid);
  });
}

/// Length y* of the stable segment [0, i y*] of the imaginary axis.
///
/// Uses |G(iy)|^2 - 1 = sum_k b_k y^{2k} = y^{2m} Q(y) with Q(y) = sum_{k>=m}
/// b_k y^{2(k-m)}, so the sign near the origin is decided exactly by b_m
/// instead of by rounding in |G|. Returns 0 when b_m > 0 and y_max when Q
/// never turns positive on (0, y_max].
[[nodiscard]] inline double imaginary_axis_interval(const RKCoefficients& a, double y_max = 10.0,
                                                    double tol = 1e-14) {
  if (!(y_max > 0.0)) throw std::invalid_argument("imaginary_axis_interval: y_max must be positive");
  const auto b = energy_coefficients(a);
  const auto lead = leading_index(b);
  const std::size_t m = lead.m;
  if (b[m - 1] > 0.0) return 0.0;

  const auto q = [&](double y) {
    const double y2 = y * y;
    double acc = 0.0;
    for (std::size_t k = b.size(); k-- > m - 1;) acc = acc * y2 + b[k];
    return acc;
  };

  constexpr std::size_t scan = 4096;
  double lo = 0.0;
  double hi = -1.0;
  for (std::size_t i = 1; i <= scan; ++i) {
    const double y = y_max * static_cast<double>(i) / static_cast<double>(scan);
    if (q(y) > 0.0) {
      hi = y;
      break;
    }
    lo = y;
  }
  if (hi < 0.0) return y_max;
  while (hi - lo > tol * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (q(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

// ---------------------------------------------------------------------------
// Long-time energy drift

/// Least-squares line through (log10 t, log10 |eps_E(t)|), skipping t = 0
/// and samples below 1e-15.
[[nodiscard]] inline LineFit energy_decay_fit(const SimulationRecord& record) {
  if (record.times.size() != record.energies.size() || record.energies.size() < 10) {
    throw std::invalid_argument("energy_decay_fit: need at least 10 recorded samples");
  }
  const double e0 = record.energies.front();
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < record.times.size(); ++i) {
    const double t = record.times[i];
    if (!(t > 0.0)) continue;
    const double dev = std::abs(relative_energy_deviation(e0, record.energies[i]));
    if (dev < 1e-15) continue;
    lx.push_back(std::log10(t));
    ly.push_back(std::log10(dev));
  }
  if (lx.size() < 2) throw NumericalError("energy_decay_fit: energy exactly conserved to precision");
  return least_squares_line(lx, ly);
}

}  // namespace escrk
