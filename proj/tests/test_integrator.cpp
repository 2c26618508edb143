#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "escrk/integrator.hpp"
#include "escrk/problems/maxwell.hpp"
#include "escrk/problems/oscillator.hpp"

namespace {

using escrk::problems::Oscillator;
using escrk::problems::OscillatorSpec;

Oscillator unit_oscillator(double a = 1.0) {
  OscillatorSpec spec;
  spec.a = a;
  return Oscillator(spec);
}

/// u' = S u with S antisymmetric and H = I.
escrk::LinearSystem dense_system(const Eigen::MatrixXd& S) {
  escrk::LinearSystem sys;
  sys.dimension = static_cast<std::size_t>(S.rows());
  sys.apply_L = [S](std::span<const double> in, std::span<double> out) {
    const Eigen::Map<const Eigen::VectorXd> x(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size())) = S * x;
  };
  sys.energy_fn = [](std::span<const double> u) {
    double e = 0.0;
    for (double v : u) e += v * v;
    return 0.5 * e;
  };
  return sys;
}

Eigen::MatrixXd random_antisymmetric(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = g(rng);
  return A - A.transpose();
}

TEST(RkStep, ZeroStepIsIdentity) {
  const auto osc = unit_oscillator();
  const std::vector<double> u{0.3, -0.7};
  for (const auto& m : escrk::catalog()) {
    const auto c = escrk::stage_ratios(m.coefficients);
    EXPECT_EQ(escrk::rk_step(osc, c, 0.0, u), u) << m.name;
  }
}

TEST(RkStep, ClassicalRk4OnOscillator) {
  const auto osc = unit_oscillator();
  const auto c = escrk::stage_ratios(escrk::method("RK(4,4,5)").coefficients);
  for (double h : {0.01, 0.1, 0.5, 1.3}) {
    const auto u = escrk::rk_step(osc, c, h, std::vector<double>{1.0, 0.0});
    EXPECT_NEAR(u[0], 1.0 - h * h / 2 + h * h * h * h / 24, 1e-15);
    EXPECT_NEAR(u[1], -h + h * h * h / 6, 1e-15);
  }
}

TEST(RkStep, ForwardEuler) {
  const auto osc = unit_oscillator(2.0);
  const std::vector<double> u{0.5, 1.5};
  const auto out = escrk::rk_step(osc, std::vector<double>{1.0}, 0.1, u);
  EXPECT_DOUBLE_EQ(out[0], 0.5 + 0.1 * 1.5);
  EXPECT_DOUBLE_EQ(out[1], 1.5 - 0.1 * 4.0 * 0.5);
}

TEST(RkStep, OverflowIsReported) {
  escrk::LinearSystem sys;
  sys.dimension = 1;
  sys.apply_L = [](std::span<const double> in, std::span<double> out) { out[0] = in[0] * 1e300; };
  sys.energy_fn = [](std::span<const double> u) { return 0.5 * u[0] * u[0]; };
  escrk::LowStorageStepper stepper(escrk::method("RK(4,4,5)").coefficients, 1);
  std::vector<double> u{1e10};
  try {
    stepper.step(sys, 1.0, u, 17);
    FAIL() << "expected throw";
  } catch (const escrk::StageOverflow& e) {
    EXPECT_EQ(e.step(), 17u);
    EXPECT_GE(e.stage(), 1u);
    EXPECT_NE(std::string(e.what()).find("overflow/NaN in stage"), std::string::npos);
  }
}

TEST(RkStep, StateSizeMismatch) {
  const auto osc = unit_oscillator();
  escrk::LowStorageStepper stepper(escrk::method("RK(4,4,5)").coefficients, 3);
  std::vector<double> u{1.0, 0.0};
  EXPECT_THROW(stepper.step(osc, 0.1, u), std::invalid_argument);
}

TEST(RkStep, MatchesDenseMatrixPowers) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> step(0.05, 0.5);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::Index n = dim(rng);
    const Eigen::MatrixXd S = random_antisymmetric(rng, n);
    const auto sys = dense_system(S);
    const Eigen::VectorXd u = Eigen::VectorXd::Random(n);
    const double h = step(rng);
    for (const auto& m : escrk::catalog()) {
      Eigen::VectorXd expected = Eigen::VectorXd::Zero(n);
      Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
      for (std::size_t k = 0; k <= m.stages(); ++k) {
        expected += m.coefficients[k] * (power * u);
        power = power * (h * S);
      }
      const auto got = escrk::rk_step(sys, escrk::stage_ratios(m.coefficients), h,
                                      std::vector<double>(u.data(), u.data() + n));
      const Eigen::Map<const Eigen::VectorXd> g(got.data(), n);
      EXPECT_LE((g - expected).norm(), 1e-12 * expected.norm()) << m.name << " n=" << n;
    }
  }
}

template <class Sys>
void check_linearity(const Sys& sys, std::mt19937_64& rng, double h) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const std::size_t n = sys.dim();
  std::vector<double> x(n), y(n), z(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = d(rng);
    y[i] = d(rng);
  }
  const double alpha = 0.7, beta = -1.9;
  for (std::size_t i = 0; i < n; ++i) z[i] = alpha * x[i] + beta * y[i];
  for (const auto& m : escrk::catalog()) {
    const auto c = escrk::stage_ratios(m.coefficients);
    const auto sx = escrk::rk_step(sys, c, h, x);
    const auto sy = escrk::rk_step(sys, c, h, y);
    const auto sz = escrk::rk_step(sys, c, h, z);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err = std::max(err, std::abs(sz[i] - (alpha * sx[i] + beta * sy[i])));
      scale = std::max(scale, std::abs(sz[i]));
    }
    EXPECT_LE(err, 1e-12 * scale) << m.name;
  }
}

TEST(RkStep, LinearOnOscillatorAndMaxwell) {
  std::mt19937_64 rng(11);
  check_linearity(unit_oscillator(1.5), rng, 0.4);
  escrk::problems::MaxwellSpec spec;
  spec.nx = 32;
  const escrk::problems::Maxwell mx(spec);
  check_linearity(mx, rng, 0.5 * spec.dx() / spec.c());
}

TEST(LinearSystem, EnergyIsStationaryAlongL) {
  // <u, L u>_H = 0, so E(u + eps L u) - E(u) = O(eps^2)
  std::mt19937_64 rng(5);
  escrk::problems::MaxwellSpec spec;
  spec.nx = 16;
  const escrk::problems::Maxwell mx(spec);
  std::vector<double> u = mx.initial_state();
  for (std::size_t i = mx.nodes(); i < mx.dim() - 1; ++i) u[i] = 1e-3 * std::sin(static_cast<double>(i));
  std::vector<double> Lu(u.size()), probe(u.size());
  mx.apply(u, Lu);
  const double e0 = mx.energy(u);
  const double scale = spec.dx() / spec.c();
  for (double eps : {1e-2, 1e-3}) {
    for (std::size_t i = 0; i < u.size(); ++i) probe[i] = u[i] + eps * scale * Lu[i];
    const double eps2 = eps * eps * 2.0 * mx.energy(std::vector<double>(Lu.begin(), Lu.end())) * scale * scale;
    EXPECT_NEAR(mx.energy(probe) - e0, 0.5 * eps2, 1e-10 * e0);
  }
}

TEST(Integrate, EnergyRecursionOnUnitOscillator) {
  const auto osc = unit_oscillator();
  const auto u0 = osc.initial_state();
  for (const auto& m : escrk::catalog()) {
    for (double h : {0.1, 0.4, 1.0}) {
      const std::size_t n = 200;
      const auto rec = escrk::integrate(osc, m, h, u0, n);
      double q = 1.0;
      const auto& b = m.profile.b;
      for (std::size_t k = 1; k <= b.size(); ++k) q += b[k - 1] * std::pow(h, 2.0 * static_cast<double>(k));
      for (std::size_t i = 0; i < rec.energies.size(); ++i) {
        const double expected = rec.initial_energy * std::pow(q, static_cast<double>(rec.steps[i]));
        EXPECT_NEAR(rec.energies[i], expected, 1e-12 * expected) << m.name << " h=" << h << " n=" << rec.steps[i];
      }
    }
  }
}

TEST(Integrate, BoundaryStepConservesEnergy) {
  const auto osc = unit_oscillator();
  const auto rec = escrk::integrate(osc, escrk::method("RK(4,4,5)"), 2.0 * std::numbers::sqrt2,
                                    osc.initial_state(), 1000);
  for (double e : rec.energies) EXPECT_NEAR(e, rec.initial_energy, 1e-12);
}

TEST(Integrate, RecordingSchedule) {
  const auto osc = unit_oscillator();
  const auto rec = escrk::integrate(osc, escrk::method("RK(5,4,7)"), 0.1, osc.initial_state(), 10, 4);
  EXPECT_EQ(rec.steps, (std::vector<std::size_t>{0, 4, 8, 10}));
  ASSERT_EQ(rec.times.size(), 4u);
  EXPECT_DOUBLE_EQ(rec.times[3], 1.0);
  EXPECT_EQ(rec.energies.front(), rec.initial_energy);
  EXPECT_EQ(rec.energies.back(), rec.final_energy);
  EXPECT_DOUBLE_EQ(rec.initial_energy, 0.5);

  std::vector<std::size_t> seen;
  (void)escrk::integrate(osc, escrk::method("RK(5,4,7)"), 0.1, osc.initial_state(), 5, 1,
                         [&](std::size_t n, double, std::span<const double>) { seen.push_back(n); });
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Integrate, Errors) {
  const auto osc = unit_oscillator();
  const auto& m = escrk::method("RK(4,4,5)");
  const auto u0 = osc.initial_state();
  EXPECT_THROW((void)escrk::integrate(osc, m, 0.1, u0, 0), std::invalid_argument);
  EXPECT_THROW((void)escrk::integrate(osc, m, 0.1, u0, 5, 0), std::invalid_argument);
  EXPECT_THROW((void)escrk::integrate(osc, m, 0.1, std::vector<double>{1.0}, 5), std::invalid_argument);
  const auto rec = escrk::integrate(osc, m, 0.0, u0, 1);
  EXPECT_EQ(rec.final_energy, rec.initial_energy);
}

TEST(Integrate, OverflowCarriesStepIndex) {
  const auto osc = unit_oscillator(1e100);
  try {
    (void)escrk::integrate(osc, escrk::method("RK(3,2,5)"), 1.0, std::vector<double>{1.0, 0.0}, 50);
    FAIL() << "expected throw";
  } catch (const escrk::StageOverflow& e) {
    EXPECT_GE(e.step(), 1u);
  }
}

TEST(StrongStability, EnergyMonotoneBelowBoundGrowsAbove) {
  const auto osc = unit_oscillator();
  for (const auto& m : escrk::catalog()) {
    if (!m.profile.lambda) continue;
    const double lambda = *m.profile.lambda;
    auto rec = escrk::integrate(osc, m, lambda * (1.0 - 1e-9), osc.initial_state(), 1000);
    for (std::size_t i = 1; i < rec.energies.size(); ++i) {
      EXPECT_LE(rec.energies[i], rec.energies[i - 1]) << m.name << " step " << i;
    }
    rec = escrk::integrate(osc, m, lambda * 1.05, osc.initial_state(), 1000);
    EXPECT_GT(rec.final_energy, rec.initial_energy) << m.name;
  }
}

TEST(NormEstimate, Oscillator) {
  auto est = escrk::operator_norm_estimate(unit_oscillator(1.0));
  EXPECT_TRUE(est.converged);
  EXPECT_NEAR(est.value, 1.0, 1e-10);
  est = escrk::operator_norm_estimate(unit_oscillator(2.0));
  EXPECT_NEAR(est.value, 2.0, 1e-10);
}

TEST(NormEstimate, MaxwellBelowBound) {
  escrk::problems::MaxwellSpec spec;
  spec.nx = 64;
  const escrk::problems::Maxwell mx(spec);
  const auto est = escrk::operator_norm_estimate(mx);
  EXPECT_LE(est.value, mx.norm_bound() * (1.0 + 1e-12));
  EXPECT_GE(est.value, 0.995 * mx.norm_bound());
}

TEST(NormEstimate, DenseAgreesWithSvd) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd S = random_antisymmetric(rng, 6);
  const auto est = escrk::operator_norm_estimate(dense_system(S), 1e-13, 20000);
  const double sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(S).singularValues()(0);
  EXPECT_NEAR(est.value, sigma, 1e-8 * sigma);
}

TEST(NormEstimate, PersistentBreakdown) {
  escrk::LinearSystem sys;
  sys.dimension = 2;
  sys.apply_L = [](std::span<const double>, std::span<double> out) { out[0] = out[1] = 0.0; };
  sys.energy_fn = [](std::span<const double> u) { return 0.5 * (u[0] * u[0] + u[1] * u[1]); };
  EXPECT_THROW((void)escrk::operator_norm_estimate(sys), escrk::NumericalError);
}

TEST(MaxStableStep, Examples) {
  EXPECT_NEAR(escrk::max_stable_step(escrk::method("RK(4,4,5)"), 1.0), 2.0 * std::numbers::sqrt2, 1e-14);
  EXPECT_NEAR(escrk::max_stable_step(escrk::method("RK(5,4,7)"), 2.0), std::sqrt(3.0), 1e-14);

  escrk::problems::MaxwellSpec spec;
  const escrk::problems::Maxwell mx(spec);
  const auto& m7 = escrk::method("RK(7,4,11)");
  const double dt = escrk::max_stable_step(m7, mx.norm_bound());
  EXPECT_NEAR(dt, *m7.profile.lambda * spec.dx() / (2.0 * spec.c()), 1e-25);
  EXPECT_NEAR(spec.c() * dt / spec.dx(), 2.03, 0.005);
}

TEST(MaxStableStep, Errors) {
  EXPECT_THROW((void)escrk::max_stable_step(escrk::method("RK(3,2,5)"), 1.0), std::domain_error);
  EXPECT_THROW((void)escrk::max_stable_step(escrk::method("RK(4,4,5)"), 0.0), std::invalid_argument);
}

}  // namespace
