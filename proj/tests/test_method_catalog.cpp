#include <cmath>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "escrk/method_catalog.hpp"

namespace {

using escrk::RKCoefficients;

double fact(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void expect_coefficients(const RKCoefficients& a, const std::vector<double>& expected, double tol = 1e-15) {
  ASSERT_EQ(a.stages() + 1, expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) EXPECT_NEAR(a[k], expected[k], tol) << "a_" << k;
}

TEST(Taylor, Examples) {
  expect_coefficients(escrk::taylor_method(4), {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0});
  expect_coefficients(escrk::taylor_method(1), {1.0, 1.0});
  const auto a3 = escrk::taylor_method(3);
  expect_coefficients(a3, {1.0, 1.0, 0.5, 1.0 / 6.0});
  EXPECT_EQ(escrk::energy_profile(a3).r, 3u);
  EXPECT_THROW((void)escrk::taylor_method(0), std::invalid_argument);
}

TEST(FamilyOneBelow, Examples) {
  EXPECT_NEAR(escrk::family_one_below(3)[3], 1.0 / 8.0, 1e-16);
  EXPECT_NEAR(escrk::family_one_below(5)[5], 1.0 / 144.0, 1e-17);
  const auto p7 = escrk::energy_profile(escrk::family_one_below(7));
  EXPECT_EQ(p7.p, 6u);
  EXPECT_EQ(p7.r, 9u);
  for (std::size_t s = 3; s <= 9; s += 2) {
    const auto prof = escrk::energy_profile(escrk::family_one_below(s));
    EXPECT_EQ(prof.p, s - 1);
    EXPECT_EQ(prof.r, s + 2);
  }
}

TEST(FamilyOneBelow, RejectsEvenOrUnit) {
  EXPECT_THROW((void)escrk::family_one_below(1), std::invalid_argument);
  EXPECT_THROW((void)escrk::family_one_below(4), std::invalid_argument);
}

TEST(FamilyTwoBelow, Examples) {
  const auto a6 = escrk::family_two_below(6);
  EXPECT_NEAR(a6[5], 3.0 / 40320.0 - 3.0 / 5040.0 + 1.0 / 120.0, 1e-17);
  EXPECT_NEAR(a6[5], 1.0 / 128.0, 1e-17);
  EXPECT_NEAR(a6[6], 1.0 / 1152.0, 1e-17);
  const auto p8 = escrk::energy_profile(escrk::family_two_below(8));
  EXPECT_EQ(p8.p, 6u);
  EXPECT_EQ(p8.r, 11u);
  const auto a8 = escrk::family_two_below(8);
  EXPECT_NEAR(a8[7], 3.0 / fact(10) - 3.0 / fact(9) + 1.0 / fact(7), 1e-18);
  EXPECT_NEAR(a8[8], 3.0 / fact(10) - 3.0 / fact(9) + 1.0 / fact(8), 1e-18);
}

TEST(FamilyTwoBelow, RejectsOddOrSmall) {
  EXPECT_THROW((void)escrk::family_two_below(5), std::invalid_argument);
  EXPECT_THROW((void)escrk::family_two_below(4), std::invalid_argument);
  EXPECT_THROW((void)escrk::family_two_below(7), std::invalid_argument);
}

TEST(Catalog, NineNamedMethods) {
  const auto& cat = escrk::catalog();
  ASSERT_EQ(cat.size(), 9u);
  std::set<std::string> names;
  for (const auto& m : cat) names.insert(m.name);
  EXPECT_EQ(names, (std::set<std::string>{"RK(3,2,5)", "RK(4,2,7)-a", "RK(4,2,7)-b", "RK(5,2,9)-a", "RK(5,2,9)-b",
                                          "RK(4,4,5)", "RK(5,4,7)", "RK(6,4,9)", "RK(7,4,11)"}));
}

TEST(Catalog, ClosedForms) {
  const double r2 = std::sqrt(2.0), r5 = std::sqrt(5.0), r10 = std::sqrt(10.0);
  const std::vector<double> p2{1.0, 1.0, 0.5};
  const std::vector<double> p4{1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
  const auto with = [](std::vector<double> head, std::vector<double> tail) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  expect_coefficients(escrk::method("RK(3,2,5)").coefficients, with(p2, {1.0 / 8.0}));
  expect_coefficients(escrk::method("RK(4,2,7)-a").coefficients, with(p2, {(2 - r2) / 4, (3 - 2 * r2) / 8}));
  expect_coefficients(escrk::method("RK(4,2,7)-b").coefficients, with(p2, {(2 + r2) / 4, (3 + 2 * r2) / 8}));
  expect_coefficients(escrk::method("RK(5,2,9)-a").coefficients,
                      with(p2, {(r5 - 1) / 8, (r5 - 2) / 8, (r5 - 2) * (r5 - 2) / (16 * (r5 - 1))}));
  expect_coefficients(escrk::method("RK(5,2,9)-b").coefficients, with(p2, {0.25, 0.125, 1.0 / 32}));
  expect_coefficients(escrk::method("RK(4,4,5)").coefficients, p4);
  expect_coefficients(escrk::method("RK(5,4,7)").coefficients, with(p4, {1.0 / 144}));
  expect_coefficients(escrk::method("RK(6,4,9)").coefficients, with(p4, {1.0 / 128, 1.0 / 1152}));
  expect_coefficients(escrk::method("RK(7,4,11)").coefficients,
                      with(p4, {(r10 - 2) / 144, (r10 - 3) / 144, (8 * r10 - 25) / 3456}));
}

TEST(Catalog, NamesRoundTrip) {
  for (const auto& m : escrk::catalog()) {
    unsigned s = 0, p = 0, r = 0;
    ASSERT_EQ(std::sscanf(m.name.c_str(), "RK(%u,%u,%u)", &s, &p, &r), 3);
    EXPECT_EQ(m.stages(), s) << m.name;
    EXPECT_EQ(escrk::solution_order(m.coefficients), p) << m.name;
    EXPECT_EQ(escrk::leading_index(escrk::energy_coefficients(m.coefficients)).r, r) << m.name;
  }
}

TEST(Catalog, TableTwoEntries) {
  const auto& m7 = escrk::method("RK(7,4,11)");
  const double b6 = -(std::sqrt(9610.0) - std::sqrt(9604.0)) / 248832.0;
  EXPECT_NEAR(m7.profile.coefficient(6), b6, 1e-12 * std::abs(b6));
  EXPECT_NEAR(m7.profile.coefficient(6), -1.2300e-7, 5e-12);
  const double r10 = std::sqrt(10.0);
  const double lambda7 = 4.0 * std::sqrt(3.0 * (31.0 * r10 - 98.0) / (5.0 * (253.0 - 80.0 * r10)));
  EXPECT_NEAR(*m7.profile.lambda, lambda7, 1e-12 * lambda7);

  const auto& m5 = escrk::method("RK(5,4,7)");
  EXPECT_NEAR(m5.profile.coefficient(4), -1.0 / 1728.0, 1e-12 / 1728.0);
  EXPECT_NEAR(*m5.profile.lambda, 2.0 * std::sqrt(3.0), 1e-10);

  const auto& m6 = escrk::method("RK(6,4,9)");
  EXPECT_NEAR(m6.profile.coefficient(5), -5.0 / 442368.0, 1e-12 * 5.0 / 442368.0);
  EXPECT_NEAR(*m6.profile.lambda, std::sqrt(15.0), 1e-10);

  EXPECT_NEAR(*escrk::method("RK(4,4,5)").profile.lambda, 2.0 * std::sqrt(2.0), 1e-10);
}

TEST(Catalog, SecondOrderFamilyNotStronglyStable) {
  for (const auto& m : escrk::catalog()) {
    if (m.profile.p != 2) continue;
    EXPECT_FALSE(m.profile.lambda.has_value()) << m.name;
    const double as = m.coefficients[m.stages()];
    EXPECT_DOUBLE_EQ(m.profile.coefficient(m.stages()), as * as);
  }
}

TEST(Catalog, LookupErrors) {
  EXPECT_EQ(escrk::find_method("RK(9,9,9)"), nullptr);
  EXPECT_THROW((void)escrk::method("RK(9,9,9)"), std::invalid_argument);
}

TEST(MakeMethod, ValidatesTriple) {
  EXPECT_NO_THROW((void)escrk::make_method("RK(4,4,5)", escrk::taylor_method(4)));
  EXPECT_THROW((void)escrk::make_method("RK(4,4,7)", escrk::taylor_method(4)), std::logic_error);
  EXPECT_THROW((void)escrk::make_method("RK(4,2,5)", escrk::taylor_method(4)), std::logic_error);
  EXPECT_THROW((void)escrk::make_method("RK4", escrk::taylor_method(4)), std::invalid_argument);
  EXPECT_THROW((void)escrk::make_method("RK(4,4,5)-c", escrk::taylor_method(4)), std::invalid_argument);
}

// --- numeric re-derivation --------------------------------------------------

void expect_roots_solve(const escrk::EscResult& res, std::size_t s, std::size_t p) {
  for (const auto& a : res.roots) {
    const auto b = escrk::energy_coefficients(a);
    for (std::size_t k = p / 2 + 1; k <= s - p / 2; ++k) EXPECT_LT(std::abs(b[k - 1]), 1e-12) << "b_" << k;
    const auto prof = escrk::energy_profile(a);
    EXPECT_EQ(prof.p, p);
    EXPECT_EQ(prof.r, 2 * s - p + 1);
  }
}

TEST(SolveEsc, SevenFour) {
  const auto res = escrk::solve_esc(7, 4);
  expect_roots_solve(res, 7, 4);
  // the positive root plus one with a_5..a_7 all negative
  ASSERT_EQ(res.roots.size(), 2u);
  const double r10 = std::sqrt(10.0);
  const auto& pos = res.roots.back();
  EXPECT_NEAR(pos[5], (r10 - 2) / 144, 1e-10);
  EXPECT_NEAR(pos[6], (r10 - 3) / 144, 1e-10);
  EXPECT_NEAR(pos[7], (8 * r10 - 25) / 3456, 1e-10);
  EXPECT_LT(res.roots.front()[5], 0.0);
  EXPECT_LT(res.roots.front()[6], 0.0);
  EXPECT_LT(res.roots.front()[7], 0.0);
}

TEST(SolveEsc, FourTwoBothBranches) {
  const auto res = escrk::solve_esc(4, 2);
  expect_roots_solve(res, 4, 2);
  ASSERT_EQ(res.roots.size(), 2u);
  const auto& a = escrk::method("RK(4,2,7)-a").coefficients;
  const auto& b = escrk::method("RK(4,2,7)-b").coefficients;
  for (std::size_t k = 3; k <= 4; ++k) {
    EXPECT_NEAR(res.roots[0][k], a[k], 1e-12);
    EXPECT_NEAR(res.roots[1][k], b[k], 1e-12);
  }
}

TEST(SolveEsc, FiveTwoBothBranches) {
  const auto res = escrk::solve_esc(5, 2);
  expect_roots_solve(res, 5, 2);
  ASSERT_EQ(res.roots.size(), 2u);
  const auto& a = escrk::method("RK(5,2,9)-a").coefficients;
  const auto& b = escrk::method("RK(5,2,9)-b").coefficients;
  for (std::size_t k = 3; k <= 5; ++k) {
    EXPECT_NEAR(res.roots[0][k], a[k], 1e-12);
    EXPECT_NEAR(res.roots[1][k], b[k], 1e-12);
  }
}

TEST(SolveEsc, FiveFour) {
  const auto res = escrk::solve_esc(5, 4);
  expect_roots_solve(res, 5, 4);
  ASSERT_EQ(res.roots.size(), 1u);
  EXPECT_NEAR(res.roots[0][5], 1.0 / 144.0, 1e-14);
}

TEST(SolveEsc, SixFourContainsKnownRoot) {
  const auto res = escrk::solve_esc(6, 4);
  expect_roots_solve(res, 6, 4);
  const bool found = std::any_of(res.roots.begin(), res.roots.end(), [](const RKCoefficients& a) {
    return std::abs(a[5] - 1.0 / 128) < 1e-12 && std::abs(a[6] - 1.0 / 1152) < 1e-12;
  });
  EXPECT_TRUE(found);
}

TEST(SolveEsc, Deterministic) {
  const auto r1 = escrk::solve_esc(7, 4);
  const auto r2 = escrk::solve_esc(7, 4);
  ASSERT_EQ(r1.roots.size(), r2.roots.size());
  for (std::size_t i = 0; i < r1.roots.size(); ++i) {
    for (std::size_t k = 0; k <= 7; ++k) EXPECT_EQ(r1.roots[i][k], r2.roots[i][k]);
  }
}

TEST(SolveEsc, PreconditionErrors) {
  EXPECT_THROW((void)escrk::solve_esc(5, 3), std::invalid_argument);
  EXPECT_THROW((void)escrk::solve_esc(4, 4), std::invalid_argument);
  EXPECT_THROW((void)escrk::solve_esc(8, 4), std::invalid_argument);
  EXPECT_THROW((void)escrk::solve_esc(3, 0), std::invalid_argument);
}

TEST(SolveEsc, NoSeedsGivesDiagnostic) {
  escrk::EscOptions opt;
  opt.random_seeds = 0;
  opt.max_iterations = 0;
  const auto res = escrk::solve_esc(7, 4, opt);
  EXPECT_TRUE(res.roots.empty());
  ASSERT_FALSE(res.diagnostics.empty());
  EXPECT_NE(res.diagnostics.front().find("no convergent seed"), std::string::npos);
}

}  // namespace
