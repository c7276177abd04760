#include "formc/quadrature.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace formc;

namespace
{

double factorial(int n)
{
  double r = 1;
  for (int i = 2; i <= n; ++i)
    r *= i;
  return r;
}

// Exact integral of x^a y^b z^c over the unit simplex.
double moment(CellType cell, int a, int b, int c)
{
  if (cell == CellType::triangle)
    return factorial(a) * factorial(b) / factorial(a + b + 2);
  return factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 3);
}

double integrate(const QuadratureRule& rule, int a, int b, int c)
{
  double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
  {
    const auto& x = rule.points[i];
    s += rule.weights[i] * std::pow(x[0], a) * std::pow(x[1], b) * std::pow(x[2], c);
  }
  return s;
}

} // namespace

TEST(GaussJacobi, Examples)
{
  auto [x1, w1] = gauss_jacobi_1d(1, 0);
  EXPECT_NEAR(x1[0], 0.5, 1e-15);
  EXPECT_NEAR(w1[0], 1.0, 1e-15);

  auto [x2, w2] = gauss_jacobi_1d(2, 0);
  EXPECT_NEAR(x2[0], 0.5 - 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(x2[1], 0.5 + 0.5 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(w2[0], 0.5, 1e-15);
  EXPECT_NEAR(w2[0] * std::pow(x2[0], 3) + w2[1] * std::pow(x2[1], 3), 0.25, 1e-15);

  auto [x3, w3] = gauss_jacobi_1d(1, 1);
  EXPECT_NEAR(x3[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(w3[0], 0.5, 1e-15);
  EXPECT_NEAR(w3[0] * x3[0], 1.0 / 6.0, 1e-15);
}

TEST(GaussJacobi, MomentsExactToDegree2nMinus1)
{
  for (int alpha = 0; alpha <= 2; ++alpha)
    for (int n = 1; n <= 10; ++n)
    {
      auto [x, w] = gauss_jacobi_1d(n, alpha);
      for (int k = 0; k <= 2 * n - 1; ++k)
      {
        // int_0^1 x^k (1-x)^alpha dx = k! alpha! / (k+alpha+1)!
        const double exact = factorial(k) * factorial(alpha) / factorial(k + alpha + 1);
        double s = 0;
        for (int i = 0; i < n; ++i)
          s += w[i] * std::pow(x[i], k);
        EXPECT_NEAR(s, exact, 1e-14 * std::max(1.0, exact)) << alpha << " " << n << " " << k;
      }
    }
}

TEST(SimplexRule, Examples)
{
  auto r = simplex_rule(CellType::triangle, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_DOUBLE_EQ(r.weights[0], 0.5);
  EXPECT_EQ(simplex_rule(CellType::tetrahedron, 2).size(), 8u);
  auto r4 = simplex_rule(CellType::triangle, 4);
  EXPECT_EQ(r4.size(), 9u);
  EXPECT_NEAR(integrate(r4, 2, 2, 0), 1.0 / 180.0, 1e-14);
}

TEST(SimplexRule, VolumeAndPositiveWeights)
{
  for (CellType cell : {CellType::triangle, CellType::tetrahedron})
    for (int p = 0; p <= 12; ++p)
    {
      auto r = simplex_rule(cell, p);
      double sum = 0;
      for (double w : r.weights)
      {
        EXPECT_GT(w, 0.0);
        sum += w;
      }
      EXPECT_NEAR(sum, ReferenceCell{cell}.volume(), 1e-12);
    }
}

TEST(SimplexRule, ExactnessSweep)
{
  std::mt19937 rng(5);
  for (CellType cell : {CellType::triangle, CellType::tetrahedron})
    for (int p = 0; p <= 8; ++p)
    {
      auto r = simplex_rule(cell, p);
      for (int trial = 0; trial < 30; ++trial)
      {
        std::uniform_int_distribution<int> total(0, p);
        const int t = total(rng);
        std::uniform_int_distribution<int> first(0, t);
        const int a = first(rng);
        std::uniform_int_distribution<int> second(0, t - a);
        const int b = cell == CellType::triangle ? t - a : second(rng);
        const int c = cell == CellType::triangle ? 0 : t - a - b;
        const double exact = moment(cell, a, b, c);
        EXPECT_NEAR(integrate(r, a, b, c), exact, 1e-12 * exact);
      }
    }
}

TEST(SimplexRule, PointsPerDirection)
{
  EXPECT_EQ(points_per_direction(0), 1);
  EXPECT_EQ(points_per_direction(2), 2);
  for (int p = 1; p < 20; ++p)
    EXPECT_GE(points_per_direction(p), points_per_direction(p - 1));
  EXPECT_EQ(rule_for_form(CellType::triangle, 1).size(), 1u);
  EXPECT_EQ(rule_for_form(CellType::triangle, 4, 1).size(), 1u);
  EXPECT_EQ(rule_for_form(CellType::triangle, 0).m, 1);
}
