#include "formc/dsl/typecheck.hpp"
#include "formc/kernel/emit.hpp"
#include "formc/kernel/geometry.hpp"
#include "formc/kernel/interpret.hpp"
#include "formc/lowering.hpp"
#include "formc/quadrature.hpp"
#include "formc/quadrature_rep.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace formc;
using namespace formc::kernel;

namespace
{

KernelIR quadrature_kernel(const std::string& form)
{
  return build_quadrature_kernel(lower(dsl::compile_form(read_form(form))));
}

CellGeometry reference_triangle() { return affine_map({{0, 0, 0}, {1, 0, 0}, {0, 1, 0}}); }

} // namespace

TEST(AffineMap, Examples)
{
  auto g = reference_triangle();
  EXPECT_EQ(g.det, 1.0);
  EXPECT_EQ(g.J[0][0], 1.0);
  EXPECT_EQ(g.J[0][1], 0.0);
  EXPECT_EQ(g.Jinv[1][1], 1.0);

  auto s = affine_map({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}});
  EXPECT_DOUBLE_EQ(s.det, 4.0);
  EXPECT_DOUBLE_EQ(s.Jinv[0][0], 0.5);
  EXPECT_DOUBLE_EQ(s.Jinv[1][1], 0.5);
  EXPECT_DOUBLE_EQ(s.Jinv[0][1], 0.0);

  try
  {
    affine_map({{0, 0, 0}, {1, 1, 0}, {2, 2, 0}});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate_cell);
  }
  try
  {
    affine_map({{0, 0, 0}, {0, 1, 0}, {1, 0, 0}});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::negative_orientation);
  }
}

TEST(AffineMap, RoundTripRulePoints)
{
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (CellType cell : {CellType::triangle, CellType::tetrahedron})
  {
    const ReferenceCell ref{cell};
    auto v = ref.vertices();
    for (auto& x : v)
      for (std::size_t i = 0; i < ref.dim(); ++i)
        x[i] += u(rng);
    const auto g = affine_map(v);
    for (const auto& X : simplex_rule(cell, 4).points)
    {
      const auto back = g.pullback(g.map(X));
      for (std::size_t i = 0; i < 3; ++i)
        EXPECT_NEAR(back[i], X[i], 1e-12);
    }
  }
}

TEST(CountFlops, Examples)
{
  KernelIR k;
  const int s = k.add_scalar("s");
  const int i = k.add_loop_var("i");
  const auto a = k.literal(2), b = k.literal(3), c = k.literal(4), d = k.literal(5);
  k.body.push_back(loop(i, 5, {assign(s, k.add(k.mul(a, b), k.mul(c, d)))}));
  EXPECT_EQ(count_flops(k), 15u);

  KernelIR acc;
  acc.rows = acc.cols = 1;
  const int x = acc.add_scalar("x"), y = acc.add_scalar("y"), z = acc.add_scalar("z");
  ATarget t;
  t.stride = 1;
  acc.body.push_back(accumulate_a(t, acc.mul(acc.mul(acc.scalar(x), acc.scalar(y)), acc.scalar(z))));
  EXPECT_EQ(count_flops(acc), 3u);

  EXPECT_EQ(count_flops(KernelIR{}), 0u);
}

TEST(CountFlops, LincombAndNegation)
{
  KernelIR k;
  const int s = k.add_scalar("s");
  const auto x = k.literal(1), y = k.literal(2), z = k.literal(3);
  // -x + 0.5*y + z: negation, multiply, two adds
  k.body.push_back(assign(s, k.lincomb({{-1.0, x}, {0.5, y}, {1.0, z}})));
  k.body.push_back(assign(s, k.neg(x)));
  EXPECT_EQ(count_flops(k), 5u);
  std::size_t ops = 0;
  interpret(k, reference_triangle(), {}, &ops);
  EXPECT_EQ(ops, 5u);
}

TEST(Interpret, ReferenceMassMatrix)
{
  auto k = build_quadrature_kernel(lower(dsl::compile_form(R"(
element = FiniteElement("Lagrange", "triangle", 1)
v = TestFunction(element)
u = TrialFunction(element)
a = v*u*dx
)")));
  const auto A = interpret(k, reference_triangle(), {});
  // int l_i l_j = (1 + delta_ij) / 24 on the unit triangle
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      EXPECT_NEAR(A[i * 3 + j], (i == j ? 2.0 : 1.0) / 24.0, 1e-14);
}

TEST(Interpret, WeightedLaplacianUnitWeight)
{
  auto k = quadrature_kernel("weighted_laplacian_p1.form");
  const auto A = interpret(k, reference_triangle(), {{1.0, 1.0, 1.0}});
  const double expected[9] = {1, -0.5, -0.5, -0.5, 0.5, 0, -0.5, 0, 0.5};
  for (std::size_t i = 0; i < 9; ++i)
    EXPECT_NEAR(A[i], expected[i], 1e-15);

  const auto Z = interpret(k, reference_triangle(), {{0.0, 0.0, 0.0}});
  for (double v : Z)
    EXPECT_EQ(v, 0.0);
}

TEST(Interpret, DeterministicAndCountsMatch)
{
  for (const char* form : {"weighted_laplacian_p1.form", "mass.form", "mass_premultiplied.form",
                           "pressure.form"})
  {
    auto k = quadrature_kernel(form);
    const auto g = affine_map({{0.1, 0, 0}, {1.2, 0.3, 0}, {0.2, 0.9, 0}});
    Coefficients w;
    for (auto n : k.coefficient_dofs)
      w.push_back(std::vector<double>(n, 0.75));
    std::size_t ops = 0;
    const auto a = interpret(k, g, w, &ops);
    const auto b = interpret(k, g, w);
    EXPECT_EQ(a, b) << form;
    EXPECT_EQ(ops, count_flops(k)) << form;
  }
}

TEST(Interpret, DivisionByZeroThrows)
{
  auto k = quadrature_kernel("pressure.form");
  Coefficients w;
  for (auto n : k.coefficient_dofs)
    w.push_back(std::vector<double>(n, 0.0));
  try
  {
    interpret(k, reference_triangle(), w);
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), ErrorKind::division_by_zero);
  }
}

TEST(Emit, DeterministicWithSignature)
{
  auto k = quadrature_kernel("weighted_laplacian_p1.form");
  const auto a = emit_source(k, "wl");
  EXPECT_EQ(a, emit_source(quadrature_kernel("weighted_laplacian_p1.form"), "wl"));
  EXPECT_NE(a.find("void tabulate_tensor_wl(double* A, const double* const* w"), std::string::npos);
  EXPECT_NE(a.find("W0 = 0.5"), std::string::npos);

  auto mass = build_quadrature_kernel(lower(dsl::compile_form(R"(
element = FiniteElement("Lagrange", "triangle", 1)
v = TestFunction(element)
u = TrialFunction(element)
a = v*u*dx
)")));
  const auto m = emit_source(mass, "m");
  EXPECT_EQ(m.find("nzc"), std::string::npos);
  EXPECT_NE(dump_ir(k).find("\"representation\": \"quadrature\""), std::string::npos);
}
