#include "formc/lowering.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <map>
#include <random>

using namespace formc;

namespace
{

std::string elasticity_source(const std::string& cell, int q)
{
  return "element = VectorElement(\"Lagrange\", \"" + cell + "\", " + std::to_string(q)
         + ")\nv = TestFunction(element)\nu = TrialFunction(element)\n"
           "def eps(v):\n    return grad(v) + transp(grad(v))\n"
           "a = 0.25*dot(eps(v), eps(u))*dx\n";
}

const std::string vector_mix = R"(
e = VectorElement("Lagrange", "triangle", 2)
s = FiniteElement("Lagrange", "triangle", 2)
d = FiniteElement("Discontinuous Lagrange", "triangle", 1)
v = TestFunction(e)
p = TrialFunction(s)
b = Function(e)
k = Function(d)
a = (div(v)*p - k*dot(dot(grad(v), b), grad(p)) + 2*dot(v, b)*div(grad(p)))/k*dx
)";

// Random values for basis factors at one point, keyed by the factor and
// its reference derivative counts; lazily generated.
struct PointValues
{
  std::mt19937 rng;
  std::size_t dim;
  std::vector<double> jinv;
  double det;
  std::map<std::tuple<int, int, int, int, int>, double> values;

  PointValues(unsigned seed, std::size_t d) : rng(seed), dim(d)
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (std::size_t i = 0; i < d * d; ++i)
      jinv.push_back(u(rng) + (i % (d + 1) == 0 ? 2.0 : 0.0));
    det = 0.5 + std::fabs(u(rng));
  }

  double value(int role, int component, DerivCounts counts)
  {
    auto key = std::make_tuple(role, component, counts[0], counts[1], counts[2]);
    auto it = values.find(key);
    if (it != values.end())
      return it->second;
    std::uniform_real_distribution<double> u(0.5, 1.5);
    return values[key] = u(rng);
  }

  double j(int a, int b) const { return jinv[static_cast<std::size_t>(a) * dim + b]; }
};

int role_id(const dsl::Expr& e)
{
  return e.kind == dsl::ExprKind::argument ? e.index : 2 + e.index;
}

// Direct recursive evaluation of the typed AST; `dirs` are pending physical
// derivative directions applied to a linear sub-expression.
struct AstEvaluator
{
  const dsl::TypedForm& form;
  PointValues& pv;

  struct Value
  {
    std::size_t rank = 0;
    std::vector<double> data;
  };

  std::size_t size(std::size_t rank) const
  {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank; ++i)
      n *= pv.dim;
    return n;
  }

  double leaf_derivative(int role, int component, const std::vector<int>& dirs)
  {
    // sum over reference directions a_k of prod Jinv(a_k, dirs_k) * D^a phi
    double total = 0;
    const std::size_t n = size(dirs.size());
    for (std::size_t flat = 0; flat < n; ++flat)
    {
      DerivCounts counts{0, 0, 0};
      double g = 1;
      std::size_t rest = flat;
      for (int dir : dirs)
      {
        const int a = static_cast<int>(rest % pv.dim);
        rest /= pv.dim;
        counts[a] += 1;
        g *= pv.j(a, dir);
      }
      total += g * pv.value(role, component, counts);
    }
    return total;
  }

  Value eval(const dsl::Expr& e, const std::vector<int>& dirs = {})
  {
    using dsl::ExprKind;
    switch (e.kind)
    {
    case ExprKind::literal:
      return {0, {dirs.empty() ? e.value : 0.0}};
    case ExprKind::argument:
    case ExprKind::coefficient:
    {
      const FiniteElement& el = e.kind == ExprKind::argument
                                    ? form.argument_element(e.index)
                                    : form.coefficients[e.index].element;
      Value v{el.vector ? 1u : 0u, {}};
      for (std::size_t c = 0; c < el.value_size(); ++c)
        v.data.push_back(leaf_derivative(role_id(e), static_cast<int>(c), dirs));
      return v;
    }
    case ExprKind::grad:
    {
      Value out;
      std::vector<Value> parts;
      for (std::size_t b = 0; b < pv.dim; ++b)
      {
        auto d2 = dirs;
        d2.push_back(static_cast<int>(b));
        parts.push_back(eval(*e.operands[0], d2));
      }
      out.rank = parts[0].rank + 1;
      for (std::size_t i = 0; i < parts[0].data.size(); ++i)
        for (std::size_t b = 0; b < pv.dim; ++b)
          out.data.push_back(parts[b].data[i]);
      return out;
    }
    case ExprKind::div:
    {
      Value out;
      for (std::size_t b = 0; b < pv.dim; ++b)
      {
        auto d2 = dirs;
        d2.push_back(static_cast<int>(b));
        Value x = eval(*e.operands[0], d2);
        out.rank = x.rank - 1;
        out.data.resize(x.data.size() / pv.dim, 0.0);
        for (std::size_t i = 0; i < out.data.size(); ++i)
          out.data[i] += x.data[i * pv.dim + b];
      }
      return out;
    }
    case ExprKind::transp:
    {
      Value x = eval(*e.operands[0], dirs);
      Value out = x;
      for (std::size_t i = 0; i < pv.dim; ++i)
        for (std::size_t j = 0; j < pv.dim; ++j)
          out.data[i * pv.dim + j] = x.data[j * pv.dim + i];
      return out;
    }
    case ExprKind::dot:
    {
      Value a = eval(*e.operands[0]);
      Value b = eval(*e.operands[1]);
      if (a.rank == b.rank)
      {
        double s = 0;
        for (std::size_t i = 0; i < a.data.size(); ++i)
          s += a.data[i] * b.data[i];
        return {0, {s}};
      }
      Value out{a.rank + b.rank - 2, {}};
      const std::size_t outer = size(a.rank - 1), inner = size(b.rank - 1);
      out.data.assign(outer * inner, 0.0);
      for (std::size_t i = 0; i < outer; ++i)
        for (std::size_t j = 0; j < inner; ++j)
          for (std::size_t k = 0; k < pv.dim; ++k)
            out.data[i * inner + j] += a.data[i * pv.dim + k] * b.data[k * inner + j];
      return out;
    }
    case ExprKind::add:
    case ExprKind::sub:
    {
      Value a = eval(*e.operands[0], dirs);
      Value b = eval(*e.operands[1], dirs);
      const double sign = e.kind == ExprKind::add ? 1 : -1;
      if (dsl::is_zero_literal(*e.operands[0]))
        a = Value{b.rank, std::vector<double>(b.data.size(), 0.0)};
      if (dsl::is_zero_literal(*e.operands[1]))
        return a;
      for (std::size_t i = 0; i < a.data.size(); ++i)
        a.data[i] += sign * b.data[i];
      return a;
    }
    case ExprKind::mul:
    {
      // under a derivative one operand is a literal
      const bool lit0 = e.operands[0]->kind == ExprKind::literal;
      Value a = eval(*e.operands[0], lit0 ? std::vector<int>{} : dirs);
      Value b = eval(*e.operands[1], lit0 ? dirs : std::vector<int>{});
      if (a.rank > 0)
        std::swap(a, b);
      for (auto& x : b.data)
        x *= a.data[0];
      return b;
    }
    case ExprKind::divide:
    {
      Value a = eval(*e.operands[0]);
      Value b = eval(*e.operands[1]);
      for (auto& x : a.data)
        x /= b.data[0];
      return a;
    }
    default: throw std::logic_error("unexpected node");
    }
  }
};

int factor_role_id(const BasisFactor& f)
{
  return f.role == Role::test ? 0 : f.role == Role::trial ? 1 : 2 + f.coefficient;
}

double evaluate_sum(const MonomialSum& sum, PointValues& pv)
{
  double total = 0;
  for (const auto& m : sum.monomials)
  {
    auto idx = m.bound_indices();
    const int max_index = idx.empty() ? -1 : idx.back();
    std::vector<int> assign(static_cast<std::size_t>(max_index + 1), 0);
    std::size_t combos = 1;
    for (std::size_t i = 0; i < idx.size(); ++i)
      combos *= pv.dim;
    for (std::size_t flat = 0; flat < combos; ++flat)
    {
      std::size_t rest = flat;
      for (int a : idx)
      {
        assign[a] = static_cast<int>(rest % pv.dim);
        rest /= pv.dim;
      }
      double term = m.constant * (m.det ? pv.det : 1.0);
      for (const auto& f : m.factors)
      {
        DerivCounts counts{0, 0, 0};
        for (int a : f.deriv)
          counts[assign[a]] += 1;
        term *= pv.value(factor_role_id(f), f.component, counts);
      }
      for (const auto& j : m.jinv)
        term *= pv.j(assign[j.index], j.direction);
      for (const auto& f : m.denominators)
        term /= pv.value(factor_role_id(f), f.component, {0, 0, 0});
      total += term;
    }
  }
  return total;
}

std::vector<std::string> test_sources()
{
  return {read_form("weighted_laplacian.form"),
          read_form("weighted_laplacian_p1.form"),
          read_form("mass.form"),
          read_form("mass_premultiplied.form"),
          read_form("pressure.form"),
          elasticity_source("triangle", 1),
          elasticity_source("tetrahedron", 2),
          vector_mix};
}

} // namespace

TEST(Expand, WeightedLaplacian2D)
{
  auto form = dsl::compile_form(read_form("weighted_laplacian_p1.form"));
  auto sum = expand(form);
  ASSERT_EQ(sum.monomials.size(), 2u);
  for (int beta = 0; beta < 2; ++beta)
  {
    const Monomial m = canonicalize(sum.monomials[beta]);
    EXPECT_TRUE(m.det);
    ASSERT_EQ(m.factors.size(), 3u);
    EXPECT_EQ(m.factors[0].role, Role::test);
    EXPECT_EQ(m.factors[1].role, Role::trial);
    EXPECT_EQ(m.factors[2].role, Role::coefficient);
    ASSERT_EQ(m.jinv.size(), 2u);
    EXPECT_EQ(m.jinv[0].direction, beta);
    EXPECT_EQ(m.jinv[1].direction, beta);
  }
  EXPECT_EQ(dump_monomials(simplify(sum)),
            "+1 * test[0]{a0} * trial[0]{a1} * w0[0] * Jinv(a0,0) * Jinv(a1,0) * det\n"
            "+1 * test[0]{a0} * trial[0]{a1} * w0[0] * Jinv(a0,1) * Jinv(a1,1) * det\n");
}

TEST(Expand, MassMatrix)
{
  auto sum = expand(dsl::compile_form(read_form("mass.form")));
  ASSERT_EQ(sum.monomials.size(), 1u);
  EXPECT_EQ(to_string(sum.monomials[0]), "+1 * test[0] * trial[0] * det");
}

TEST(Expand, ElasticityTermCounts)
{
  for (auto [cell, d] : {std::pair{"triangle", 2}, std::pair{"tetrahedron", 3}})
  {
    auto expanded = expand(dsl::compile_form(elasticity_source(cell, 1)));
    EXPECT_EQ(static_cast<int>(expanded.monomials.size()), 4 * d * d);
    auto simplified = simplify(expanded);
    EXPECT_EQ(static_cast<int>(simplified.monomials.size()), d + 2 * d * (d - 1));
    // diagonal terms merge four contributions of 0.25, the others two
    for (const auto& m : simplified.monomials)
    {
      // eps_ii terms: component equals direction on both sides
      const int c = m.factors[0].component;
      const bool diagonal = m.factors[1].component == c && m.jinv[0].direction == c
                            && m.jinv[1].direction == c;
      if (diagonal)
        EXPECT_DOUBLE_EQ(m.constant, 1.0);
      else
        EXPECT_DOUBLE_EQ(m.constant, 0.5);
    }
  }
}

TEST(Simplify, DropsZerosAndIsIdempotent)
{
  auto form = dsl::compile_form(R"(
e = FiniteElement("Lagrange", "triangle", 1)
v = TestFunction(e)
u = TrialFunction(e)
a = (v*u - u*v + 0*v*u + 3*v*u)*dx
)");
  auto once = simplify(expand(form));
  ASSERT_EQ(once.monomials.size(), 1u);
  EXPECT_DOUBLE_EQ(once.monomials[0].constant, 3.0);
  for (const auto& src : test_sources())
  {
    auto s1 = simplify(expand(dsl::compile_form(src)));
    EXPECT_EQ(dump_monomials(simplify(s1)), dump_monomials(s1));
  }
}

TEST(Expand, PointwiseValuePreservation)
{
  int seed = 0;
  for (const auto& src : test_sources())
  {
    auto form = dsl::compile_form(src);
    auto expanded = expand(form);
    auto simplified = simplify(expanded);
    for (int trial = 0; trial < 100; ++trial)
    {
      PointValues pv(static_cast<unsigned>(seed++), form.dim());
      AstEvaluator ast{form, pv};
      const double reference = ast.eval(*form.integrand).data.at(0) * pv.det;
      const double e = evaluate_sum(expanded, pv);
      const double s = evaluate_sum(simplified, pv);
      const double scale = std::max(1.0, std::fabs(reference));
      EXPECT_NEAR(e, reference, 1e-12 * scale);
      EXPECT_NEAR(s, reference, 1e-12 * scale);
    }
  }
}

TEST(EstimateDegree, Examples)
{
  auto mass = lower(dsl::compile_form(R"(
e = FiniteElement("Lagrange", "triangle", 1)
v = TestFunction(e)
u = TrialFunction(e)
a = dot(v, u)*dx
)"));
  EXPECT_EQ(estimate_degree(mass), 2);
  EXPECT_EQ(estimate_degree(lower(dsl::compile_form(read_form("weighted_laplacian.form")))), 7);
  EXPECT_EQ(estimate_degree(lower(dsl::compile_form(read_form("mass_premultiplied.form")))), 10);
}

TEST(Lowering, PressureEquationKeepsDenominators)
{
  auto sum = lower(dsl::compile_form(read_form("pressure.form")));
  EXPECT_TRUE(sum.has_division());
  bool second_derivative = false;
  for (const auto& m : sum.monomials)
    for (const auto& f : m.factors)
      second_derivative = second_derivative || f.order() == 2;
  EXPECT_TRUE(second_derivative);
}
