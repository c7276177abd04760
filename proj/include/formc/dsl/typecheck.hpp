#pragma once

#include "formc/dsl/ast.hpp"
#include "formc/dsl/parser.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace formc::dsl
{

struct FunctionInfo
{
  std::string name;
  FiniteElement element;
};

/// A resolved, well-ranked multilinear form. Leaves of `integrand` are
/// `argument` (index 0 test, 1 trial), `coefficient` (index = id) and
/// literals; no names or calls remain.
struct TypedForm
{
  int arity = 1;
  FunctionInfo test;
  std::optional<FunctionInfo> trial;
  std::vector<FunctionInfo> coefficients;
  ExprPtr integrand;

  CellType cell() const { return test.element.cell; }
  std::size_t dim() const { return test.element.dim(); }

  const FiniteElement& argument_element(int role) const
  {
    return role == 0 ? test.element : trial->element;
  }
};

/// Tensor shape of an expression: list of extents (each equal to d).
using Shape = std::vector<std::size_t>;

namespace detail
{

class TypeChecker
{
public:
  explicit TypeChecker(const FormProgram& program) : _program(program) {}

  TypedForm run()
  {
    std::map<std::string, FiniteElement> elements;
    for (const auto& e : _program.elements)
      elements[e.name] = e.element;

    TypedForm form;
    bool have_test = false;
    std::optional<CellType> cell;
    for (const auto& f : _program.functions)
    {
      const FiniteElement& element = elements.at(f.element);
      if (cell && *cell != element.cell)
        throw Error(ErrorKind::invalid_element, "functions on different cells", f.loc);
      cell = element.cell;
      switch (f.kind)
      {
      case FunctionKind::test:
        if (have_test)
          throw Error(ErrorKind::two_test_functions,
                      "second test function '" + f.name + "'", f.loc);
        have_test = true;
        form.test = {f.name, element};
        _leaves[f.name] = make_leaf(ExprKind::argument, 0, f.name, f.loc);
        break;
      case FunctionKind::trial:
        if (form.trial)
          throw Error(ErrorKind::two_test_functions,
                      "second trial function '" + f.name + "'", f.loc);
        form.trial = FunctionInfo{f.name, element};
        _leaves[f.name] = make_leaf(ExprKind::argument, 1, f.name, f.loc);
        break;
      case FunctionKind::coefficient:
        _leaves[f.name] = make_leaf(ExprKind::coefficient,
                                    static_cast<int>(form.coefficients.size()), f.name, f.loc);
        form.coefficients.push_back({f.name, element});
        break;
      }
      _elements[f.name] = element;
    }
    if (!have_test)
      throw Error(ErrorKind::not_multilinear, "form has no test function");
    form.arity = form.trial ? 2 : 1;
    _dim = form.test.element.dim();

    for (const auto& m : _program.macros)
      _macros[m.name] = &m;
    for (const auto& d : _program.definitions)
      _definitions[d.name] = resolve(*d.expr, {});

    form.integrand = resolve(*_program.form.integrand, {});

    const Shape shape = shape_of(*form.integrand);
    if (!shape.empty())
    {
      throw Error(ErrorKind::non_scalar_integrand,
                  "integrand has rank " + std::to_string(shape.size()),
                  _program.form.loc);
    }
    const auto degrees = argument_degrees(*form.integrand);
    const std::set<std::pair<int, int>> expected{{1, form.arity == 2 ? 1 : 0}};
    if (degrees != expected)
    {
      throw Error(ErrorKind::not_multilinear,
                  "integrand must be linear in the test function"
                      + std::string(form.arity == 2 ? " and the trial function" : ""),
                  _program.form.loc);
    }
    return form;
  }

private:
  const FormProgram& _program;
  std::size_t _dim = 2;
  std::map<std::string, ExprPtr> _leaves;
  std::map<std::string, FiniteElement> _elements;
  std::map<std::string, const MacroDecl*> _macros;
  std::map<std::string, ExprPtr> _definitions;

  using Scope = std::map<std::string, ExprPtr>;

  ExprPtr resolve(const Expr& e, const Scope& scope)
  {
    switch (e.kind)
    {
    case ExprKind::name:
    {
      if (auto it = scope.find(e.name); it != scope.end())
        return it->second;
      if (auto it = _leaves.find(e.name); it != _leaves.end())
        return it->second;
      if (auto it = _definitions.find(e.name); it != _definitions.end())
        return it->second;
      throw Error(ErrorKind::unknown_name, "unknown name '" + e.name + "'", e.loc);
    }
    case ExprKind::call:
    {
      const MacroDecl* m = _macros.at(e.name);
      Scope inner;
      for (std::size_t i = 0; i < m->params.size(); ++i)
        inner[m->params[i]] = resolve(*e.operands[i], scope);
      return resolve(*m->body, inner);
    }
    case ExprKind::measure:
      throw Error(ErrorKind::syntax_error, "measure inside an expression", e.loc);
    case ExprKind::literal:
    case ExprKind::argument:
    case ExprKind::coefficient: return std::make_shared<Expr>(e);
    default:
    {
      std::vector<ExprPtr> ops;
      for (const auto& op : e.operands)
        ops.push_back(resolve(*op, scope));
      return make_node(e.kind, std::move(ops), e.loc);
    }
    }
  }

  Shape leaf_shape(const Expr& e) const
  {
    const FiniteElement& element = _elements.at(e.name);
    return element.vector ? Shape{_dim} : Shape{};
  }

  // grad/div operate on linear combinations of functions only; products
  // would need a product rule the lowering does not implement.
  static bool is_linear_terminal(const Expr& e)
  {
    switch (e.kind)
    {
    case ExprKind::argument:
    case ExprKind::coefficient: return true;
    case ExprKind::literal: return e.value == 0.0;
    case ExprKind::add:
    case ExprKind::sub:
      return is_linear_terminal(*e.operands[0]) && is_linear_terminal(*e.operands[1]);
    case ExprKind::mul:
      return (e.operands[0]->kind == ExprKind::literal && is_linear_terminal(*e.operands[1]))
             || (e.operands[1]->kind == ExprKind::literal
                 && is_linear_terminal(*e.operands[0]));
    default: return false;
    }
  }

  [[noreturn]] static void rank_error(const Expr& e, const std::string& what)
  {
    throw Error(ErrorKind::rank_mismatch, what, e.loc);
  }

public:
  Shape shape_of(const Expr& e) const
  {
    switch (e.kind)
    {
    case ExprKind::literal: return {};
    case ExprKind::argument:
    case ExprKind::coefficient: return leaf_shape(e);
    case ExprKind::grad:
    {
      const Expr& x = *e.operands[0];
      if (!is_linear_terminal(x))
        throw Error(ErrorKind::unsupported_operator,
                    "grad is supported on (linear combinations of) functions only", e.loc);
      Shape s = shape_of(x);
      s.push_back(_dim);
      return s;
    }
    case ExprKind::div:
    {
      const Expr& x = *e.operands[0];
      Shape s = shape_of(x);
      if (s.empty())
        rank_error(e, "div of a scalar");
      const bool laplacian = x.kind == ExprKind::grad && s.size() == 1;
      if (!laplacian && !is_linear_terminal(x))
        throw Error(ErrorKind::unsupported_operator,
                    "div is supported on functions and on grad of a scalar only", e.loc);
      s.pop_back();
      return s;
    }
    case ExprKind::transp:
    {
      Shape s = shape_of(*e.operands[0]);
      if (s.size() != 2)
        rank_error(e, "transp requires a rank-2 operand");
      std::swap(s[0], s[1]);
      return s;
    }
    case ExprKind::dot:
    {
      Shape a = shape_of(*e.operands[0]);
      Shape b = shape_of(*e.operands[1]);
      if (a.size() == b.size())
      {
        if (a != b)
          rank_error(e, "dot of operands with different extents");
        return {};
      }
      if (a.empty() || b.empty())
        rank_error(e, "dot of a scalar and a rank-" + std::to_string(a.size() + b.size())
                          + " operand");
      if (a.back() != b.front())
        rank_error(e, "dot with mismatched contraction extents");
      Shape out(a.begin(), a.end() - 1);
      out.insert(out.end(), b.begin() + 1, b.end());
      return out;
    }
    case ExprKind::add:
    case ExprKind::sub:
    {
      const Shape a = shape_of(*e.operands[0]);
      const Shape b = shape_of(*e.operands[1]);
      // literal zero (from unary minus) adapts to the other operand
      if (is_zero_literal(*e.operands[0]))
        return b;
      if (is_zero_literal(*e.operands[1]))
        return a;
      if (a != b)
        rank_error(e, "sum of operands with different shapes");
      return a;
    }
    case ExprKind::mul:
    {
      const Shape a = shape_of(*e.operands[0]);
      const Shape b = shape_of(*e.operands[1]);
      if (!a.empty() && !b.empty())
        rank_error(e, "product of two non-scalars (use dot)");
      return a.empty() ? b : a;
    }
    case ExprKind::divide:
    {
      if (!shape_of(*e.operands[1]).empty())
        throw Error(ErrorKind::division_by_non_scalar, "denominator is not a scalar", e.loc);
      return shape_of(*e.operands[0]);
    }
    default: throw Error(ErrorKind::syntax_error, "unresolved expression", e.loc);
    }
  }

private:
  using Degrees = std::set<std::pair<int, int>>;

  // Possible (test power, trial power) pairs of the additive terms.
  static Degrees argument_degrees(const Expr& e)
  {
    switch (e.kind)
    {
    case ExprKind::literal: return e.value == 0.0 ? Degrees{} : Degrees{{0, 0}};
    case ExprKind::coefficient: return {{0, 0}};
    case ExprKind::argument: return e.index == 0 ? Degrees{{1, 0}} : Degrees{{0, 1}};
    case ExprKind::grad:
    case ExprKind::div:
    case ExprKind::transp: return argument_degrees(*e.operands[0]);
    case ExprKind::add:
    case ExprKind::sub:
    {
      Degrees a = argument_degrees(*e.operands[0]);
      Degrees b = argument_degrees(*e.operands[1]);
      a.insert(b.begin(), b.end());
      return a;
    }
    case ExprKind::mul:
    case ExprKind::dot:
    {
      Degrees out;
      for (auto x : argument_degrees(*e.operands[0]))
        for (auto y : argument_degrees(*e.operands[1]))
          out.insert({x.first + y.first, x.second + y.second});
      return out;
    }
    case ExprKind::divide:
    {
      const Degrees den = argument_degrees(*e.operands[1]);
      if (den != Degrees{{0, 0}})
        throw Error(ErrorKind::not_multilinear,
                    "denominator must not depend on test or trial functions", e.loc);
      return argument_degrees(*e.operands[0]);
    }
    default: return {};
    }
  }
};

} // namespace detail

/// Resolve names, inline definitions and `def` calls, check ranks and
/// multilinearity. Coefficients are numbered in declaration order.
inline TypedForm typecheck(const FormProgram& program)
{
  detail::TypeChecker checker(program);
  return checker.run();
}

/// Convenience: tokenize, parse and typecheck a source text.
inline TypedForm compile_form(std::string_view source) { return typecheck(parse(source)); }

} // namespace formc::dsl
