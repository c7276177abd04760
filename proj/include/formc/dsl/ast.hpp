#pragma once

#include "formc/error.hpp"
#include "formc/finite_element.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace formc::dsl
{

enum class ExprKind
{
  literal,
  name,        // unresolved identifier (program level)
  call,        // user `def` invocation (program level)
  measure,     // `dx`, only as the right factor of the form statement
  argument,    // resolved test (index 0) or trial (index 1) function
  coefficient, // resolved coefficient function, index = coefficient id
  grad,
  div,
  transp,
  dot,
  add,
  sub,
  mul,
  divide
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr
{
  ExprKind kind = ExprKind::literal;
  double value = 0.0;
  std::string name;
  int index = -1;
  std::vector<ExprPtr> operands;
  SourceLocation loc;
};

inline ExprPtr make_literal(double value, SourceLocation loc = {})
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::literal;
  e->value = value;
  e->loc = loc;
  return e;
}

inline ExprPtr make_name(std::string name, SourceLocation loc = {})
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::name;
  e->name = std::move(name);
  e->loc = loc;
  return e;
}

inline ExprPtr make_node(ExprKind kind, std::vector<ExprPtr> operands,
                         SourceLocation loc = {})
{
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->operands = std::move(operands);
  e->loc = loc;
  return e;
}

inline ExprPtr make_call(std::string name, std::vector<ExprPtr> args,
                         SourceLocation loc = {})
{
  auto e = std::make_shared<Expr>();
  e->kind = ExprKind::call;
  e->name = std::move(name);
  e->operands = std::move(args);
  e->loc = loc;
  return e;
}

inline ExprPtr make_leaf(ExprKind kind, int index, std::string name,
                         SourceLocation loc = {})
{
  auto e = std::make_shared<Expr>();
  e->kind = kind;
  e->index = index;
  e->name = std::move(name);
  e->loc = loc;
  return e;
}

/// Structural equality, ignoring source locations.
inline bool equal(const Expr& a, const Expr& b)
{
  if (a.kind != b.kind || a.value != b.value || a.name != b.name
      || a.index != b.index || a.operands.size() != b.operands.size())
    return false;
  for (std::size_t i = 0; i < a.operands.size(); ++i)
    if (!equal(*a.operands[i], *b.operands[i]))
      return false;
  return true;
}

inline bool is_zero_literal(const Expr& e)
{
  return e.kind == ExprKind::literal && e.value == 0.0;
}

enum class FunctionKind
{
  test,
  trial,
  coefficient
};

struct ElementDecl
{
  std::string name;
  FiniteElement element;
  SourceLocation loc;
};

struct FunctionDecl
{
  std::string name;
  FunctionKind kind;
  std::string element;
  SourceLocation loc;
};

/// `def name(params): return body`
struct MacroDecl
{
  std::string name;
  std::vector<std::string> params;
  ExprPtr body;
  SourceLocation loc;
};

/// `name = expr` without a measure.
struct Definition
{
  std::string name;
  ExprPtr expr;
  SourceLocation loc;
};

/// `name = integrand*dx`
struct FormStatement
{
  std::string name;
  ExprPtr integrand;
  SourceLocation loc;
};

struct FormProgram
{
  std::vector<ElementDecl> elements;
  std::vector<FunctionDecl> functions;
  std::vector<MacroDecl> macros;
  std::vector<Definition> definitions;
  FormStatement form;
};

inline bool equal(const FormProgram& a, const FormProgram& b)
{
  if (a.elements.size() != b.elements.size() || a.functions.size() != b.functions.size()
      || a.macros.size() != b.macros.size()
      || a.definitions.size() != b.definitions.size())
    return false;
  for (std::size_t i = 0; i < a.elements.size(); ++i)
    if (a.elements[i].name != b.elements[i].name
        || !(a.elements[i].element == b.elements[i].element))
      return false;
  for (std::size_t i = 0; i < a.functions.size(); ++i)
    if (a.functions[i].name != b.functions[i].name || a.functions[i].kind != b.functions[i].kind
        || a.functions[i].element != b.functions[i].element)
      return false;
  for (std::size_t i = 0; i < a.macros.size(); ++i)
    if (a.macros[i].name != b.macros[i].name || a.macros[i].params != b.macros[i].params
        || !equal(*a.macros[i].body, *b.macros[i].body))
      return false;
  for (std::size_t i = 0; i < a.definitions.size(); ++i)
    if (a.definitions[i].name != b.definitions[i].name
        || !equal(*a.definitions[i].expr, *b.definitions[i].expr))
      return false;
  return a.form.name == b.form.name && equal(*a.form.integrand, *b.form.integrand);
}

} // namespace formc::dsl
