#pragma once

#include "formc/dsl/ast.hpp"
#include "formc/format.hpp"

#include <sstream>
#include <string>

namespace formc::dsl
{

namespace detail
{

inline int precedence(const Expr& e)
{
  switch (e.kind)
  {
  case ExprKind::add:
  case ExprKind::sub: return 1;
  case ExprKind::mul:
  case ExprKind::divide: return 2;
  default: return 3;
  }
}

inline void print_expr(std::ostream& out, const Expr& e);

inline void print_operand(std::ostream& out, const Expr& e, bool parens)
{
  if (parens)
    out << '(';
  print_expr(out, e);
  if (parens)
    out << ')';
}

inline void print_call(std::ostream& out, std::string_view name, const Expr& e)
{
  out << name << '(';
  for (std::size_t i = 0; i < e.operands.size(); ++i)
  {
    if (i > 0)
      out << ", ";
    print_expr(out, *e.operands[i]);
  }
  out << ')';
}

inline void print_expr(std::ostream& out, const Expr& e)
{
  switch (e.kind)
  {
  case ExprKind::literal: out << format_double(e.value); return;
  case ExprKind::name:
  case ExprKind::argument:
  case ExprKind::coefficient: out << e.name; return;
  case ExprKind::measure: out << "dx"; return;
  case ExprKind::call: print_call(out, e.name, e); return;
  case ExprKind::grad: print_call(out, "grad", e); return;
  case ExprKind::div: print_call(out, "div", e); return;
  case ExprKind::transp: print_call(out, "transp", e); return;
  case ExprKind::dot: print_call(out, "dot", e); return;
  case ExprKind::add:
  case ExprKind::sub:
  case ExprKind::mul:
  case ExprKind::divide:
  {
    const int p = precedence(e);
    const char* op = e.kind == ExprKind::add   ? " + "
                     : e.kind == ExprKind::sub ? " - "
                     : e.kind == ExprKind::mul ? "*"
                                               : "/";
    // Left-associative grammar: the right operand needs parentheses at
    // equal precedence to keep the tree shape.
    print_operand(out, *e.operands[0], precedence(*e.operands[0]) < p);
    out << op;
    print_operand(out, *e.operands[1], precedence(*e.operands[1]) <= p);
    return;
  }
  }
}

} // namespace detail

inline std::string print(const Expr& e)
{
  std::ostringstream out;
  detail::print_expr(out, e);
  return out.str();
}

/// Canonical source text: elements, functions, defs, definitions, form.
inline std::string print(const FormProgram& program)
{
  std::ostringstream out;
  for (const auto& e : program.elements)
    out << e.name << " = " << e.element.to_string() << '\n';
  if (!program.elements.empty())
    out << '\n';
  for (const auto& f : program.functions)
  {
    const char* ctor = f.kind == FunctionKind::test    ? "TestFunction"
                       : f.kind == FunctionKind::trial ? "TrialFunction"
                                                       : "Function";
    out << f.name << " = " << ctor << '(' << f.element << ")\n";
  }
  if (!program.functions.empty())
    out << '\n';
  for (const auto& m : program.macros)
  {
    out << "def " << m.name << '(';
    for (std::size_t i = 0; i < m.params.size(); ++i)
      out << (i > 0 ? ", " : "") << m.params[i];
    out << "):\n    return " << print(*m.body) << "\n\n";
  }
  for (const auto& d : program.definitions)
    out << d.name << " = " << print(*d.expr) << '\n';
  if (!program.definitions.empty())
    out << '\n';
  out << program.form.name << " = ";
  detail::print_operand(out, *program.form.integrand,
                        detail::precedence(*program.form.integrand) < 2);
  out << "*dx\n";
  return out.str();
}

} // namespace formc::dsl
