#pragma once

#include "formc/dsl/ast.hpp"
#include "formc/dsl/lexer.hpp"

#include <charconv>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace formc::dsl
{

namespace detail
{

enum class Symbol
{
  element,
  function,
  macro,
  definition
};

class Parser
{
public:
  explicit Parser(const std::vector<Token>& tokens) : _tokens(tokens) {}

  FormProgram parse_program()
  {
    FormProgram program;
    bool have_form = false;
    while (!at_end())
    {
      if (have_form)
        fail("end of input after the form statement");
      if (peek().is_keyword("def"))
      {
        program.macros.push_back(parse_macro());
        continue;
      }
      const Token& target = expect_identifier("statement target");
      expect_punct("=");
      const Token& head = peek();
      if (head.is_keyword("FiniteElement") || head.is_keyword("VectorElement"))
      {
        declare(target, Symbol::element);
        program.elements.push_back({target.text, parse_element(), target.span.begin});
        continue;
      }
      if (head.is_keyword("TestFunction") || head.is_keyword("TrialFunction")
          || head.is_keyword("Function"))
      {
        declare(target, Symbol::function);
        program.functions.push_back(parse_function(target));
        continue;
      }

      _measures = 0;
      ExprPtr rhs = parse_expr();
      if (_measures == 0)
      {
        declare(target, Symbol::definition);
        program.definitions.push_back({target.text, rhs, target.span.begin});
        if (at_end())
          fail_at(previous(), "'*' 'dx' terminating the form statement");
        continue;
      }
      if (_measures > 1 || rhs->kind != ExprKind::mul
          || rhs->operands[1]->kind != ExprKind::measure)
        fail_at(previous(), "form of the shape '<integrand>*dx'");
      declare(target, Symbol::definition);
      program.form = {target.text, rhs->operands[0], target.span.begin};
      have_form = true;
    }
    if (!have_form)
    {
      if (_tokens.empty())
        throw Error(ErrorKind::syntax_error, "expected a form statement '<name> = <expr>*dx'");
      fail_at(_tokens.back(), "'*' 'dx' terminating the form statement");
    }
    return program;
  }

private:
  const std::vector<Token>& _tokens;
  std::size_t _pos = 0;
  std::map<std::string, Symbol> _symbols;
  std::map<std::string, std::size_t> _macro_arity;
  std::set<std::string> _params;
  int _measures = 0;

  bool at_end() const { return _pos >= _tokens.size(); }

  const Token& peek() const
  {
    static const Token eof{TokenKind::punctuation, "<end of input>", {}};
    return at_end() ? eof : _tokens[_pos];
  }

  const Token& previous() const { return _tokens[_pos == 0 ? 0 : _pos - 1]; }

  const Token& next()
  {
    const Token& t = peek();
    if (!at_end())
      ++_pos;
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) const
  {
    if (at_end())
    {
      SourceLocation loc = _tokens.empty() ? SourceLocation{} : _tokens.back().span.begin;
      throw Error(ErrorKind::syntax_error,
                  "expected " + expected + " but reached end of input", loc);
    }
    fail_at(peek(), expected, true);
  }

  [[noreturn]] void fail_at(const Token& t, const std::string& expected,
                            bool found = false) const
  {
    std::string message = "expected " + expected;
    if (found)
      message += ", found '" + t.text + "'";
    throw Error(ErrorKind::syntax_error, message, t.span.begin);
  }

  const Token& expect_punct(std::string_view p)
  {
    if (!peek().is_punct(p))
      fail("'" + std::string(p) + "'");
    return next();
  }

  const Token& expect_identifier(const std::string& what)
  {
    if (peek().kind != TokenKind::identifier)
      fail(what + " (identifier)");
    return next();
  }

  void declare(const Token& name, Symbol kind)
  {
    if (_symbols.count(name.text) || _params.count(name.text))
      throw Error(ErrorKind::duplicate_name, "'" + name.text + "' is already defined",
                  name.span.begin);
    _symbols[name.text] = kind;
  }

  FiniteElement parse_element()
  {
    const Token& head = next();
    const bool vector = head.text == "VectorElement";
    expect_punct("(");
    if (peek().kind != TokenKind::string)
      fail("element family string");
    const Token& family = next();
    expect_punct(",");
    if (peek().kind != TokenKind::string)
      fail("cell name string");
    const Token& cell = next();
    expect_punct(",");
    int degree = parse_integer_expr();
    expect_punct(")");
    try
    {
      return FiniteElement(parse_family(family.text), parse_cell(cell.text), degree, vector);
    }
    catch (const Error& e)
    {
      throw Error(e.kind(), e.message(), head.span.begin);
    }
  }

  // Degrees may be written as small integer arithmetic, e.g. `5 - 1`.
  int parse_integer_expr()
  {
    int value = parse_integer();
    while (peek().is_punct("+") || peek().is_punct("-"))
    {
      const bool plus = next().text == "+";
      const int rhs = parse_integer();
      value = plus ? value + rhs : value - rhs;
    }
    return value;
  }

  int parse_integer()
  {
    if (peek().kind != TokenKind::number)
      fail("integer degree");
    const Token& t = next();
    int value = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      fail_at(t, "integer degree", true);
    return value;
  }

  FunctionDecl parse_function(const Token& target)
  {
    const Token& head = next();
    FunctionKind kind = FunctionKind::coefficient;
    if (head.text == "TestFunction")
      kind = FunctionKind::test;
    else if (head.text == "TrialFunction")
      kind = FunctionKind::trial;
    expect_punct("(");
    const Token& element = expect_identifier("element name");
    auto it = _symbols.find(element.text);
    if (it == _symbols.end())
      throw Error(ErrorKind::unknown_name, "unknown element '" + element.text + "'",
                  element.span.begin);
    if (it->second != Symbol::element)
      fail_at(element, "a FiniteElement or VectorElement name", true);
    expect_punct(")");
    return {target.text, kind, element.text, target.span.begin};
  }

  MacroDecl parse_macro()
  {
    next(); // def
    const Token& name = expect_identifier("function name");
    declare(name, Symbol::macro);
    expect_punct("(");
    std::vector<std::string> params;
    if (!peek().is_punct(")"))
    {
      while (true)
      {
        // parameters may shadow global names (Python scoping)
        const Token& p = expect_identifier("parameter name");
        if (_params.count(p.text))
          throw Error(ErrorKind::duplicate_name, "duplicate parameter '" + p.text + "'",
                      p.span.begin);
        _params.insert(p.text);
        params.push_back(p.text);
        if (!peek().is_punct(","))
          break;
        next();
      }
    }
    expect_punct(")");
    expect_punct(":");
    if (!peek().is_keyword("return"))
      fail("'return'");
    next();
    _measures = 0;
    ExprPtr body = parse_expr();
    if (_measures != 0)
      fail_at(previous(), "a measure-free function body");
    _params.clear();
    _macro_arity[name.text] = params.size();
    return {name.text, std::move(params), std::move(body), name.span.begin};
  }

  ExprPtr parse_expr()
  {
    ExprPtr lhs = parse_term();
    while (peek().is_punct("+") || peek().is_punct("-"))
    {
      const Token& op = next();
      ExprPtr rhs = parse_term();
      lhs = make_node(op.text == "+" ? ExprKind::add : ExprKind::sub, {lhs, rhs},
                      op.span.begin);
    }
    return lhs;
  }

  ExprPtr parse_term()
  {
    ExprPtr lhs = parse_unary();
    while (peek().is_punct("*") || peek().is_punct("/"))
    {
      const Token& op = next();
      ExprPtr rhs = parse_unary();
      lhs = make_node(op.text == "*" ? ExprKind::mul : ExprKind::divide, {lhs, rhs},
                      op.span.begin);
    }
    return lhs;
  }

  ExprPtr parse_unary()
  {
    if (peek().is_punct("-"))
    {
      const Token& op = next();
      ExprPtr operand = parse_unary();
      return make_node(ExprKind::sub, {make_literal(0.0, op.span.begin), operand},
                       op.span.begin);
    }
    return parse_primary();
  }

  std::vector<ExprPtr> parse_arguments(std::size_t count, const Token& callee)
  {
    expect_punct("(");
    std::vector<ExprPtr> args;
    if (!peek().is_punct(")"))
    {
      args.push_back(parse_expr());
      while (peek().is_punct(","))
      {
        next();
        args.push_back(parse_expr());
      }
    }
    expect_punct(")");
    if (args.size() != count)
    {
      throw Error(ErrorKind::syntax_error,
                  "'" + callee.text + "' takes " + std::to_string(count) + " argument(s), got "
                      + std::to_string(args.size()),
                  callee.span.begin);
    }
    return args;
  }

  ExprPtr parse_primary()
  {
    const Token& t = peek();
    if (t.kind == TokenKind::number)
    {
      next();
      double value = 0.0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), value);
      if (ec != std::errc() || ptr != t.text.data() + t.text.size())
        fail_at(t, "a decimal number", true);
      return make_literal(value, t.span.begin);
    }
    if (t.is_punct("("))
    {
      next();
      ExprPtr inner = parse_expr();
      expect_punct(")");
      return inner;
    }
    if (t.kind == TokenKind::keyword)
    {
      if (t.text == "dx")
      {
        next();
        ++_measures;
        return make_node(ExprKind::measure, {}, t.span.begin);
      }
      if (t.text == "dS" || t.text == "ds")
        throw Error(ErrorKind::unsupported_operator,
                    "facet integrals ('" + t.text + "') are not supported", t.span.begin);
      struct Builtin
      {
        std::string_view name;
        ExprKind kind;
        std::size_t arity;
      };
      static constexpr Builtin builtins[] = {{"grad", ExprKind::grad, 1},
                                             {"div", ExprKind::div, 1},
                                             {"transp", ExprKind::transp, 1},
                                             {"dot", ExprKind::dot, 2},
                                             {"mult", ExprKind::mul, 2}};
      for (const auto& b : builtins)
      {
        if (t.text == b.name)
        {
          next();
          return make_node(b.kind, parse_arguments(b.arity, t), t.span.begin);
        }
      }
      fail("an expression");
    }
    if (t.kind == TokenKind::identifier)
    {
      next();
      if (_params.count(t.text))
        return make_name(t.text, t.span.begin);
      auto it = _symbols.find(t.text);
      if (it == _symbols.end())
        throw Error(ErrorKind::unknown_name, "unknown name '" + t.text + "'", t.span.begin);
      if (it->second == Symbol::macro)
      {
        return make_call(t.text, parse_arguments(_macro_arity.at(t.text), t), t.span.begin);
      }
      if (it->second == Symbol::element)
        fail_at(t, "a function or expression name (got an element)", false);
      if (peek().is_punct("("))
        throw Error(ErrorKind::unsupported_operator,
                    "restriction or call of '" + t.text + "' is not supported",
                    peek().span.begin);
      return make_name(t.text, t.span.begin);
    }
    fail("an expression");
  }
};

} // namespace detail

/// Parse a token stream into a program. The last statement must be the
/// form `name = <integrand>*dx`.
inline FormProgram parse(const std::vector<Token>& tokens)
{
  detail::Parser parser(tokens);
  return parser.parse_program();
}

inline FormProgram parse(std::string_view source) { return parse(tokenize(source)); }

} // namespace formc::dsl
