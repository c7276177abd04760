#pragma once

#include "formc/format.hpp"
#include "formc/kernel/ir.hpp"

#include <json.hpp>

#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace formc::kernel
{

namespace detail
{

inline int precedence(const ExprNode& n)
{
  switch (n.op)
  {
  case Op::add:
  case Op::sub: return 1;
  case Op::lincomb: return n.terms.size() > 1 || (n.terms.size() == 1 && n.terms[0].first == -1.0) ? 1 : 2;
  case Op::mul:
  case Op::div: return 2;
  case Op::neg: return 3;
  default: return 4;
  }
}

class Printer
{
public:
  explicit Printer(const KernelIR& k) : _k(k) {}

  std::string index(const IndexExpr& i) const
  {
    switch (i.kind)
    {
    case IndexExpr::Kind::constant: return std::to_string(i.value);
    case IndexExpr::Kind::loop: return _k.loop_vars[static_cast<std::size_t>(i.value)];
    default:
      return _k.maps[static_cast<std::size_t>(i.map)].name + "["
             + _k.loop_vars[static_cast<std::size_t>(i.value)] + "]";
    }
  }

  std::string target(const ATarget& t) const
  {
    if (t.stride == 0)
      return "A[" + index(t.col) + "]";
    if (t.row.kind == IndexExpr::Kind::constant && t.col.kind == IndexExpr::Kind::constant)
      return "A[" + std::to_string(t.row.value * t.stride + t.col.value) + "]";
    return "A[" + index(t.row) + "*" + std::to_string(t.stride) + " + " + index(t.col) + "]";
  }

  std::string expr(ExprId id) const
  {
    const ExprNode& n = _k.node(id);
    switch (n.op)
    {
    case Op::literal: return format_double(n.value);
    case Op::scalar: return _k.scalars[static_cast<std::size_t>(n.ref)];
    case Op::table:
    {
      const Table& t = _k.tables[static_cast<std::size_t>(n.ref)];
      std::string out = t.name;
      for (std::size_t r = 0; r < t.rank(); ++r)
        out += "[" + index(n.index[r]) + "]";
      return out;
    }
    case Op::coefficient: return "w[" + std::to_string(n.ref) + "][" + index(n.index[0]) + "]";
    case Op::jinv: return "Jinv_" + std::to_string(n.ref) + std::to_string(n.ref2);
    case Op::det: return "det";
    case Op::add: return binary(n, " + ");
    case Op::sub: return binary(n, " - ");
    case Op::mul: return binary(n, "*");
    case Op::div: return binary(n, "/");
    case Op::neg: return "-" + operand(n.lhs, 3, false);
    case Op::lincomb:
    {
      if (n.terms.empty())
        return "0";
      std::string out;
      for (std::size_t i = 0; i < n.terms.size(); ++i)
      {
        const auto [c, x] = n.terms[i];
        const double mag = c < 0 ? -c : c;
        if (i == 0)
          out += c < 0 ? "-" : "";
        else
          out += c < 0 ? " - " : " + ";
        if (mag != 1.0)
          out += format_double(mag) + "*";
        out += operand(x, 2, false);
      }
      return out;
    }
    }
    return "";
  }

private:
  const KernelIR& _k;

  std::string operand(ExprId id, int p, bool right) const
  {
    const int q = precedence(_k.node(id));
    const bool parens = right ? q <= p : q < p;
    return parens ? "(" + expr(id) + ")" : expr(id);
  }

  std::string binary(const ExprNode& n, const char* op) const
  {
    const int p = precedence(n);
    // + and * are associative for printing; - and / need the right side
    // parenthesised at equal precedence
    const bool strict = n.op == Op::sub || n.op == Op::div;
    return operand(n.lhs, p, false) + op + operand(n.rhs, p, strict);
  }
};

inline void collect_geometry(const KernelIR& k, std::set<std::pair<int, int>>& jinv)
{
  for (const auto& n : k.nodes)
    if (n.op == Op::jinv)
      jinv.insert({n.ref, n.ref2});
}

inline std::string table_literal(const Table& t)
{
  std::ostringstream out;
  if (t.rank() == 0)
    return format_double(t.data[0]);
  auto row = [&](std::size_t r, std::size_t n)
  {
    out << "{";
    for (std::size_t c = 0; c < n; ++c)
      out << (c > 0 ? ", " : "") << format_double(t.data[r * n + c]);
    out << "}";
  };
  if (t.rank() == 1)
  {
    row(0, t.shape[0]);
    return out.str();
  }
  out << "{";
  for (std::size_t r = 0; r < t.shape[0]; ++r)
  {
    if (r > 0)
      out << ",\n     ";
    row(r, t.shape[1]);
  }
  out << "}";
  return out.str();
}

class Emitter
{
public:
  explicit Emitter(const KernelIR& k) : _k(k), _p(k) {}

  void body(std::ostream& out, const std::vector<Statement>& statements, int depth)
  {
    const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
    bool first = true;
    for (const auto& s : statements)
    {
      const bool leading = std::exchange(first, false);
      switch (s.kind)
      {
      case Statement::Kind::comment: out << (leading ? "" : "\n") << pad << "// " << s.text << "\n"; break;
      case Statement::Kind::declare_scalar:
        out << pad << "const double " << name(s.slot) << " = " << _p.expr(s.expr) << ";\n";
        break;
      case Statement::Kind::assign_scalar:
        out << pad << (_declared.insert(s.slot).second ? "double " : "") << name(s.slot)
            << " = " << _p.expr(s.expr) << ";\n";
        break;
      case Statement::Kind::add_to_scalar:
        out << pad << name(s.slot) << " += " << _p.expr(s.expr) << ";\n";
        break;
      case Statement::Kind::assign_a:
        out << pad << _p.target(s.target) << " = " << _p.expr(s.expr) << ";\n";
        break;
      case Statement::Kind::accumulate_a:
        out << pad << _p.target(s.target) << " += " << _p.expr(s.expr) << ";\n";
        break;
      case Statement::Kind::zero_a:
        out << pad << "for (unsigned int k = 0; k < " << _k.tensor_size() << "; k++)\n"
            << pad << "  A[k] = 0.0;\n";
        break;
      case Statement::Kind::loop:
      {
        const std::string& v = _k.loop_vars[static_cast<std::size_t>(s.var)];
        out << pad << "for (unsigned int " << v << " = 0; " << v << " < " << s.extent << "; "
            << v << "++)\n"
            << pad << "{\n";
        body(out, s.body, depth + 1);
        out << pad << "}\n";
        break;
      }
      }
    }
  }

private:
  const KernelIR& _k;
  Printer _p;
  std::set<int> _declared;

  const std::string& name(int slot) const { return _k.scalars[static_cast<std::size_t>(slot)]; }
};

} // namespace detail

inline std::string print_expr(const KernelIR& k, ExprId id) { return detail::Printer(k).expr(id); }

/// C-flavoured source with the UFC-style signature; byte-stable.
inline std::string emit_source(const KernelIR& k, const std::string& name)
{
  std::ostringstream out;
  out << "// " << name << ": " << to_string(k.representation) << " representation";
  if (k.representation == Representation::quadrature)
    out << ", " << k.num_points << " integration point" << (k.num_points == 1 ? "" : "s");
  out << "\n// flops: " << count_flops(k) << "\n";
  out << "void tabulate_tensor_" << name
      << "(double* A, const double* const* w, const double Jinv[3][3], double det)\n{\n";

  std::set<std::pair<int, int>> jinv;
  detail::collect_geometry(k, jinv);
  if (!jinv.empty())
  {
    out << "  // Jacobian inverse components\n";
    for (auto [a, b] : jinv)
      out << "  const double Jinv_" << a << b << " = Jinv[" << a << "][" << b << "];\n";
  }
  if (!k.tables.empty() || !k.maps.empty())
    out << "\n  // Constant tables\n";
  for (const auto& t : k.tables)
  {
    if (t.rank() == 0)
    {
      out << "  const static double " << t.name << " = " << detail::table_literal(t) << ";\n";
      continue;
    }
    out << "  static const double " << t.name;
    for (auto e : t.shape)
      out << "[" << e << "]";
    out << " =\n    " << detail::table_literal(t) << ";\n";
  }
  for (const auto& m : k.maps)
  {
    out << "  static const unsigned int " << m.name << "[" << m.values.size() << "] = {";
    for (std::size_t i = 0; i < m.values.size(); ++i)
      out << (i > 0 ? ", " : "") << m.values[i];
    out << "};\n";
  }
  detail::Emitter emitter(k);
  emitter.body(out, k.body, 1);
  out << "}\n";
  return out.str();
}

namespace detail
{

inline nlohmann::ordered_json statements_json(const KernelIR& k, const std::vector<Statement>& body)
{
  Printer p(k);
  auto list = nlohmann::ordered_json::array();
  for (const auto& s : body)
  {
    nlohmann::ordered_json j;
    switch (s.kind)
    {
    case Statement::Kind::comment: j["comment"] = s.text; break;
    case Statement::Kind::declare_scalar:
      j["declare"] = k.scalars[static_cast<std::size_t>(s.slot)];
      j["expr"] = p.expr(s.expr);
      break;
    case Statement::Kind::assign_scalar:
      j["assign"] = k.scalars[static_cast<std::size_t>(s.slot)];
      j["expr"] = p.expr(s.expr);
      break;
    case Statement::Kind::add_to_scalar:
      j["add_to"] = k.scalars[static_cast<std::size_t>(s.slot)];
      j["expr"] = p.expr(s.expr);
      break;
    case Statement::Kind::assign_a:
      j["assign_a"] = p.target(s.target);
      j["expr"] = p.expr(s.expr);
      break;
    case Statement::Kind::accumulate_a:
      j["accumulate_a"] = p.target(s.target);
      j["expr"] = p.expr(s.expr);
      break;
    case Statement::Kind::zero_a: j["zero_a"] = k.tensor_size(); break;
    case Statement::Kind::loop:
      j["loop"] = k.loop_vars[static_cast<std::size_t>(s.var)];
      j["extent"] = s.extent;
      j["body"] = statements_json(k, s.body);
      break;
    }
    list.push_back(std::move(j));
  }
  return list;
}

} // namespace detail

/// Stable JSON description of the IR (`--dump-ir`).
inline std::string dump_ir(const KernelIR& k)
{
  nlohmann::ordered_json j;
  j["representation"] = to_string(k.representation);
  j["dim"] = k.dim;
  j["rows"] = k.rows;
  j["cols"] = k.cols;
  j["coefficient_dofs"] = k.coefficient_dofs;
  j["num_points"] = k.num_points;
  j["flops"] = count_flops(k);
  auto tables = nlohmann::ordered_json::array();
  for (const auto& t : k.tables)
    tables.push_back({{"name", t.name}, {"shape", t.shape}, {"data", t.data}});
  j["tables"] = tables;
  auto maps = nlohmann::ordered_json::array();
  for (const auto& m : k.maps)
    maps.push_back({{"name", m.name}, {"values", m.values}});
  j["maps"] = maps;
  j["body"] = detail::statements_json(k, k.body);
  return j.dump(2) + "\n";
}

} // namespace formc::kernel
