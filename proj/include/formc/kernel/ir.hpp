#pragma once

#include "formc/error.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace formc::kernel
{

/// Index into a table, coefficient array or A: a constant, a loop variable,
/// or an index map read at a loop variable (`nzc0[i]`).
struct IndexExpr
{
  enum class Kind
  {
    constant,
    loop,
    map
  };

  Kind kind = Kind::constant;
  int value = 0; // constant value, or loop variable id
  int map = -1;

  static IndexExpr constant(int v) { return {Kind::constant, v, -1}; }
  static IndexExpr loop(int var) { return {Kind::loop, var, -1}; }
  static IndexExpr mapped(int map_id, int var) { return {Kind::map, var, map_id}; }
};

/// Read-only constant table of rank 0, 1 or 2.
struct Table
{
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t rank() const { return shape.size(); }
};

/// Read-only index array (`nzc`).
struct IndexMap
{
  std::string name;
  std::vector<std::uint32_t> values;
};

enum class Op
{
  literal,
  scalar,      // named scalar slot
  table,       // table[idx0][idx1]
  coefficient, // w[id][idx0]
  jinv,        // Jinv_ab
  det,
  add,
  sub,
  mul,
  div,
  neg,
  lincomb // sum_k coef_k * x_k; coef +-1 skips the multiply
};

using ExprId = int;

struct ExprNode
{
  Op op = Op::literal;
  double value = 0.0;
  int ref = -1; // scalar slot, table id or coefficient id; jinv row
  int ref2 = -1; // jinv column
  IndexExpr index[2];
  ExprId lhs = -1;
  ExprId rhs = -1;
  std::vector<std::pair<double, ExprId>> terms;
};

/// Target A[row * stride + col]; linear forms use col only (stride 0).
struct ATarget
{
  IndexExpr row;
  IndexExpr col;
  int stride = 0;
};

struct Statement
{
  enum class Kind
  {
    declare_scalar, // const double s = e;
    assign_scalar,  // s = e;
    add_to_scalar,  // s += e;  (+1 flop)
    assign_a,       // A[t] = e;
    accumulate_a,   // A[t] += e;  (+1 flop)
    zero_a,         // A[:] = 0
    loop,
    comment
  };

  Kind kind = Kind::comment;
  int slot = -1;
  ExprId expr = -1;
  ATarget target;
  int var = -1;
  std::size_t extent = 0;
  std::vector<Statement> body;
  std::string text;
};

enum class Representation
{
  quadrature,
  tensor
};

inline std::string to_string(Representation r)
{
  return r == Representation::quadrature ? "quadrature" : "tensor";
}

/// Structured straight-line loop program computing one element tensor.
struct KernelIR
{
  Representation representation = Representation::quadrature;
  std::size_t dim = 2;
  std::size_t rows = 1; // test dofs
  std::size_t cols = 1; // trial dofs (1 for linear forms)
  std::vector<std::size_t> coefficient_dofs;
  std::size_t num_points = 0;

  std::vector<Table> tables;
  std::vector<IndexMap> maps;
  std::vector<std::string> scalars;
  std::vector<std::string> loop_vars;
  std::vector<ExprNode> nodes;
  std::vector<Statement> body;

  std::size_t tensor_size() const { return rows * cols; }

  int add_table(std::string name, std::vector<std::size_t> shape, std::vector<double> data)
  {
    tables.push_back({std::move(name), std::move(shape), std::move(data)});
    return static_cast<int>(tables.size()) - 1;
  }

  int add_map(std::string name, std::vector<std::uint32_t> values)
  {
    maps.push_back({std::move(name), std::move(values)});
    return static_cast<int>(maps.size()) - 1;
  }

  int add_scalar(std::string name)
  {
    scalars.push_back(std::move(name));
    return static_cast<int>(scalars.size()) - 1;
  }

  int add_loop_var(std::string name)
  {
    loop_vars.push_back(std::move(name));
    return static_cast<int>(loop_vars.size()) - 1;
  }

  ExprId push(ExprNode n)
  {
    nodes.push_back(std::move(n));
    return static_cast<ExprId>(nodes.size()) - 1;
  }

  ExprId literal(double v)
  {
    ExprNode n;
    n.op = Op::literal;
    n.value = v;
    return push(n);
  }

  ExprId scalar(int slot)
  {
    ExprNode n;
    n.op = Op::scalar;
    n.ref = slot;
    return push(n);
  }

  ExprId table(int id, IndexExpr i0 = {}, IndexExpr i1 = {})
  {
    ExprNode n;
    n.op = Op::table;
    n.ref = id;
    n.index[0] = i0;
    n.index[1] = i1;
    return push(n);
  }

  ExprId coefficient(int id, IndexExpr i)
  {
    ExprNode n;
    n.op = Op::coefficient;
    n.ref = id;
    n.index[0] = i;
    return push(n);
  }

  ExprId jinv(int a, int b)
  {
    ExprNode n;
    n.op = Op::jinv;
    n.ref = a;
    n.ref2 = b;
    return push(n);
  }

  ExprId det()
  {
    ExprNode n;
    n.op = Op::det;
    return push(n);
  }

  ExprId binary(Op op, ExprId a, ExprId b)
  {
    ExprNode n;
    n.op = op;
    n.lhs = a;
    n.rhs = b;
    return push(n);
  }

  ExprId mul(ExprId a, ExprId b) { return binary(Op::mul, a, b); }
  ExprId add(ExprId a, ExprId b) { return binary(Op::add, a, b); }

  /// Left-folded product; -1 for an empty list.
  ExprId product(const std::vector<ExprId>& factors)
  {
    ExprId out = -1;
    for (ExprId f : factors)
      out = out < 0 ? f : mul(out, f);
    return out;
  }

  /// Left-folded sum; -1 for an empty list.
  ExprId sum(const std::vector<ExprId>& terms)
  {
    ExprId out = -1;
    for (ExprId t : terms)
      out = out < 0 ? t : add(out, t);
    return out;
  }

  ExprId neg(ExprId a)
  {
    ExprNode n;
    n.op = Op::neg;
    n.lhs = a;
    return push(n);
  }

  ExprId lincomb(std::vector<std::pair<double, ExprId>> terms)
  {
    ExprNode n;
    n.op = Op::lincomb;
    n.terms = std::move(terms);
    return push(n);
  }

  const ExprNode& node(ExprId id) const { return nodes.at(static_cast<std::size_t>(id)); }
};

inline Statement declare(int slot, ExprId e)
{
  Statement s;
  s.kind = Statement::Kind::declare_scalar;
  s.slot = slot;
  s.expr = e;
  return s;
}

inline Statement assign(int slot, ExprId e)
{
  Statement s;
  s.kind = Statement::Kind::assign_scalar;
  s.slot = slot;
  s.expr = e;
  return s;
}

inline Statement add_to(int slot, ExprId e)
{
  Statement s;
  s.kind = Statement::Kind::add_to_scalar;
  s.slot = slot;
  s.expr = e;
  return s;
}

inline Statement assign_a(ATarget t, ExprId e)
{
  Statement s;
  s.kind = Statement::Kind::assign_a;
  s.target = t;
  s.expr = e;
  return s;
}

inline Statement accumulate_a(ATarget t, ExprId e)
{
  Statement s;
  s.kind = Statement::Kind::accumulate_a;
  s.target = t;
  s.expr = e;
  return s;
}

inline Statement zero_a()
{
  Statement s;
  s.kind = Statement::Kind::zero_a;
  return s;
}

inline Statement loop(int var, std::size_t extent, std::vector<Statement> body)
{
  Statement s;
  s.kind = Statement::Kind::loop;
  s.var = var;
  s.extent = extent;
  s.body = std::move(body);
  return s;
}

inline Statement comment(std::string text)
{
  Statement s;
  s.kind = Statement::Kind::comment;
  s.text = std::move(text);
  return s;
}

/// Static flop count of an expression: each + - * / and negation is one.
inline std::size_t count_flops(const KernelIR& k, ExprId id)
{
  const ExprNode& n = k.node(id);
  switch (n.op)
  {
  case Op::add:
  case Op::sub:
  case Op::mul:
  case Op::div: return 1 + count_flops(k, n.lhs) + count_flops(k, n.rhs);
  case Op::neg: return 1 + count_flops(k, n.lhs);
  case Op::lincomb:
  {
    std::size_t total = 0;
    for (std::size_t i = 0; i < n.terms.size(); ++i)
    {
      const double c = n.terms[i].first;
      total += count_flops(k, n.terms[i].second);
      if (c != 1.0 && c != -1.0)
        ++total;
      if (i > 0 || c == -1.0)
        ++total; // the add, or the leading negation
    }
    return total;
  }
  default: return 0;
  }
}

inline std::size_t count_flops(const KernelIR& k, const std::vector<Statement>& body)
{
  std::size_t total = 0;
  for (const auto& s : body)
  {
    switch (s.kind)
    {
    case Statement::Kind::declare_scalar:
    case Statement::Kind::assign_scalar:
    case Statement::Kind::assign_a: total += count_flops(k, s.expr); break;
    case Statement::Kind::add_to_scalar:
    case Statement::Kind::accumulate_a: total += 1 + count_flops(k, s.expr); break;
    case Statement::Kind::loop: total += s.extent * count_flops(k, s.body); break;
    default: break;
    }
  }
  return total;
}

/// Flops of one kernel invocation; `+=` counts one, tables cost nothing.
inline std::size_t count_flops(const KernelIR& k) { return count_flops(k, k.body); }

} // namespace formc::kernel
