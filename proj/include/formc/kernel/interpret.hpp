#pragma once

#include "formc/error.hpp"
#include "formc/kernel/geometry.hpp"
#include "formc/kernel/ir.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace formc::kernel
{

/// Coefficient dof arrays, one per coefficient in id order.
using Coefficients = std::vector<std::vector<double>>;

namespace detail
{

class Interpreter
{
public:
  Interpreter(const KernelIR& k, const CellGeometry& g, const Coefficients& w,
              std::span<double> A, std::size_t* ops)
      : _k(k), _g(g), _w(w), _A(A), _ops(ops), _scalars(k.scalars.size(), 0.0),
        _vars(k.loop_vars.size(), 0)
  {
  }

  void run()
  {
    std::fill(_A.begin(), _A.end(), 0.0);
    execute(_k.body);
  }

private:
  const KernelIR& _k;
  const CellGeometry& _g;
  const Coefficients& _w;
  std::span<double> _A;
  std::size_t* _ops;
  std::vector<double> _scalars;
  std::vector<std::size_t> _vars;

  void count(std::size_t n = 1)
  {
    if (_ops)
      *_ops += n;
  }

  std::size_t index(const IndexExpr& i) const
  {
    switch (i.kind)
    {
    case IndexExpr::Kind::constant: return static_cast<std::size_t>(i.value);
    case IndexExpr::Kind::loop: return _vars[static_cast<std::size_t>(i.value)];
    default:
      return _k.maps[static_cast<std::size_t>(i.map)].values[_vars[static_cast<std::size_t>(i.value)]];
    }
  }

  double eval(ExprId id)
  {
    const ExprNode& n = _k.nodes[static_cast<std::size_t>(id)];
    switch (n.op)
    {
    case Op::literal: return n.value;
    case Op::scalar: return _scalars[static_cast<std::size_t>(n.ref)];
    case Op::table:
    {
      const Table& t = _k.tables[static_cast<std::size_t>(n.ref)];
      if (t.rank() == 0)
        return t.data[0];
      if (t.rank() == 1)
        return t.data[index(n.index[0])];
      return t.data[index(n.index[0]) * t.shape[1] + index(n.index[1])];
    }
    case Op::coefficient:
      return _w[static_cast<std::size_t>(n.ref)][index(n.index[0])];
    case Op::jinv:
      return _g.Jinv[static_cast<std::size_t>(n.ref)][static_cast<std::size_t>(n.ref2)];
    case Op::det: return _g.det;
    case Op::add:
    {
      const double a = eval(n.lhs);
      const double b = eval(n.rhs);
      count();
      return a + b;
    }
    case Op::sub:
    {
      const double a = eval(n.lhs);
      const double b = eval(n.rhs);
      count();
      return a - b;
    }
    case Op::mul:
    {
      const double a = eval(n.lhs);
      const double b = eval(n.rhs);
      count();
      return a * b;
    }
    case Op::div:
    {
      const double a = eval(n.lhs);
      const double b = eval(n.rhs);
      count();
      if (b == 0.0)
        throw Error(ErrorKind::division_by_zero, "division by zero in expression node "
                                                     + std::to_string(id));
      return a / b;
    }
    case Op::neg:
    {
      const double a = eval(n.lhs);
      count();
      return -a;
    }
    case Op::lincomb:
    {
      double s = 0.0;
      for (std::size_t i = 0; i < n.terms.size(); ++i)
      {
        const auto [c, x] = n.terms[i];
        double v = eval(x);
        if (c == -1.0)
          v = -v;
        else if (c != 1.0)
        {
          v *= c;
          count();
        }
        if (i == 0)
        {
          if (c == -1.0)
            count();
          s = v;
        }
        else
        {
          s += v;
          count();
        }
      }
      return s;
    }
    }
    return 0.0;
  }

  std::size_t target(const ATarget& t) const
  {
    return index(t.row) * static_cast<std::size_t>(t.stride) + index(t.col);
  }

  void execute(const std::vector<Statement>& body)
  {
    for (const auto& s : body)
    {
      switch (s.kind)
      {
      case Statement::Kind::declare_scalar:
      case Statement::Kind::assign_scalar:
        _scalars[static_cast<std::size_t>(s.slot)] = eval(s.expr);
        break;
      case Statement::Kind::add_to_scalar:
        _scalars[static_cast<std::size_t>(s.slot)] += eval(s.expr);
        count();
        break;
      case Statement::Kind::assign_a: _A[target(s.target)] = eval(s.expr); break;
      case Statement::Kind::accumulate_a:
        _A[target(s.target)] += eval(s.expr);
        count();
        break;
      case Statement::Kind::zero_a: std::fill(_A.begin(), _A.end(), 0.0); break;
      case Statement::Kind::loop:
      {
        auto& var = _vars[static_cast<std::size_t>(s.var)];
        for (var = 0; var < s.extent; ++var)
          execute(s.body);
        break;
      }
      case Statement::Kind::comment: break;
      }
    }
  }
};

} // namespace detail

/// Execute a kernel into caller-owned storage; `ops`, when given, is
/// incremented by every + - * / and negation performed.
inline void interpret(const KernelIR& k, const CellGeometry& g, const Coefficients& w,
                      std::span<double> A, std::size_t* ops = nullptr)
{
  detail::Interpreter(k, g, w, A, ops).run();
}

inline std::vector<double> interpret(const KernelIR& k, const CellGeometry& g,
                                     const Coefficients& w, std::size_t* ops = nullptr)
{
  std::vector<double> A(k.tensor_size(), 0.0);
  interpret(k, g, w, A, ops);
  return A;
}

} // namespace formc::kernel
