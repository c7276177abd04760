#pragma once

#include "formc/dsl/typecheck.hpp"
#include "formc/elements.hpp"
#include "formc/error.hpp"
#include "formc/finite_element.hpp"
#include "formc/format.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace formc
{

enum class Role
{
  test,
  trial,
  coefficient
};

/// One basis-function factor. `deriv` lists bound index ids, one per
/// reference derivative; each id is paired with exactly one Jinv factor.
struct BasisFactor
{
  Role role = Role::test;
  int coefficient = -1;
  int component = 0;
  std::vector<int> deriv;

  int order() const { return static_cast<int>(deriv.size()); }

  friend bool operator==(const BasisFactor&, const BasisFactor&) = default;
};

/// Jinv(index, direction) = dX_index / dx_direction.
struct JinvFactor
{
  int index = 0;
  int direction = 0;

  friend bool operator==(const JinvFactor&, const JinvFactor&) = default;
};

struct Monomial
{
  double constant = 1.0;
  std::vector<BasisFactor> factors;
  std::vector<JinvFactor> jinv;
  bool det = false;
  std::vector<BasisFactor> denominators;

  std::vector<int> bound_indices() const
  {
    std::vector<int> out;
    for (const auto& j : jinv)
      out.push_back(j.index);
    std::sort(out.begin(), out.end());
    return out;
  }

  int direction_of(int index) const
  {
    for (const auto& j : jinv)
      if (j.index == index)
        return j.direction;
    return -1;
  }

  const BasisFactor* factor(Role role) const
  {
    for (const auto& f : factors)
      if (f.role == role)
        return &f;
    return nullptr;
  }
};

struct MonomialSum
{
  std::vector<Monomial> monomials;
  CellType cell = CellType::triangle;
  int arity = 1;
  FiniteElement test;
  std::optional<FiniteElement> trial;
  std::vector<FiniteElement> coefficients;
  std::vector<std::string> names; // test, trial (if any), coefficients

  std::size_t dim() const { return cell_dimension(cell); }

  const FiniteElement& element(const BasisFactor& f) const
  {
    switch (f.role)
    {
    case Role::test: return test;
    case Role::trial: return *trial;
    default: return coefficients.at(static_cast<std::size_t>(f.coefficient));
    }
  }

  bool has_division() const
  {
    return std::any_of(monomials.begin(), monomials.end(),
                       [](const Monomial& m) { return !m.denominators.empty(); });
  }
};

namespace detail
{

using Terms = std::vector<Monomial>;

// A lowered sub-expression: one term list per component multi-index,
// flattened row-major with extent d per axis.
struct LoweredTensor
{
  std::size_t rank = 0;
  std::vector<Terms> entries;
  bool zero_literal = false;
};

class Lowering
{
public:
  explicit Lowering(const dsl::TypedForm& form) : _form(form), _dim(form.dim()) {}

  MonomialSum run()
  {
    MonomialSum sum;
    sum.cell = _form.cell();
    sum.arity = _form.arity;
    sum.test = _form.test.element;
    sum.names.push_back(_form.test.name);
    if (_form.trial)
    {
      sum.trial = _form.trial->element;
      sum.names.push_back(_form.trial->name);
    }
    for (const auto& c : _form.coefficients)
    {
      sum.coefficients.push_back(c.element);
      sum.names.push_back(c.name);
    }
    LoweredTensor t = lower(*_form.integrand);
    for (auto& m : t.entries.at(0))
    {
      m.det = true;
      sum.monomials.push_back(std::move(m));
    }
    return sum;
  }

private:
  const dsl::TypedForm& _form;
  std::size_t _dim;
  int _next_index = 0;

  std::size_t size_of(std::size_t rank) const
  {
    std::size_t n = 1;
    for (std::size_t i = 0; i < rank; ++i)
      n *= _dim;
    return n;
  }

  static Monomial multiply(const Monomial& a, const Monomial& b)
  {
    Monomial m = a;
    m.constant *= b.constant;
    m.factors.insert(m.factors.end(), b.factors.begin(), b.factors.end());
    m.jinv.insert(m.jinv.end(), b.jinv.begin(), b.jinv.end());
    m.denominators.insert(m.denominators.end(), b.denominators.begin(),
                          b.denominators.end());
    return m;
  }

  static Terms multiply(const Terms& a, const Terms& b)
  {
    Terms out;
    for (const auto& x : a)
      for (const auto& y : b)
        out.push_back(multiply(x, y));
    return out;
  }

  static void append(Terms& into, const Terms& from, double sign)
  {
    for (auto m : from)
    {
      m.constant *= sign;
      into.push_back(std::move(m));
    }
  }

  // d/dx_direction of a linear term list: chain rule through Jinv.
  Terms differentiate(const Terms& terms, int direction)
  {
    Terms out;
    for (const auto& m : terms)
    {
      if (m.factors.empty())
        continue;
      if (m.factors.size() != 1 || !m.denominators.empty())
        throw Error(ErrorKind::unsupported_operator, "derivative of a product");
      Monomial d = m;
      const int index = _next_index++;
      d.factors[0].deriv.push_back(index);
      d.jinv.push_back({index, direction});
      out.push_back(std::move(d));
    }
    return out;
  }

  LoweredTensor leaf(const dsl::Expr& e)
  {
    const bool is_argument = e.kind == dsl::ExprKind::argument;
    const FiniteElement& element
        = is_argument ? _form.argument_element(e.index)
                      : _form.coefficients.at(static_cast<std::size_t>(e.index)).element;
    LoweredTensor t;
    t.rank = element.vector ? 1 : 0;
    for (std::size_t c = 0; c < element.value_size(); ++c)
    {
      Monomial m;
      BasisFactor f;
      f.role = is_argument ? (e.index == 0 ? Role::test : Role::trial) : Role::coefficient;
      f.coefficient = is_argument ? -1 : e.index;
      f.component = static_cast<int>(c);
      m.factors.push_back(f);
      t.entries.push_back({m});
    }
    return t;
  }

  LoweredTensor lower(const dsl::Expr& e)
  {
    using dsl::ExprKind;
    switch (e.kind)
    {
    case ExprKind::literal:
    {
      LoweredTensor t;
      t.entries.resize(1);
      t.zero_literal = e.value == 0.0;
      if (e.value != 0.0)
      {
        Monomial m;
        m.constant = e.value;
        t.entries[0].push_back(m);
      }
      return t;
    }
    case ExprKind::argument:
    case ExprKind::coefficient: return leaf(e);
    case ExprKind::grad:
    {
      LoweredTensor x = lower(*e.operands[0]);
      LoweredTensor t;
      t.rank = x.rank + 1;
      for (const auto& entry : x.entries)
        for (std::size_t b = 0; b < _dim; ++b)
          t.entries.push_back(differentiate(entry, static_cast<int>(b)));
      return t;
    }
    case ExprKind::div:
    {
      LoweredTensor x = lower(*e.operands[0]);
      LoweredTensor t;
      t.rank = x.rank - 1;
      t.entries.resize(size_of(t.rank));
      for (std::size_t i = 0; i < t.entries.size(); ++i)
        for (std::size_t b = 0; b < _dim; ++b)
          append(t.entries[i], differentiate(x.entries[i * _dim + b], static_cast<int>(b)), 1.0);
      return t;
    }
    case ExprKind::transp:
    {
      LoweredTensor x = lower(*e.operands[0]);
      LoweredTensor t = x;
      for (std::size_t i = 0; i < _dim; ++i)
        for (std::size_t j = 0; j < _dim; ++j)
          t.entries[i * _dim + j] = x.entries[j * _dim + i];
      return t;
    }
    case ExprKind::dot:
    {
      LoweredTensor a = lower(*e.operands[0]);
      LoweredTensor b = lower(*e.operands[1]);
      LoweredTensor t;
      if (a.rank == b.rank)
      {
        t.entries.resize(1);
        for (std::size_t i = 0; i < a.entries.size(); ++i)
          append(t.entries[0], multiply(a.entries[i], b.entries[i]), 1.0);
        return t;
      }
      t.rank = a.rank + b.rank - 2;
      const std::size_t outer = size_of(a.rank - 1);
      const std::size_t inner = size_of(b.rank - 1);
      t.entries.resize(outer * inner);
      for (std::size_t i = 0; i < outer; ++i)
        for (std::size_t j = 0; j < inner; ++j)
          for (std::size_t k = 0; k < _dim; ++k)
            append(t.entries[i * inner + j],
                   multiply(a.entries[i * _dim + k], b.entries[k * inner + j]), 1.0);
      return t;
    }
    case ExprKind::add:
    case ExprKind::sub:
    {
      LoweredTensor a = lower(*e.operands[0]);
      LoweredTensor b = lower(*e.operands[1]);
      const double sign = e.kind == ExprKind::add ? 1.0 : -1.0;
      if (a.zero_literal && b.rank > 0)
      {
        a.rank = b.rank;
        a.entries.assign(b.entries.size(), {});
      }
      if (b.zero_literal && a.rank > 0)
        return a;
      for (std::size_t i = 0; i < a.entries.size(); ++i)
        append(a.entries[i], b.entries[i], sign);
      a.zero_literal = false;
      return a;
    }
    case ExprKind::mul:
    {
      LoweredTensor a = lower(*e.operands[0]);
      LoweredTensor b = lower(*e.operands[1]);
      if (a.rank > 0)
        std::swap(a, b);
      LoweredTensor t;
      t.rank = b.rank;
      for (const auto& entry : b.entries)
        t.entries.push_back(multiply(a.entries[0], entry));
      return t;
    }
    case ExprKind::divide:
    {
      LoweredTensor num = lower(*e.operands[0]);
      LoweredTensor den = lower(*e.operands[1]);
      const Terms& d = den.entries[0];
      if (d.empty())
        throw Error(ErrorKind::division_by_zero, "division by literal zero", e.loc);
      if (d.size() != 1 || !d[0].jinv.empty() || !d[0].denominators.empty())
        throw Error(ErrorKind::unsupported_division,
                    "denominator must be a product of coefficient values", e.loc);
      for (auto& entry : num.entries)
        for (auto& m : entry)
        {
          m.constant /= d[0].constant;
          m.denominators.insert(m.denominators.end(), d[0].factors.begin(),
                                d[0].factors.end());
        }
      return num;
    }
    default: throw Error(ErrorKind::unsupported_operator, "unexpected expression in lowering");
    }
  }
};

inline int role_rank(const BasisFactor& f)
{
  return f.role == Role::test ? 0 : f.role == Role::trial ? 1 : 2 + f.coefficient;
}

// Structural sort key of a factor, with its derivative slots described by
// their Jinv directions instead of index ids.
inline std::vector<int> factor_key(const Monomial& m, const BasisFactor& f)
{
  std::vector<int> dirs;
  for (int a : f.deriv)
    dirs.push_back(m.direction_of(a));
  std::sort(dirs.begin(), dirs.end());
  std::vector<int> key{role_rank(f), f.component, f.order()};
  key.insert(key.end(), dirs.begin(), dirs.end());
  return key;
}

inline bool denominator_less(const BasisFactor& a, const BasisFactor& b)
{
  return std::make_pair(a.coefficient, a.component) < std::make_pair(b.coefficient, b.component);
}

} // namespace detail

/// Canonical factor order (role, component, derivative) and bound indices
/// renumbered 0.. in order of appearance.
inline Monomial canonicalize(const Monomial& in)
{
  Monomial m = in;
  std::stable_sort(m.factors.begin(), m.factors.end(),
                   [&](const BasisFactor& a, const BasisFactor& b)
                   { return detail::factor_key(in, a) < detail::factor_key(in, b); });
  std::map<int, int> rename;
  for (auto& f : m.factors)
  {
    std::stable_sort(f.deriv.begin(), f.deriv.end(), [&](int a, int b)
                     { return in.direction_of(a) < in.direction_of(b); });
    for (int& a : f.deriv)
    {
      const int fresh = static_cast<int>(rename.size());
      auto [it, inserted] = rename.emplace(a, fresh);
      a = it->second;
    }
  }
  for (auto& j : m.jinv)
    j.index = rename.at(j.index);
  std::sort(m.jinv.begin(), m.jinv.end(),
            [](const JinvFactor& a, const JinvFactor& b) { return a.index < b.index; });
  std::sort(m.denominators.begin(), m.denominators.end(), detail::denominator_less);
  return m;
}

/// Names used in text dumps: `test`, `trial`, `w<id>`.
inline std::string factor_name(const BasisFactor& f)
{
  switch (f.role)
  {
  case Role::test: return "test";
  case Role::trial: return "trial";
  default: return "w" + std::to_string(f.coefficient);
  }
}

inline std::string to_string(const BasisFactor& f)
{
  std::string out = factor_name(f) + "[" + std::to_string(f.component) + "]";
  if (!f.deriv.empty())
  {
    out += "{";
    for (std::size_t i = 0; i < f.deriv.size(); ++i)
      out += (i > 0 ? "," : "") + std::string("a") + std::to_string(f.deriv[i]);
    out += "}";
  }
  return out;
}

/// Everything but the constant; equal keys mean like terms.
inline std::string monomial_key(const Monomial& m)
{
  std::string out;
  for (const auto& f : m.factors)
    out += " * " + to_string(f);
  for (const auto& j : m.jinv)
    out += " * Jinv(a" + std::to_string(j.index) + "," + std::to_string(j.direction) + ")";
  if (m.det)
    out += " * det";
  for (const auto& f : m.denominators)
    out += " / " + to_string(f);
  return out;
}

inline std::string to_string(const Monomial& m)
{
  std::string c = format_double(m.constant);
  if (m.constant >= 0)
    c = "+" + c;
  return c + monomial_key(m);
}

/// One monomial per line, stable across runs.
inline std::string dump_monomials(const MonomialSum& sum)
{
  std::string out;
  for (const auto& m : sum.monomials)
    out += to_string(m) + "\n";
  return out;
}

/// Distribute products over sums, expand dot/grad/div into components and
/// apply the affine chain rule. Each monomial carries one det factor.
inline MonomialSum expand(const dsl::TypedForm& form)
{
  detail::Lowering lowering(form);
  return lowering.run();
}

/// Merge like terms, drop zero constants, canonical order.
inline MonomialSum simplify(const MonomialSum& in)
{
  MonomialSum out = in;
  out.monomials.clear();
  std::map<std::string, Monomial> merged;
  std::vector<std::string> order;
  for (const auto& m : in.monomials)
  {
    Monomial c = canonicalize(m);
    const std::string key = monomial_key(c);
    auto it = merged.find(key);
    if (it == merged.end())
    {
      merged.emplace(key, c);
      order.push_back(key);
    }
    else
      it->second.constant += c.constant;
  }
  std::sort(order.begin(), order.end());
  for (const auto& key : order)
  {
    const Monomial& m = merged.at(key);
    if (m.constant != 0.0)
      out.monomials.push_back(m);
  }
  return out;
}

/// Sum of (degree - derivative order, floored at 0) over factors plus the
/// full degree of denominator factors; maximum over monomials.
inline int estimate_degree(const MonomialSum& sum)
{
  int best = 0;
  for (const auto& m : sum.monomials)
  {
    int degree = 0;
    for (const auto& f : m.factors)
      degree += std::max(0, sum.element(f).degree - f.order());
    for (const auto& f : m.denominators)
      degree += sum.element(f).degree;
    best = std::max(best, degree);
  }
  return best;
}

/// Lowered and simplified form, ready for either backend.
inline MonomialSum lower(const dsl::TypedForm& form) { return simplify(expand(form)); }

} // namespace formc
