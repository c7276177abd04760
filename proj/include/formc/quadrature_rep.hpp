#pragma once

#include "formc/elements.hpp"
#include "formc/kernel/ir.hpp"
#include "formc/lowering.hpp"
#include "formc/quadrature.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace formc
{

/// Surviving (nonzero) columns of a [point][basis] table.
struct NonzeroColumnMap
{
  std::size_t original = 0;
  std::vector<std::uint32_t> columns;
  Table2D compacted;

  bool identity() const { return columns.size() == original; }
};

/// A column survives unless |entry| < tol at every point.
inline NonzeroColumnMap eliminate_zero_columns(const Table2D& table, double tol = 1e-14)
{
  NonzeroColumnMap m;
  m.original = table.cols;
  for (std::size_t c = 0; c < table.cols; ++c)
  {
    bool nonzero = false;
    for (std::size_t p = 0; p < table.rows && !nonzero; ++p)
      nonzero = std::fabs(table(p, c)) >= tol;
    if (nonzero)
      m.columns.push_back(static_cast<std::uint32_t>(c));
  }
  m.compacted = Table2D(table.rows, m.columns.size());
  for (std::size_t p = 0; p < table.rows; ++p)
    for (std::size_t k = 0; k < m.columns.size(); ++k)
      m.compacted(p, k) = table(p, m.columns[k]);
  return m;
}

struct QuadratureOptions
{
  bool eliminate_zeros = true;
  bool hoist = true;
  std::optional<int> points; // points per direction override
};

namespace detail
{

struct ConcreteFactor
{
  Role role = Role::test;
  int coefficient = -1;
  int component = 0;
  DerivCounts deriv{0, 0, 0};

  auto tie() const { return std::tie(role, coefficient, component, deriv); }
  bool operator<(const ConcreteFactor& o) const { return tie() < o.tie(); }
  bool operator==(const ConcreteFactor& o) const { return tie() == o.tie(); }
};

// A monomial with every bound index fixed to a reference direction.
struct ConcreteTerm
{
  double constant = 1.0;
  ConcreteFactor test;
  std::optional<ConcreteFactor> trial;
  std::vector<ConcreteFactor> coefficients;
  std::vector<ConcreteFactor> denominators;
  std::vector<std::pair<int, int>> jinv;

  auto key() const { return std::tie(test, trial, coefficients, denominators, jinv); }
};

inline std::vector<ConcreteTerm> concretize(const MonomialSum& sum)
{
  std::map<std::tuple<ConcreteFactor, std::optional<ConcreteFactor>, std::vector<ConcreteFactor>,
                      std::vector<ConcreteFactor>, std::vector<std::pair<int, int>>>,
           ConcreteTerm>
      merged;
  const std::size_t d = sum.dim();
  for (const auto& m : sum.monomials)
  {
    const auto indices = m.bound_indices();
    const int top = indices.empty() ? 0 : indices.back() + 1;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < indices.size(); ++i)
      combos *= d;
    std::vector<int> assign(static_cast<std::size_t>(top), 0);
    for (std::size_t flat = 0; flat < combos; ++flat)
    {
      std::size_t rest = flat;
      for (int a : indices)
      {
        assign[static_cast<std::size_t>(a)] = static_cast<int>(rest % d);
        rest /= d;
      }
      ConcreteTerm t;
      t.constant = m.constant;
      for (const auto& f : m.factors)
      {
        ConcreteFactor c{f.role, f.coefficient, f.component, {0, 0, 0}};
        for (int a : f.deriv)
          c.deriv[static_cast<std::size_t>(assign[static_cast<std::size_t>(a)])] += 1;
        if (f.role == Role::test)
          t.test = c;
        else if (f.role == Role::trial)
          t.trial = c;
        else
          t.coefficients.push_back(c);
      }
      for (const auto& f : m.denominators)
        t.denominators.push_back({f.role, f.coefficient, f.component, {0, 0, 0}});
      for (const auto& j : m.jinv)
        t.jinv.push_back({assign[static_cast<std::size_t>(j.index)], j.direction});
      std::sort(t.coefficients.begin(), t.coefficients.end());
      std::sort(t.denominators.begin(), t.denominators.end());
      std::sort(t.jinv.begin(), t.jinv.end());
      auto [it, inserted] = merged.try_emplace(t.key(), t);
      if (!inserted)
        it->second.constant += t.constant;
    }
  }
  std::vector<ConcreteTerm> out;
  for (auto& [key, t] : merged)
    if (t.constant != 0.0)
      out.push_back(t);
  return out;
}

class QuadratureBuilder
{
public:
  QuadratureBuilder(const MonomialSum& sum, const QuadratureRule& rule,
                    const QuadratureOptions& options)
      : _sum(sum), _rule(rule), _opt(options), _multi(rule.size() > 1)
  {
  }

  kernel::KernelIR build()
  {
    using namespace kernel;
    _k.representation = Representation::quadrature;
    _k.dim = _sum.dim();
    _k.rows = _sum.test.num_dofs();
    _k.cols = _sum.trial ? _sum.trial->num_dofs() : 1;
    for (const auto& c : _sum.coefficients)
      _k.coefficient_dofs.push_back(c.num_dofs());
    _k.num_points = _rule.size();

    auto terms = concretize(_sum);
    collect_slots(terms);
    create_tables();

    _ip = _k.add_loop_var("ip");
    _i = _k.add_loop_var("i");
    _j = _k.add_loop_var("j");
    _r = _k.add_loop_var("r");

    build_groups(terms);

    _k.body.push_back(zero_a());
    if (_opt.hoist)
      emit_hoisted();
    else
      emit_plain();
    return std::move(_k);
  }

private:
  using SlotKey = std::tuple<FiniteElement, int, DerivCounts>;

  struct Slot
  {
    int psi = -1;  // index into _psi
    int map = -1;  // -1: identity
    std::size_t extent = 0;
    bool point_invariant = false;
    std::vector<std::uint32_t> columns;
  };

  struct PsiTable
  {
    Table2D values;
    std::vector<std::string> users;
    int table = -1;
  };

  struct Signature
  {
    std::vector<int> numerator;   // F ids
    std::vector<int> denominator; // F ids
    auto tie() const { return std::tie(numerator, denominator); }
    bool operator<(const Signature& o) const { return tie() < o.tie(); }
  };

  using GeometryKey = std::pair<double, std::vector<std::pair<int, int>>>;

  struct Group
  {
    int test = -1;
    int trial = -1;
    std::map<Signature, std::vector<int>> parts; // signature -> geometry ids
    std::vector<Signature> order;
  };

  const MonomialSum& _sum;
  const QuadratureRule& _rule;
  QuadratureOptions _opt;
  bool _multi;
  kernel::KernelIR _k;

  std::map<FiniteElement, TabulatedBasis> _tabulated;
  std::map<SlotKey, int> _slot_ids;
  std::vector<Slot> _slots;
  std::vector<PsiTable> _psi;
  std::vector<std::vector<std::uint32_t>> _maps;

  std::map<ConcreteFactor, int> _f_ids;
  std::vector<ConcreteFactor> _f_factors;
  std::vector<int> _f_slot;
  std::vector<int> _f_scalar;

  std::map<GeometryKey, int> _g_ids;
  std::vector<GeometryKey> _g_keys;
  std::vector<int> _g_scalar;

  std::vector<Group> _groups;
  int _weights = -1;
  int _ip = -1, _i = -1, _j = -1, _r = -1;

  const TabulatedBasis& tabulation(const FiniteElement& e)
  {
    auto it = _tabulated.find(e);
    if (it == _tabulated.end())
      it = _tabulated.emplace(e, tabulate(e, _rule.points, 2)).first;
    return it->second;
  }

  const std::string& user_name(const ConcreteFactor& f) const
  {
    if (f.role == Role::test)
      return _sum.names[0];
    if (f.role == Role::trial)
      return _sum.names[1];
    return _sum.names[static_cast<std::size_t>(_sum.arity + f.coefficient)];
  }

  const FiniteElement& element(const ConcreteFactor& f) const
  {
    if (f.role == Role::test)
      return _sum.test;
    if (f.role == Role::trial)
      return *_sum.trial;
    return _sum.coefficients[static_cast<std::size_t>(f.coefficient)];
  }

  int slot(const ConcreteFactor& f)
  {
    const FiniteElement& e = element(f);
    const SlotKey key{e, f.component, f.deriv};
    auto it = _slot_ids.find(key);
    if (it != _slot_ids.end())
    {
      add_user(_slots[static_cast<std::size_t>(it->second)].psi, user_name(f));
      return it->second;
    }
    const Table2D full = tabulation(e).table(static_cast<std::size_t>(f.component), f.deriv);
    NonzeroColumnMap nz;
    if (_opt.eliminate_zeros)
      nz = eliminate_zero_columns(full);
    else
    {
      nz.original = full.cols;
      nz.compacted = full;
      for (std::size_t c = 0; c < full.cols; ++c)
        nz.columns.push_back(static_cast<std::uint32_t>(c));
    }
    Slot s;
    s.extent = nz.columns.size();
    s.columns = nz.columns;
    s.point_invariant = true;
    for (std::size_t p = 1; p < nz.compacted.rows; ++p)
      for (std::size_t c = 0; c < nz.compacted.cols; ++c)
        s.point_invariant = s.point_invariant && nz.compacted(p, c) == nz.compacted(0, c);
    if (s.extent > 0)
    {
      for (std::size_t t = 0; t < _psi.size() && s.psi < 0; ++t)
        if (_psi[t].values.cols == nz.compacted.cols && _psi[t].values.data == nz.compacted.data)
          s.psi = static_cast<int>(t);
      if (s.psi < 0)
      {
        _psi.push_back({nz.compacted, {}, -1});
        s.psi = static_cast<int>(_psi.size()) - 1;
      }
      add_user(s.psi, user_name(f));
      if (!nz.identity())
      {
        auto m = std::find(_maps.begin(), _maps.end(), nz.columns);
        if (m == _maps.end())
        {
          _maps.push_back(nz.columns);
          m = _maps.end() - 1;
        }
        s.map = static_cast<int>(m - _maps.begin());
      }
    }
    _slots.push_back(s);
    const int id = static_cast<int>(_slots.size()) - 1;
    _slot_ids.emplace(key, id);
    return id;
  }

  void add_user(int psi, const std::string& name)
  {
    if (psi < 0)
      return;
    auto& users = _psi[static_cast<std::size_t>(psi)].users;
    if (std::find(users.begin(), users.end(), name) == users.end())
      users.push_back(name);
  }

  int f_id(const ConcreteFactor& f)
  {
    auto it = _f_ids.find(f);
    if (it != _f_ids.end())
      return it->second;
    _f_factors.push_back(f);
    _f_slot.push_back(slot(f));
    _f_scalar.push_back(-1);
    const int id = static_cast<int>(_f_factors.size()) - 1;
    _f_ids.emplace(f, id);
    return id;
  }

  bool f_zero(int f) const { return _slots[static_cast<std::size_t>(_f_slot[static_cast<std::size_t>(f)])].extent == 0; }

  bool f_cell_level(int f) const
  {
    return _opt.hoist && _multi
           && _slots[static_cast<std::size_t>(_f_slot[static_cast<std::size_t>(f)])].point_invariant;
  }

  // Coefficient tables first so that `Psi_w` precedes `Psi_vu` in the
  // output, then argument tables.
  void collect_slots(const std::vector<ConcreteTerm>& terms)
  {
    for (const auto& t : terms)
    {
      for (const auto& f : t.coefficients)
        f_id(f);
      for (const auto& f : t.denominators)
        f_id(f);
    }
    // Arguments in (role, component, derivative direction) order, so the
    // d/dX0 table comes before d/dX1.
    std::vector<ConcreteFactor> arguments;
    for (const auto& t : terms)
    {
      arguments.push_back(t.test);
      if (t.trial)
        arguments.push_back(*t.trial);
    }
    auto rank = [](const ConcreteFactor& f)
    {
      const DerivCounts flipped{-f.deriv[0], -f.deriv[1], -f.deriv[2]};
      return std::make_tuple(f.role, f.component, f.deriv[0] + f.deriv[1] + f.deriv[2], flipped);
    };
    std::stable_sort(arguments.begin(), arguments.end(),
                     [&](const ConcreteFactor& a, const ConcreteFactor& b) { return rank(a) < rank(b); });
    for (const auto& f : arguments)
      slot(f);
  }

  void create_tables()
  {
    using namespace kernel;
    if (_multi)
    {
      _weights = _k.add_table("W" + std::to_string(_rule.size()), {_rule.size()}, _rule.weights);
    }
    else
    {
      _weights = _k.add_table("W0", {}, _rule.weights);
    }
    std::set<std::string> used;
    for (auto& p : _psi)
    {
      std::string name = "Psi_";
      for (const auto& u : p.users)
        name += u;
      if (!used.insert(name).second)
      {
        int n = 1;
        while (!used.insert(name + "_" + std::to_string(n)).second)
          ++n;
        name += "_" + std::to_string(n);
      }
      p.table = _k.add_table(name, {p.values.rows, p.values.cols}, p.values.data);
    }
    for (std::size_t m = 0; m < _maps.size(); ++m)
      _k.add_map("nzc" + std::to_string(m), _maps[m]);
  }

  int geometry_id(double c, const std::vector<std::pair<int, int>>& jinv)
  {
    const GeometryKey key{c, jinv};
    auto it = _g_ids.find(key);
    if (it != _g_ids.end())
      return it->second;
    _g_keys.push_back(key);
    _g_scalar.push_back(-1);
    const int id = static_cast<int>(_g_keys.size()) - 1;
    _g_ids.emplace(key, id);
    return id;
  }

  bool geometry_trivial(int g) const
  {
    const auto& [c, jinv] = _g_keys[static_cast<std::size_t>(g)];
    return _multi && c == 1.0 && jinv.empty();
  }

  void build_groups(const std::vector<ConcreteTerm>& terms)
  {
    std::map<std::pair<int, int>, std::size_t> index;
    for (const auto& t : terms)
    {
      const int ts = slot(t.test);
      const int us = t.trial ? slot(*t.trial) : -1;
      if (_slots[static_cast<std::size_t>(ts)].extent == 0
          || (us >= 0 && _slots[static_cast<std::size_t>(us)].extent == 0))
        continue;
      Signature sig;
      bool zero = false;
      for (const auto& f : t.coefficients)
      {
        const int id = f_id(f);
        zero = zero || f_zero(id);
        sig.numerator.push_back(id);
      }
      if (zero)
        continue;
      for (const auto& f : t.denominators)
        sig.denominator.push_back(f_id(f));
      std::sort(sig.numerator.begin(), sig.numerator.end());
      std::sort(sig.denominator.begin(), sig.denominator.end());

      auto [it, inserted] = index.try_emplace({ts, us}, _groups.size());
      if (inserted)
        _groups.push_back({ts, us, {}, {}});
      Group& g = _groups[it->second];
      auto [pit, fresh] = g.parts.try_emplace(sig);
      if (fresh)
        g.order.push_back(sig);
      pit->second.push_back(geometry_id(t.constant, t.jinv));
    }
    auto rank = [&](const Group& g)
    {
      const Slot& a = _slots[static_cast<std::size_t>(g.test)];
      const int bm = g.trial >= 0 ? _slots[static_cast<std::size_t>(g.trial)].map : -1;
      const int bp = g.trial >= 0 ? _slots[static_cast<std::size_t>(g.trial)].psi : -1;
      return std::make_tuple(a.map, bm, a.psi, bp);
    };
    std::stable_sort(_groups.begin(), _groups.end(),
                     [&](const Group& a, const Group& b) { return rank(a) < rank(b); });
  }

  // --- expression helpers -------------------------------------------------

  kernel::ExprId weight_at_point()
  {
    return _multi ? _k.table(_weights, kernel::IndexExpr::loop(_ip)) : _k.table(_weights);
  }

  // c * Jinv.. * [W0] * det, built fresh.
  kernel::ExprId geometry_expr(int g)
  {
    const auto& [c, jinv] = _g_keys[static_cast<std::size_t>(g)];
    std::vector<kernel::ExprId> factors;
    if (c != 1.0)
      factors.push_back(_k.literal(c));
    for (auto [a, b] : jinv)
      factors.push_back(_k.jinv(a, b));
    if (!_multi)
      factors.push_back(_k.table(_weights));
    factors.push_back(_k.det());
    return _k.product(factors);
  }

  kernel::ExprId geometry_ref(int g)
  {
    if (geometry_trivial(g))
      return _k.det();
    if (!_opt.hoist)
      return geometry_expr(g);
    int& s = _g_scalar[static_cast<std::size_t>(g)];
    if (s < 0)
      s = _k.add_scalar("G" + std::to_string(_g_declared++));
    return _k.scalar(s);
  }

  int _g_declared = 0;
  int _f_declared = 0;
  int _gip_declared = 0;
  int _c_declared = 0;

  kernel::ExprId f_ref(int f)
  {
    int& s = _f_scalar[static_cast<std::size_t>(f)];
    if (s < 0)
      s = _k.add_scalar("F" + std::to_string(_f_declared++));
    return _k.scalar(s);
  }

  kernel::ExprId psi_read(int slot_id, int var, bool cell_level)
  {
    const Slot& s = _slots[static_cast<std::size_t>(slot_id)];
    const int table = _psi[static_cast<std::size_t>(s.psi)].table;
    const auto row = cell_level ? kernel::IndexExpr::constant(0) : kernel::IndexExpr::loop(_ip);
    const auto col = s.extent == 1 ? kernel::IndexExpr::constant(0) : kernel::IndexExpr::loop(var);
    return _k.table(table, row, col);
  }

  kernel::IndexExpr dof_index(int slot_id, int var) const
  {
    const Slot& s = _slots[static_cast<std::size_t>(slot_id)];
    if (s.extent == 1)
      return kernel::IndexExpr::constant(static_cast<int>(s.columns[0]));
    if (s.map >= 0)
      return kernel::IndexExpr::mapped(s.map, var);
    return kernel::IndexExpr::loop(var);
  }

  // F = sum_r Psi[ip][r] * w[id][nzc[r]]
  std::vector<kernel::Statement> f_statements(int f, bool cell_level)
  {
    using namespace kernel;
    const ConcreteFactor& cf = _f_factors[static_cast<std::size_t>(f)];
    const int sid = _f_slot[static_cast<std::size_t>(f)];
    const Slot& s = _slots[static_cast<std::size_t>(sid)];
    const int slot_scalar = (f_ref(f), _f_scalar[static_cast<std::size_t>(f)]);
    if (s.extent == 0)
      return {assign(slot_scalar, _k.literal(0.0))};
    auto term = [&]
    {
      return _k.mul(psi_read(sid, _r, cell_level),
                    _k.coefficient(cf.coefficient, dof_index(sid, _r)));
    };
    if (s.extent == 1)
      return {assign(slot_scalar, term())};
    return {assign(slot_scalar, _k.literal(0.0)), loop(_r, s.extent, {add_to(slot_scalar, term())})};
  }

  // sum over signatures of (sum G) * F.. / Fden..
  kernel::ExprId group_inner(const Group& g)
  {
    std::vector<kernel::ExprId> parts;
    for (const auto& sig : g.order)
    {
      std::vector<kernel::ExprId> gs;
      for (int gid : g.parts.at(sig))
        gs.push_back(geometry_ref(gid));
      std::vector<kernel::ExprId> factors{_k.sum(gs)};
      for (int f : sig.numerator)
        factors.push_back(f_ref(f));
      kernel::ExprId e = _k.product(factors);
      for (int f : sig.denominator)
        e = _k.binary(kernel::Op::div, e, f_ref(f));
      parts.push_back(e);
    }
    return _k.sum(parts);
  }

  bool group_cell_invariant(const Group& g) const
  {
    for (const auto& sig : g.order)
    {
      for (int f : sig.numerator)
        if (!f_cell_level(f))
          return false;
      for (int f : sig.denominator)
        if (!f_cell_level(f))
          return false;
    }
    return true;
  }

  std::string group_key(const Group& g) const
  {
    std::string key;
    for (const auto& sig : g.order)
    {
      key += "(";
      for (int gid : g.parts.at(sig))
        key += "g" + std::to_string(gid);
      for (int f : sig.numerator)
        key += "*f" + std::to_string(f);
      for (int f : sig.denominator)
        key += "/f" + std::to_string(f);
      key += ")";
    }
    return key;
  }

  bool is_leaf(kernel::ExprId e) const
  {
    const auto op = _k.node(e).op;
    return op != kernel::Op::add && op != kernel::Op::sub && op != kernel::Op::mul
           && op != kernel::Op::div && op != kernel::Op::neg && op != kernel::Op::lincomb;
  }

  kernel::Statement accumulation(const Group& g, kernel::ExprId gip)
  {
    using namespace kernel;
    ATarget t;
    if (g.trial >= 0)
    {
      t.row = dof_index(g.test, _i);
      t.col = dof_index(g.trial, _j);
      t.stride = static_cast<int>(_k.cols);
      const ExprId e = _k.mul(_k.mul(psi_read(g.test, _i, false), psi_read(g.trial, _j, false)), gip);
      return accumulate_a(t, e);
    }
    t.col = dof_index(g.test, _i);
    return accumulate_a(t, _k.mul(psi_read(g.test, _i, false), gip));
  }

  std::pair<std::size_t, std::size_t> extents(const Group& g) const
  {
    const std::size_t a = _slots[static_cast<std::size_t>(g.test)].extent;
    const std::size_t b = g.trial >= 0 ? _slots[static_cast<std::size_t>(g.trial)].extent : 0;
    return {a, b};
  }

  // One loop nest per (test extent, trial extent), statements in group order.
  std::vector<kernel::Statement> nests(
      const std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::vector<kernel::Statement>>>&
          inner)
  {
    using namespace kernel;
    std::vector<Statement> out;
    for (const auto& [ext, body] : inner)
    {
      if (_sum.trial)
        out.push_back(loop(_i, ext.first, {loop(_j, ext.second, body)}));
      else
        out.push_back(loop(_i, ext.first, body));
    }
    return out;
  }

  using NestList
      = std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::vector<kernel::Statement>>>;

  static std::vector<kernel::Statement>& nest_for(NestList& list, std::pair<std::size_t, std::size_t> ext)
  {
    for (auto& [e, body] : list)
      if (e == ext)
        return body;
    list.push_back({ext, {}});
    return list.back().second;
  }

  void emit_hoisted()
  {
    using namespace kernel;
    // Decide every Gip first so that only used geometry constants and
    // F values get declared.
    std::vector<Statement> cell_f, cell_c, point_f, point_gip;
    NestList list;
    std::map<std::string, ExprId> gips;
    std::map<std::string, ExprId> cell_invariants;

    for (const auto& g : _groups)
    {
      const std::string key = group_key(g);
      ExprId gip;
      auto found = gips.find(key);
      if (found != gips.end())
        gip = found->second;
      else
      {
        ExprId inner = group_inner(g);
        if (_multi && group_cell_invariant(g) && !is_leaf(inner))
        {
          auto c = cell_invariants.find(key);
          if (c == cell_invariants.end())
          {
            const int s = _k.add_scalar("C" + std::to_string(_c_declared++));
            cell_c.push_back(declare(s, inner));
            c = cell_invariants.emplace(key, _k.scalar(s)).first;
          }
          inner = c->second;
        }
        ExprId value = _multi ? _k.mul(inner, weight_at_point()) : inner;
        if (!is_leaf(value))
        {
          const int s = _k.add_scalar("Gip" + std::to_string(_gip_declared++));
          point_gip.push_back(declare(s, value));
          value = _k.scalar(s);
        }
        gips.emplace(key, value);
        gip = value;
      }
      nest_for(list, extents(g)).push_back(accumulation(g, gip));
    }

    std::vector<Statement> geometry;
    for (std::size_t gid = 0; gid < _g_keys.size(); ++gid)
      if (_g_scalar[gid] >= 0)
        geometry.push_back(declare(_g_scalar[gid], geometry_expr(static_cast<int>(gid))));
    // G scalars were numbered on first use; declare them in numeric order.
    std::sort(geometry.begin(), geometry.end(),
              [](const Statement& a, const Statement& b) { return a.slot < b.slot; });

    for (std::size_t f = 0; f < _f_factors.size(); ++f)
    {
      if (_f_scalar[f] < 0)
        continue;
      auto s = f_statements(static_cast<int>(f), f_cell_level(static_cast<int>(f)));
      auto& into = f_cell_level(static_cast<int>(f)) ? cell_f : point_f;
      into.insert(into.end(), s.begin(), s.end());
    }

    auto& body = _k.body;
    if (!geometry.empty())
    {
      body.push_back(comment("Geometry constants"));
      body.insert(body.end(), geometry.begin(), geometry.end());
    }
    if (!cell_f.empty() || !cell_c.empty())
    {
      body.push_back(comment("Cell-invariant function values"));
      body.insert(body.end(), cell_f.begin(), cell_f.end());
      body.insert(body.end(), cell_c.begin(), cell_c.end());
    }
    std::vector<Statement> point;
    if (!point_f.empty())
    {
      point.push_back(comment("Compute function values"));
      point.insert(point.end(), point_f.begin(), point_f.end());
    }
    point.insert(point.end(), point_gip.begin(), point_gip.end());
    auto loops = nests(list);
    point.insert(point.end(), loops.begin(), loops.end());
    body.push_back(comment("Loop integration points"));
    body.push_back(loop(_ip, _rule.size(), std::move(point)));
  }

  // No loop-invariant code motion: F values and geometry are recomputed
  // for every (i, j) trip.
  void emit_plain()
  {
    using namespace kernel;
    NestList list;
    std::vector<std::vector<int>> nest_fs;
    std::vector<std::pair<std::size_t, std::size_t>> nest_ext;
    for (const auto& g : _groups)
    {
      const auto ext = extents(g);
      auto pos = std::find(nest_ext.begin(), nest_ext.end(), ext);
      if (pos == nest_ext.end())
      {
        nest_ext.push_back(ext);
        nest_fs.emplace_back();
        pos = nest_ext.end() - 1;
      }
      auto& fs = nest_fs[static_cast<std::size_t>(pos - nest_ext.begin())];
      for (const auto& sig : g.order)
      {
        for (int f : sig.numerator)
          if (std::find(fs.begin(), fs.end(), f) == fs.end())
            fs.push_back(f);
        for (int f : sig.denominator)
          if (std::find(fs.begin(), fs.end(), f) == fs.end())
            fs.push_back(f);
      }
    }
    for (std::size_t n = 0; n < nest_ext.size(); ++n)
    {
      auto& body = nest_for(list, nest_ext[n]);
      for (int f : nest_fs[n])
      {
        auto s = f_statements(f, false);
        body.insert(body.end(), s.begin(), s.end());
      }
    }
    for (const auto& g : _groups)
    {
      ExprId inner = group_inner(g);
      ExprId gip = _multi ? _k.mul(inner, weight_at_point()) : inner;
      nest_for(list, extents(g)).push_back(accumulation(g, gip));
    }
    _k.body.push_back(comment("Loop integration points"));
    _k.body.push_back(loop(_ip, _rule.size(), nests(list)));
  }
};

} // namespace detail

/// Quadrature representation kernel on a given rule.
inline kernel::KernelIR build_quadrature_kernel(const MonomialSum& sum, const QuadratureRule& rule,
                                                const QuadratureOptions& options = {})
{
  return detail::QuadratureBuilder(sum, rule, options).build();
}

/// Quadrature rule chosen from the estimated degree (or options.points).
inline QuadratureRule quadrature_rule_for(const MonomialSum& sum, const QuadratureOptions& options = {})
{
  return rule_for_form(sum.cell, estimate_degree(sum), options.points);
}

inline kernel::KernelIR build_quadrature_kernel(const MonomialSum& sum,
                                                const QuadratureOptions& options = {})
{
  return build_quadrature_kernel(sum, quadrature_rule_for(sum, options), options);
}

} // namespace formc
