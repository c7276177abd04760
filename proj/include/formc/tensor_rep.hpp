#pragma once

#include "formc/elements.hpp"
#include "formc/error.hpp"
#include "formc/kernel/ir.hpp"
#include "formc/lowering.hpp"
#include "formc/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace formc
{

struct TensorOptions
{
  bool drop_zeros = true;
  std::size_t max_reference_entries = 5'000'000;
};

/// Reference tensor A0 of one group of monomials sharing basis factors.
/// Layout: [test dof][trial dof][coefficient dofs...][bound directions...],
/// dof axes run over the component block of each factor only.
struct ReferenceTensor
{
  std::vector<BasisFactor> factors;
  std::vector<std::size_t> extents;
  std::vector<std::size_t> block_offset; // per factor, first dof of the component block
  std::size_t num_bound = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

/// One reference tensor and the monomials (geometry parts) that share it.
struct TensorGroup
{
  ReferenceTensor reference;
  std::vector<Monomial> monomials;
};

namespace detail
{

inline std::string reference_key(const Monomial& m)
{
  std::string key;
  for (const auto& f : m.factors)
    key += to_string(f) + ";";
  return key;
}

inline std::size_t reference_extent(const MonomialSum& sum, const Monomial& m)
{
  std::size_t n = 1;
  for (const auto& f : m.factors)
  {
    n *= sum.element(f).scalar_dofs();
    for (std::size_t k = 0; k < f.deriv.size(); ++k)
      n *= sum.dim();
  }
  return n;
}

} // namespace detail

/// Group monomials by their basis factors; throws UnsupportedDivision.
inline std::vector<TensorGroup> tensor_groups(const MonomialSum& sum)
{
  if (sum.has_division())
    throw Error(ErrorKind::unsupported_division,
                "the tensor representation does not support division by a coefficient");
  std::vector<TensorGroup> groups;
  std::map<std::string, std::size_t> index;
  for (const auto& m : sum.monomials)
  {
    auto [it, inserted] = index.try_emplace(detail::reference_key(m), groups.size());
    if (inserted)
    {
      TensorGroup g;
      g.reference.factors = m.factors;
      groups.push_back(std::move(g));
    }
    groups[it->second].monomials.push_back(m);
  }
  return groups;
}

/// Fill A0 by exact quadrature of the product of reference basis functions.
inline void compute_reference_tensor(const MonomialSum& sum, ReferenceTensor& ref)
{
  const std::size_t d = sum.dim();
  const auto& factors = ref.factors;

  int degree = 0;
  ref.extents.clear();
  ref.block_offset.clear();
  ref.num_bound = 0;
  std::vector<int> owner; // bound id -> factor
  for (std::size_t fi = 0; fi < factors.size(); ++fi)
  {
    const auto& f = factors[fi];
    const FiniteElement& e = sum.element(f);
    degree += std::max(0, e.degree - f.order());
    ref.extents.push_back(e.scalar_dofs());
    ref.block_offset.push_back(static_cast<std::size_t>(f.component) * e.scalar_dofs());
    for (int a : f.deriv)
    {
      if (a >= static_cast<int>(owner.size()))
        owner.resize(static_cast<std::size_t>(a) + 1, -1);
      if (owner[static_cast<std::size_t>(a)] >= 0)
        throw Error(ErrorKind::unsupported_operator, "bound index shared between basis factors");
      owner[static_cast<std::size_t>(a)] = static_cast<int>(fi);
    }
  }
  ref.num_bound = owner.size();
  for (std::size_t a = 0; a < ref.num_bound; ++a)
    ref.extents.push_back(d);

  std::vector<std::size_t> strides(ref.extents.size(), 1);
  std::size_t total = 1;
  for (std::size_t k = ref.extents.size(); k-- > 0;)
  {
    strides[k] = total;
    total *= ref.extents[k];
  }
  ref.values.assign(total, 0.0);

  const QuadratureRule rule = simplex_rule(sum.cell, degree);
  std::map<FiniteElement, TabulatedBasis> tables;
  for (const auto& f : factors)
  {
    const FiniteElement& e = sum.element(f);
    if (!tables.count(e))
      tables.emplace(e, tabulate(e, rule.points, 2));
  }

  // Per factor: local entries (dof, own directions) with their A0 offsets.
  struct Local
  {
    std::size_t offset;
    std::size_t dof;
    DerivCounts deriv;
  };
  std::vector<std::vector<Local>> locals(factors.size());
  for (std::size_t fi = 0; fi < factors.size(); ++fi)
  {
    const auto& f = factors[fi];
    std::size_t combos = 1;
    for (std::size_t k = 0; k < f.deriv.size(); ++k)
      combos *= d;
    for (std::size_t dof = 0; dof < ref.extents[fi]; ++dof)
      for (std::size_t c = 0; c < combos; ++c)
      {
        Local l{dof * strides[fi], dof, {0, 0, 0}};
        std::size_t rest = c;
        for (int a : f.deriv)
        {
          const std::size_t dir = rest % d;
          rest /= d;
          l.deriv[dir] += 1;
          l.offset += dir * strides[factors.size() + static_cast<std::size_t>(a)];
        }
        locals[fi].push_back(l);
      }
  }

  std::vector<std::vector<double>> point_values(factors.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
  {
    for (std::size_t fi = 0; fi < factors.size(); ++fi)
    {
      const TabulatedBasis& t = tables.at(sum.element(factors[fi]));
      point_values[fi].resize(locals[fi].size());
      for (std::size_t l = 0; l < locals[fi].size(); ++l)
        point_values[fi][l] = t.scalar(locals[fi][l].deriv)(q, locals[fi][l].dof);
    }
    // Outer product over factors, accumulated into A0.
    auto recurse = [&](auto&& self, std::size_t fi, std::size_t offset, double value) -> void
    {
      if (fi == factors.size())
      {
        ref.values[offset] += value;
        return;
      }
      for (std::size_t l = 0; l < locals[fi].size(); ++l)
      {
        const double v = point_values[fi][l];
        if (v != 0.0)
          self(self, fi + 1, offset + locals[fi][l].offset, value * v);
      }
    };
    recurse(recurse, 0, 0, rule.weights[q]);
  }
  for (double& v : ref.values)
    if (std::fabs(v) < 1e-12)
      v = 0.0;
}

/// Reference tensors for every group; throws ResourceLimit beyond the cap.
inline std::vector<TensorGroup> reference_tensors(const MonomialSum& sum,
                                                  const TensorOptions& options = {})
{
  auto groups = tensor_groups(sum);
  std::size_t total = 0;
  for (const auto& g : groups)
    total += detail::reference_extent(sum, g.monomials.front());
  if (total > options.max_reference_entries)
  {
    throw Error(ErrorKind::resource_limit,
                "reference tensor needs " + std::to_string(total) + " entries (limit "
                    + std::to_string(options.max_reference_entries) + ")");
  }
  for (auto& g : groups)
    compute_reference_tensor(sum, g.reference);
  return groups;
}

namespace detail
{

class TensorBuilder
{
public:
  TensorBuilder(const MonomialSum& sum, const TensorOptions& options) : _sum(sum), _opt(options) {}

  kernel::KernelIR build()
  {
    using namespace kernel;
    _k.representation = Representation::tensor;
    _k.dim = _sum.dim();
    _k.rows = _sum.test.num_dofs();
    _k.cols = _sum.trial ? _sum.trial->num_dofs() : 1;
    for (const auto& c : _sum.coefficients)
      _k.coefficient_dofs.push_back(c.num_dofs());

    const auto groups = reference_tensors(_sum, _opt);
    std::vector<std::vector<std::pair<double, ExprId>>> entries(_k.tensor_size());

    for (const auto& g : groups)
      contract(g, entries);
    for (auto& terms : entries)
      finish(terms);

    auto& body = _k.body;
    if (!_declarations.empty())
    {
      body.push_back(comment("Geometry tensor"));
      body.insert(body.end(), _declarations.begin(), _declarations.end());
    }
    body.push_back(comment("Element tensor"));
    for (std::size_t e = 0; e < entries.size(); ++e)
    {
      ATarget t;
      t.col = IndexExpr::constant(static_cast<int>(e));
      ExprId value = entries[e].empty() ? _k.literal(0.0) : _k.lincomb(entries[e]);
      body.push_back(assign_a(t, value));
    }
    return std::move(_k);
  }

private:
  const MonomialSum& _sum;
  TensorOptions _opt;
  kernel::KernelIR _k;
  std::vector<kernel::Statement> _declarations;

  // Geometry part key: sorted (constant, jinv pairs) list.
  using SKey = std::vector<std::pair<double, std::vector<std::pair<int, int>>>>;
  std::map<SKey, kernel::ExprId> _bases;
  std::map<std::pair<kernel::ExprId, std::pair<int, std::size_t>>, kernel::ExprId> _products;
  int _declared = 0;

  kernel::ExprId declare_scalar(kernel::ExprId e)
  {
    const int s = _k.add_scalar("G" + std::to_string(_declared++));
    _declarations.push_back(kernel::declare(s, e));
    return _k.scalar(s);
  }

  // det * sum_m c_m prod Jinv; a pure constant returns det and the factor.
  std::pair<kernel::ExprId, double> base(const SKey& key)
  {
    if (key.size() == 1 && key[0].second.empty())
      return {det(), key[0].first};
    auto it = _bases.find(key);
    if (it != _bases.end())
      return {it->second, 1.0};
    std::vector<kernel::ExprId> terms;
    for (const auto& [c, jinv] : key)
    {
      std::vector<kernel::ExprId> fs;
      if (c != 1.0)
        fs.push_back(_k.literal(c));
      for (auto [a, b] : jinv)
        fs.push_back(_k.jinv(a, b));
      terms.push_back(fs.empty() ? _k.literal(1.0) : _k.product(fs));
    }
    kernel::ExprId s = _k.sum(terms);
    kernel::ExprId value = declare_scalar(_k.mul(s, _k.det()));
    _bases.emplace(key, value);
    return {value, 1.0};
  }

  kernel::ExprId _det = -1;
  kernel::ExprId det()
  {
    if (_det < 0)
      _det = _k.det();
    return _det;
  }

  kernel::ExprId product(kernel::ExprId prefix, int coefficient, std::size_t dof)
  {
    const auto key = std::make_pair(prefix, std::make_pair(coefficient, dof));
    auto it = _products.find(key);
    if (it != _products.end())
      return it->second;
    const auto w = _k.coefficient(coefficient, kernel::IndexExpr::constant(static_cast<int>(dof)));
    const auto value = declare_scalar(_k.mul(prefix, w));
    _products.emplace(key, value);
    return value;
  }

  // Terms sharing a geometry scalar (across groups) are merged in finish().
  static void add_term(std::vector<std::pair<double, kernel::ExprId>>& terms, double c,
                       kernel::ExprId x)
  {
    terms.push_back({c, x});
  }

  void finish(std::vector<std::pair<double, kernel::ExprId>>& terms) const
  {
    std::stable_sort(terms.begin(), terms.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    std::size_t out = 0;
    for (std::size_t k = 0; k < terms.size(); ++k)
    {
      if (out > 0 && terms[out - 1].second == terms[k].second)
        terms[out - 1].first += terms[k].first;
      else
        terms[out++] = terms[k];
    }
    terms.resize(out);
    if (_opt.drop_zeros)
      std::erase_if(terms, [](const auto& t) { return t.first == 0.0; });
  }

  void contract(const TensorGroup& g,
                std::vector<std::vector<std::pair<double, kernel::ExprId>>>& entries)
  {
    const ReferenceTensor& ref = g.reference;
    const std::size_t d = _sum.dim();
    const std::size_t nf = ref.factors.size();
    const std::size_t nargs = static_cast<std::size_t>(_sum.arity);

    std::size_t combos = 1;
    for (std::size_t a = 0; a < ref.num_bound; ++a)
      combos *= d;

    // Geometry part for every bound direction assignment.
    std::vector<SKey> s_keys(combos);
    for (std::size_t c = 0; c < combos; ++c)
    {
      std::vector<int> dirs(ref.num_bound);
      std::size_t rest = c;
      for (std::size_t a = ref.num_bound; a-- > 0;)
      {
        dirs[a] = static_cast<int>(rest % d);
        rest /= d;
      }
      std::map<std::vector<std::pair<int, int>>, double> merged;
      for (const auto& m : g.monomials)
      {
        std::vector<std::pair<int, int>> jinv;
        for (const auto& j : m.jinv)
          jinv.push_back({dirs[static_cast<std::size_t>(j.index)], j.direction});
        std::sort(jinv.begin(), jinv.end());
        merged[jinv] += m.constant;
      }
      for (const auto& [jinv, cst] : merged)
        if (cst != 0.0)
          s_keys[c].push_back({cst, jinv});
    }

    // Walk A0 in layout order.
    std::vector<std::size_t> idx(ref.extents.size(), 0);
    for (std::size_t flat = 0; flat < ref.values.size(); ++flat)
    {
      std::size_t rest = flat;
      for (std::size_t k = ref.extents.size(); k-- > 0;)
      {
        idx[k] = rest % ref.extents[k];
        rest /= ref.extents[k];
      }
      const double v = ref.values[flat];
      if (v == 0.0 && _opt.drop_zeros)
        continue;
      std::size_t c = 0;
      for (std::size_t a = 0; a < ref.num_bound; ++a)
        c = c * d + idx[nf + a];
      if (s_keys[c].empty())
        continue;

      auto [g_expr, scale] = base(s_keys[c]);
      for (std::size_t fi = nargs; fi < nf; ++fi)
      {
        const auto& f = ref.factors[fi];
        g_expr = product(g_expr, f.coefficient, ref.block_offset[fi] + idx[fi]);
      }
      std::size_t row = ref.block_offset[0] + idx[0];
      std::size_t entry = row;
      if (nargs == 2)
        entry = row * _k.cols + ref.block_offset[1] + idx[1];
      add_term(entries[entry], v * scale, g_expr);
    }
  }
};

} // namespace detail

/// Tensor contraction kernel: A[i] = sum_alpha A0[i, alpha] G[alpha].
inline kernel::KernelIR build_tensor_kernel(const MonomialSum& sum, const TensorOptions& options = {})
{
  return detail::TensorBuilder(sum, options).build();
}

} // namespace formc
