#pragma once

#include "formc/harness/compare.hpp"

#include <algorithm>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

namespace formc::harness
{

enum class FormFamily
{
  mass,
  elasticity,
  vector_poisson
};

inline std::string to_string(FormFamily f)
{
  switch (f)
  {
  case FormFamily::mass: return "mass";
  case FormFamily::elasticity: return "elasticity";
  default: return "vector_poisson";
  }
}

/// Form source for a family premultiplied by nf functions of degree p.
inline std::string family_source(FormFamily family, int dim, int p, int q, int nf)
{
  const std::string cell = dim == 2 ? "triangle" : "tetrahedron";
  const bool vector_args = family != FormFamily::mass;
  const bool vector_coefficients = family == FormFamily::vector_poisson;
  std::ostringstream s;
  s << "element = " << (vector_args ? "VectorElement" : "FiniteElement") << "(\"Lagrange\", \""
    << cell << "\", " << q << ")\n";
  if (nf > 0)
  {
    s << "element_f = " << (vector_coefficients ? "VectorElement" : "FiniteElement") << "(\""
      << (p == 0 ? "Discontinuous Lagrange" : "Lagrange") << "\", \"" << cell << "\", " << p
      << ")\n";
  }
  s << "\nv = TestFunction(element)\nu = TrialFunction(element)\n\n";
  std::string factors;
  for (int i = 0; i < nf; ++i)
  {
    s << "f" << i << " = Function(element_f)\n";
    factors += vector_coefficients ? "div(f" + std::to_string(i) + ")*" : "f" + std::to_string(i) + "*";
  }
  switch (family)
  {
  case FormFamily::mass: s << "\na = " << factors << "dot(v, u)*dx\n"; break;
  case FormFamily::elasticity:
    s << "\ndef eps(v):\n    return grad(v) + transp(grad(v))\n\n";
    s << "a = " << factors << "0.25*dot(eps(v), eps(u))*dx\n";
    break;
  case FormFamily::vector_poisson: s << "\na = " << factors << "dot(grad(v), grad(u))*dx\n"; break;
  }
  return s.str();
}

struct TrendEntry
{
  FormFamily family = FormFamily::mass;
  int dim = 2;
  int p = 0;
  int q = 1;
  int nf = 1;
  ComparisonReport report;

  std::string name() const
  {
    return to_string(family) + "_" + std::to_string(dim) + "d_p" + std::to_string(p) + "_q"
           + std::to_string(q) + "_nf" + std::to_string(nf);
  }
};

struct TrendSweep
{
  FormFamily family = FormFamily::mass;
  int dim = 2;
  std::vector<int> ps;
  std::vector<int> qs;
  std::vector<int> nfs;
};

/// Sweeps of the suite; `quick` keeps the 2D mass and low-order elasticity tables.
inline std::vector<TrendSweep> trend_sweeps(bool quick)
{
  if (quick)
  {
    return {{FormFamily::mass, 2, {0, 1, 2, 3}, {1, 2, 3, 4}, {1, 2, 3, 4}},
            {FormFamily::elasticity, 2, {1}, {1, 2, 3, 4}, {1, 2, 3}}};
  }
  return {{FormFamily::mass, 2, {0, 1, 2, 3}, {1, 2, 3, 4}, {1, 2, 3, 4}},
          {FormFamily::mass, 3, {0, 1, 2, 3}, {1, 2, 3}, {1, 2}},
          {FormFamily::elasticity, 2, {0, 1, 2, 3}, {1, 2, 3, 4}, {1, 2, 3, 4}},
          {FormFamily::elasticity, 3, {0, 1, 2, 3}, {1, 2, 3}, {1, 2}},
          {FormFamily::vector_poisson, 2, {1, 2, 3}, {1, 2, 3, 4}, {1, 2}}};
}

/// Flop counts for every sweep cell; backend failures keep the entry with
/// the failure recorded instead of aborting.
inline std::vector<TrendEntry> trend_suite(bool quick = false,
                                           const std::function<void(const TrendEntry&)>& progress = {})
{
  CompareOptions options;
  options.cells = 0;
  options.run_benchmark = false;
  options.compile.emit = false;
  std::vector<TrendEntry> out;
  for (const auto& sweep : trend_sweeps(quick))
    for (int p : sweep.ps)
      for (int q : sweep.qs)
        for (int nf : sweep.nfs)
        {
          TrendEntry e{sweep.family, sweep.dim, p, q, nf, {}};
          e.report = compare(e.name(), family_source(sweep.family, sweep.dim, p, q, nf), options);
          if (progress)
            progress(e);
          out.push_back(std::move(e));
        }
  return out;
}

/// Tables with rows (p, q), column pairs (tensor flops, q/t) per nf.
inline std::string render_trends(const std::vector<TrendEntry>& entries)
{
  std::ostringstream out;
  std::vector<std::pair<FormFamily, int>> tables;
  for (const auto& e : entries)
    if (std::find(tables.begin(), tables.end(), std::make_pair(e.family, e.dim)) == tables.end())
      tables.push_back({e.family, e.dim});

  for (auto [family, dim] : tables)
  {
    std::vector<int> nfs;
    std::vector<std::pair<int, int>> rows;
    for (const auto& e : entries)
    {
      if (e.family != family || e.dim != dim)
        continue;
      if (std::find(nfs.begin(), nfs.end(), e.nf) == nfs.end())
        nfs.push_back(e.nf);
      if (std::find(rows.begin(), rows.end(), std::make_pair(e.p, e.q)) == rows.end())
        rows.push_back({e.p, e.q});
    }
    out << to_string(family) << " " << dim << "D: tensor flops and q/t\n";
    out << "             ";
    for (int nf : nfs)
      out << "| nf = " << nf << std::string(18, ' ');
    out << "\n";
    for (auto [p, q] : rows)
    {
      out << "p = " << p << ", q = " << q << " ";
      for (int nf : nfs)
      {
        const TrendEntry* hit = nullptr;
        for (const auto& e : entries)
          if (e.family == family && e.dim == dim && e.p == p && e.q == q && e.nf == nf)
            hit = &e;
        std::string cell;
        if (hit && hit->report.ratio())
        {
          std::string flops = std::to_string(*hit->report.flops_tensor);
          std::string ratio = detail::fixed(*hit->report.ratio(), 2);
          cell = std::string(10 - std::min<std::size_t>(10, flops.size()), ' ') + flops
                 + std::string(8 - std::min<std::size_t>(8, ratio.size()), ' ') + ratio;
        }
        else if (hit)
          cell = "       " + std::string(failure_marker);
        out << "| " << cell << std::string(24 - std::min<std::size_t>(24, cell.size()), ' ');
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

} // namespace formc::harness
