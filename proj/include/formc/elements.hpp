#pragma once

#include "formc/error.hpp"
#include "formc/finite_element.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace formc
{

using Point = std::array<double, 3>;

/// Reference derivative as counts per reference direction, e.g. {1,0,0}
/// is d/dX0 and {1,1,0} is d2/dX0dX1.
using DerivCounts = std::array<int, 3>;

constexpr int order(const DerivCounts& d) { return d[0] + d[1] + d[2]; }

/// Dense row-major [rows][cols] table.
struct Table2D
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Table2D() = default;
  Table2D(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

namespace detail
{

// Edges and faces of the reference simplex in lexicographic vertex order.
inline std::vector<std::array<int, 2>> simplex_edges(std::size_t dim)
{
  if (dim == 2)
    return {{0, 1}, {0, 2}, {1, 2}};
  return {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
}

inline std::vector<std::array<int, 3>> simplex_faces(std::size_t dim)
{
  if (dim == 2)
    return {{0, 1, 2}};
  return {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};
}

} // namespace detail

/// Equispaced principal lattice of the given degree: vertices, then edge
/// points (increasing parameter from the lower to the higher vertex), then
/// face points, then cell-interior points. Degree 0 gives the barycenter.
inline std::vector<Point> lattice_points(const ReferenceCell& cell, int degree)
{
  const std::size_t d = cell.dim();
  const auto v = cell.vertices();
  std::vector<Point> points;
  if (degree == 0)
  {
    Point c{0, 0, 0};
    for (const auto& x : v)
      for (std::size_t i = 0; i < d; ++i)
        c[i] += x[i] / static_cast<double>(d + 1);
    points.push_back(c);
    return points;
  }
  const double n = static_cast<double>(degree);
  auto lerp = [&](const Point& base, std::initializer_list<std::pair<const Point*, int>> steps)
  {
    Point p = base;
    for (auto [dir, k] : steps)
      for (std::size_t i = 0; i < 3; ++i)
        p[i] += (static_cast<double>(k) / n) * ((*dir)[i] - base[i]);
    return p;
  };

  for (const auto& x : v)
    points.push_back(x);
  for (auto [a, b] : detail::simplex_edges(d))
    for (int k = 1; k < degree; ++k)
      points.push_back(lerp(v[a], {{&v[b], k}}));
  for (auto [a, b, c] : detail::simplex_faces(d))
    for (int j = 1; j < degree; ++j)
      for (int i = 1; i + j < degree; ++i)
        points.push_back(lerp(v[a], {{&v[b], i}, {&v[c], j}}));
  if (d == 3)
  {
    for (int k = 1; k < degree; ++k)
      for (int j = 1; j + k < degree; ++j)
        for (int i = 1; i + j + k < degree; ++i)
          points.push_back(lerp(v[0], {{&v[1], i}, {&v[2], j}, {&v[3], k}}));
  }
  return points;
}

/// Values and reference derivatives of a nodal basis at a point set.
/// Scalar tables are indexed [point][scalar basis fn]; `table()` expands a
/// vector element into component blocks.
class TabulatedBasis
{
public:
  TabulatedBasis() = default;

  TabulatedBasis(FiniteElement element, std::vector<Point> points, int max_order,
                 std::map<DerivCounts, Table2D> scalar)
      : _element(element), _points(std::move(points)), _max_order(max_order),
        _scalar(std::move(scalar))
  {
  }

  const FiniteElement& element() const { return _element; }
  const std::vector<Point>& points() const { return _points; }
  std::size_t num_points() const { return _points.size(); }
  std::size_t num_dofs() const { return _element.num_dofs(); }
  int max_order() const { return _max_order; }

  double value(std::size_t pt, std::size_t fn) const { return scalar({0, 0, 0})(pt, fn); }

  double deriv(std::size_t pt, std::size_t fn, std::size_t dir) const
  {
    DerivCounts d{0, 0, 0};
    d[dir] = 1;
    return scalar(d)(pt, fn);
  }

  const Table2D& scalar(const DerivCounts& d) const
  {
    auto it = _scalar.find(d);
    if (it == _scalar.end())
      throw Error(ErrorKind::unsupported_operator, "derivative order not tabulated");
    return it->second;
  }

  /// [point][dof] table of component `component` of the basis, for vector
  /// elements the other components' blocks are zero.
  Table2D table(std::size_t component, const DerivCounts& d) const
  {
    const Table2D& s = scalar(d);
    const std::size_t ns = _element.scalar_dofs();
    Table2D out(num_points(), num_dofs());
    for (std::size_t p = 0; p < num_points(); ++p)
      for (std::size_t k = 0; k < ns; ++k)
        out(p, component * ns + k) = s(p, k);
    return out;
  }

private:
  FiniteElement _element;
  std::vector<Point> _points;
  int _max_order = 0;
  std::map<DerivCounts, Table2D> _scalar;
};

namespace detail
{

inline std::vector<DerivCounts> monomial_exponents(std::size_t dim, int degree)
{
  std::vector<DerivCounts> out;
  for (int total = 0; total <= degree; ++total)
  {
    if (dim == 2)
    {
      for (int j = 0; j <= total; ++j)
        out.push_back({total - j, j, 0});
    }
    else
    {
      for (int k = 0; k <= total; ++k)
        for (int j = 0; j + k <= total; ++j)
          out.push_back({total - j - k, j, k});
    }
  }
  return out;
}

inline std::vector<DerivCounts> derivatives_up_to(std::size_t dim, int max_order)
{
  return monomial_exponents(dim, max_order);
}

// d^deriv/dX of X^exp evaluated at x.
inline long double monomial_derivative(const DerivCounts& exp, const DerivCounts& deriv,
                                       const Point& x)
{
  long double value = 1.0L;
  for (std::size_t i = 0; i < 3; ++i)
  {
    if (deriv[i] > exp[i])
      return 0.0L;
    for (int k = 0; k < deriv[i]; ++k)
      value *= static_cast<long double>(exp[i] - k);
    const int p = exp[i] - deriv[i];
    for (int k = 0; k < p; ++k)
      value *= static_cast<long double>(x[i]);
  }
  return value;
}

// Gauss-Jordan inverse with partial pivoting in long double.
inline std::vector<long double> invert(std::vector<long double> a, std::size_t n)
{
  std::vector<long double> inv(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i)
    inv[i * n + i] = 1.0L;
  long double scale = 0.0L;
  for (auto x : a)
    scale = std::max(scale, std::fabs(x));
  for (std::size_t col = 0; col < n; ++col)
  {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::fabs(a[r * n + col]) > std::fabs(a[pivot * n + col]))
        pivot = r;
    if (std::fabs(a[pivot * n + col]) <= 1e-14L * scale)
      throw Error(ErrorKind::singular_vandermonde,
                  "Vandermonde matrix is singular (node ordering bug)");
    if (pivot != col)
    {
      for (std::size_t c = 0; c < n; ++c)
      {
        std::swap(a[pivot * n + c], a[col * n + c]);
        std::swap(inv[pivot * n + c], inv[col * n + c]);
      }
    }
    const long double p = a[col * n + col];
    for (std::size_t c = 0; c < n; ++c)
    {
      a[col * n + c] /= p;
      inv[col * n + c] /= p;
    }
    for (std::size_t r = 0; r < n; ++r)
    {
      if (r == col)
        continue;
      const long double f = a[r * n + col];
      if (f == 0.0L)
        continue;
      for (std::size_t c = 0; c < n; ++c)
      {
        a[r * n + c] -= f * a[col * n + c];
        inv[r * n + c] -= f * inv[col * n + c];
      }
    }
  }
  return inv;
}

} // namespace detail

/// Nodal basis coefficients: column k holds the monomial coefficients of
/// the basis function dual to lattice node k.
struct NodalBasis
{
  FiniteElement element;
  std::vector<DerivCounts> exponents;
  std::vector<long double> coefficients; // [monomial][basis fn]
};

inline NodalBasis nodal_basis(const FiniteElement& element)
{
  const ReferenceCell cell{element.cell};
  const auto nodes = lattice_points(cell, element.degree);
  const auto exps = detail::monomial_exponents(cell.dim(), element.degree);
  const std::size_t n = exps.size();
  if (nodes.size() != n)
    throw Error(ErrorKind::singular_vandermonde, "lattice size does not match P_k dimension");
  std::vector<long double> vandermonde(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      vandermonde[i * n + j] = detail::monomial_derivative(exps[j], {0, 0, 0}, nodes[i]);
  return {element, exps, detail::invert(std::move(vandermonde), n)};
}

/// Tabulate values and reference derivatives up to `max_order` (1 or 2).
inline TabulatedBasis tabulate(const FiniteElement& element, std::span<const Point> points,
                               int max_order = 1)
{
  const NodalBasis basis = nodal_basis(element);
  const std::size_t n = basis.exponents.size();
  std::map<DerivCounts, Table2D> scalar;
  for (const auto& deriv : detail::derivatives_up_to(element.dim(), max_order))
  {
    Table2D t(points.size(), n);
    for (std::size_t p = 0; p < points.size(); ++p)
    {
      std::vector<long double> mono(n);
      for (std::size_t j = 0; j < n; ++j)
        mono[j] = detail::monomial_derivative(basis.exponents[j], deriv, points[p]);
      for (std::size_t k = 0; k < n; ++k)
      {
        long double sum = 0.0L;
        for (std::size_t j = 0; j < n; ++j)
          sum += basis.coefficients[j * n + k] * mono[j];
        t(p, k) = static_cast<double>(sum);
      }
    }
    scalar.emplace(deriv, std::move(t));
  }
  return TabulatedBasis(element, std::vector<Point>(points.begin(), points.end()), max_order,
                        std::move(scalar));
}

} // namespace formc
