#pragma once

#include "formc/elements.hpp"
#include "formc/error.hpp"
#include "formc/finite_element.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

namespace formc
{

struct QuadratureRule
{
  CellType cell = CellType::triangle;
  std::vector<Point> points;
  std::vector<double> weights;
  int degree = 0; // requested exactness degree
  int m = 1;      // points per direction

  std::size_t size() const { return points.size(); }
};

namespace detail
{

// Implicit QL on a symmetric tridiagonal matrix (diagonal d, off-diagonal
// e with e[0] unused). On return d holds eigenvalues and z the eigenvectors
// as columns (row-major n x n).
inline void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                           std::vector<double>& z, std::size_t n)
{
  for (std::size_t i = 1; i < n; ++i)
    e[i - 1] = e[i];
  e[n - 1] = 0.0;
  const std::size_t cap = 100 * n;
  std::size_t iterations = 0;
  for (std::size_t l = 0; l < n; ++l)
  {
    std::size_t m;
    do
    {
      for (m = l; m + 1 < n; ++m)
      {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-16 * dd)
          break;
      }
      if (m != l)
      {
        if (++iterations > cap)
          throw Error(ErrorKind::non_convergence, "tridiagonal eigen-solve did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        std::size_t i = m;
        bool underflow = false;
        while (i-- > l)
        {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0)
          {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k)
          {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (underflow)
          continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

} // namespace detail

/// n-point Gauss rule on [0,1] for the weight (1-x)^alpha (Golub-Welsch).
inline std::pair<std::vector<double>, std::vector<double>> gauss_jacobi_1d(int n, int alpha)
{
  if (n < 1)
    throw Error(ErrorKind::non_convergence, "gauss_jacobi_1d needs n >= 1");
  const double a = alpha;
  const std::size_t size = static_cast<std::size_t>(n);

  // Monic Jacobi recurrence on [-1,1] with weight (1-t)^a (1+t)^0.
  std::vector<double> diag(size), off(size, 0.0);
  for (std::size_t k = 0; k < size; ++k)
  {
    const double kk = static_cast<double>(k);
    const double s = 2.0 * kk + a;
    diag[k] = k == 0 ? -a / (a + 2.0) : -(a * a) / (s * (s + 2.0));
    if (k > 0)
    {
      const double b2 = 4.0 * kk * (kk + a) * kk * (kk + a) / (s * s * (s + 1.0) * (s - 1.0));
      off[k] = std::sqrt(b2);
    }
  }
  std::vector<double> z(size * size, 0.0);
  for (std::size_t i = 0; i < size; ++i)
    z[i * size + i] = 1.0;
  detail::tridiagonal_ql(diag, off, z, size);

  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);
  std::vector<std::pair<double, double>> pw(size);
  for (std::size_t i = 0; i < size; ++i)
  {
    const double t = diag[i];
    const double w = mu0 * z[i] * z[i];
    pw[i] = {0.5 * (1.0 + t), w / std::pow(2.0, a + 1.0)};
  }
  std::sort(pw.begin(), pw.end());
  std::vector<double> x(size), w(size);
  for (std::size_t i = 0; i < size; ++i)
    std::tie(x[i], w[i]) = pw[i];
  return {x, w};
}

inline int points_per_direction(int degree) { return degree / 2 + 1; }

/// Collapsed tensor-product rule with m points per direction.
inline QuadratureRule collapsed_rule(CellType cell, int m, int degree)
{
  QuadratureRule rule;
  rule.cell = cell;
  rule.degree = degree;
  rule.m = m;
  const auto [x0, w0] = gauss_jacobi_1d(m, 0);
  const auto [x1, w1] = gauss_jacobi_1d(m, 1);
  if (cell == CellType::triangle)
  {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
      {
        const double xi = x0[i];
        const double eta = x1[j];
        rule.points.push_back({xi * (1.0 - eta), eta, 0.0});
        rule.weights.push_back(w0[i] * w1[j]);
      }
    return rule;
  }
  const auto [x2, w2] = gauss_jacobi_1d(m, 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
      {
        const double xi = x0[i];
        const double eta = x1[j];
        const double zeta = x2[k];
        rule.points.push_back(
            {xi * (1.0 - eta) * (1.0 - zeta), eta * (1.0 - zeta), zeta});
        rule.weights.push_back(w0[i] * w1[j] * w2[k]);
      }
  return rule;
}

/// Rule exact for polynomials of total degree <= degree.
inline QuadratureRule simplex_rule(CellType cell, int degree)
{
  if (degree < 0)
    degree = 0;
  return collapsed_rule(cell, points_per_direction(degree), degree);
}

/// The estimated-degree rule, or an explicit points-per-direction override.
inline QuadratureRule rule_for_form(CellType cell, int estimated_degree,
                                    std::optional<int> override_m = std::nullopt)
{
  if (override_m)
    return collapsed_rule(cell, *override_m, 2 * *override_m - 1);
  return simplex_rule(cell, estimated_degree);
}

} // namespace formc
