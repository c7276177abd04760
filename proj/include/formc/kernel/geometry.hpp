#pragma once

#include "formc/elements.hpp"
#include "formc/error.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace formc::kernel
{

using Matrix3 = std::array<std::array<double, 3>, 3>;

/// Affine map x = v0 + J X of the reference simplex onto a cell.
struct CellGeometry
{
  std::size_t dim = 2;
  std::vector<Point> vertices;
  Matrix3 J{};
  Matrix3 Jinv{};
  double det = 1.0;

  Point map(const Point& X) const
  {
    Point x = vertices[0];
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        x[i] += J[i][j] * X[j];
    return x;
  }

  Point pullback(const Point& x) const
  {
    Point X{0, 0, 0};
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        X[i] += Jinv[i][j] * (x[j] - vertices[0][j]);
    return X;
  }
};

/// J columns are the edge vectors from vertex 0; det must be positive.
inline CellGeometry affine_map(const std::vector<Point>& vertices)
{
  CellGeometry g;
  if (vertices.size() != 3 && vertices.size() != 4)
    throw Error(ErrorKind::degenerate_cell, "a simplex needs 3 or 4 vertices");
  g.dim = vertices.size() - 1;
  g.vertices = vertices;
  for (std::size_t i = 0; i < g.dim; ++i)
    for (std::size_t j = 0; j < g.dim; ++j)
      g.J[i][j] = vertices[j + 1][i] - vertices[0][i];

  const Matrix3& J = g.J;
  if (g.dim == 2)
  {
    g.det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
  }
  else
  {
    g.det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1])
            - J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0])
            + J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
  }
  if (std::fabs(g.det) < 1e-14)
    throw Error(ErrorKind::degenerate_cell, "cell has (near) zero volume");
  if (g.det < 0)
    throw Error(ErrorKind::negative_orientation, "cell vertices are negatively oriented");

  const double r = 1.0 / g.det;
  if (g.dim == 2)
  {
    g.Jinv[0][0] = J[1][1] * r;
    g.Jinv[0][1] = -J[0][1] * r;
    g.Jinv[1][0] = -J[1][0] * r;
    g.Jinv[1][1] = J[0][0] * r;
  }
  else
  {
    g.Jinv[0][0] = (J[1][1] * J[2][2] - J[1][2] * J[2][1]) * r;
    g.Jinv[0][1] = (J[0][2] * J[2][1] - J[0][1] * J[2][2]) * r;
    g.Jinv[0][2] = (J[0][1] * J[1][2] - J[0][2] * J[1][1]) * r;
    g.Jinv[1][0] = (J[1][2] * J[2][0] - J[1][0] * J[2][2]) * r;
    g.Jinv[1][1] = (J[0][0] * J[2][2] - J[0][2] * J[2][0]) * r;
    g.Jinv[1][2] = (J[0][2] * J[1][0] - J[0][0] * J[1][2]) * r;
    g.Jinv[2][0] = (J[1][0] * J[2][1] - J[1][1] * J[2][0]) * r;
    g.Jinv[2][1] = (J[0][1] * J[2][0] - J[0][0] * J[2][1]) * r;
    g.Jinv[2][2] = (J[0][0] * J[1][1] - J[0][1] * J[1][0]) * r;
  }
  return g;
}

} // namespace formc::kernel
