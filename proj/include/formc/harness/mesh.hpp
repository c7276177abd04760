#pragma once

#include "formc/elements.hpp"
#include "formc/finite_element.hpp"
#include "formc/kernel/geometry.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace formc::harness
{

/// Simplicial mesh: vertex coordinates and positively oriented cells.
struct Mesh
{
  CellType cell = CellType::triangle;
  std::vector<Point> vertices;
  std::vector<std::vector<std::size_t>> cells;

  std::size_t num_cells() const { return cells.size(); }

  std::vector<Point> cell_vertices(std::size_t c) const
  {
    std::vector<Point> out;
    for (auto v : cells[c])
      out.push_back(vertices[v]);
    return out;
  }
};

/// (n+1)^2 vertices, 2n^2 triangles; each square is split along the
/// diagonal from (i, j) to (i+1, j+1).
inline Mesh unit_square_mesh(std::size_t n)
{
  Mesh m;
  const double h = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i)
      m.vertices.push_back({static_cast<double>(i) * h, static_cast<double>(j) * h, 0.0});
  auto id = [n](std::size_t i, std::size_t j) { return j * (n + 1) + i; };
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i)
    {
      m.cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.cells.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  return m;
}

/// Seeded random affine images of the reference simplex with det in [0.1, 10].
inline std::vector<std::vector<Point>> random_cells(CellType cell, std::size_t count,
                                                    std::uint64_t seed)
{
  const ReferenceCell ref{cell};
  const std::size_t d = ref.dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.4, 0.4);
  std::uniform_real_distribution<double> scale(0.5, 2.0);
  std::uniform_real_distribution<double> shift(-1.0, 1.0);

  std::vector<std::vector<Point>> out;
  while (out.size() < count)
  {
    const double s = scale(rng);
    Point origin{0, 0, 0};
    for (std::size_t i = 0; i < d; ++i)
      origin[i] = shift(rng);
    std::vector<Point> v;
    for (const auto& x : ref.vertices())
    {
      Point p{0, 0, 0};
      for (std::size_t i = 0; i < d; ++i)
        p[i] = origin[i] + s * (x[i] + jitter(rng));
      v.push_back(p);
    }
    try
    {
      const auto g = kernel::affine_map(v);
      if (g.det >= 0.1 && g.det <= 10.0)
        out.push_back(std::move(v));
    }
    catch (const Error&)
    {
    }
  }
  return out;
}

} // namespace formc::harness
