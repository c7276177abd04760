#pragma once

#include "formc/error.hpp"

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace formc
{

enum class CellType
{
  triangle,
  tetrahedron
};

enum class Family
{
  lagrange,
  discontinuous_lagrange
};

constexpr std::size_t cell_dimension(CellType cell)
{
  return cell == CellType::triangle ? 2 : 3;
}

constexpr std::string_view to_string(CellType cell)
{
  return cell == CellType::triangle ? "triangle" : "tetrahedron";
}

constexpr std::string_view to_string(Family family)
{
  return family == Family::lagrange ? "Lagrange" : "Discontinuous Lagrange";
}

inline CellType parse_cell(std::string_view name)
{
  if (name == "triangle")
    return CellType::triangle;
  if (name == "tetrahedron")
    return CellType::tetrahedron;
  throw Error(ErrorKind::invalid_element,
              "unknown cell '" + std::string(name) + "'");
}

inline Family parse_family(std::string_view name)
{
  if (name == "Lagrange" || name == "CG")
    return Family::lagrange;
  if (name == "Discontinuous Lagrange" || name == "DG")
    return Family::discontinuous_lagrange;
  throw Error(ErrorKind::invalid_element,
              "unsupported element family '" + std::string(name) + "'");
}

/// Unit simplex: origin plus the unit vectors.
struct ReferenceCell
{
  CellType type = CellType::triangle;

  std::size_t dim() const { return cell_dimension(type); }

  std::size_t num_vertices() const { return dim() + 1; }

  double volume() const { return type == CellType::triangle ? 0.5 : 1.0 / 6.0; }

  std::vector<std::array<double, 3>> vertices() const
  {
    std::vector<std::array<double, 3>> v(num_vertices(), {0.0, 0.0, 0.0});
    for (std::size_t i = 0; i < dim(); ++i)
      v[i + 1][i] = 1.0;
    return v;
  }
};

/// Lagrange-type element on a simplex, scalar or d-vector valued.
struct FiniteElement
{
  Family family = Family::lagrange;
  CellType cell = CellType::triangle;
  int degree = 1;
  bool vector = false;

  FiniteElement() = default;

  FiniteElement(Family family_, CellType cell_, int degree_, bool vector_ = false)
      : family(family_), cell(cell_), degree(degree_), vector(vector_)
  {
    if (degree < 0)
      throw Error(ErrorKind::invalid_element, "negative element degree");
    if (family == Family::lagrange && degree < 1)
    {
      throw Error(ErrorKind::invalid_element,
                  "continuous Lagrange requires degree >= 1");
    }
    if (degree > 8)
      throw Error(ErrorKind::invalid_element, "element degree above 8");
  }

  std::size_t dim() const { return cell_dimension(cell); }

  std::size_t value_size() const { return vector ? dim() : 1; }

  /// Dimension of the scalar space P_degree on the cell.
  std::size_t scalar_dofs() const
  {
    const std::size_t q = static_cast<std::size_t>(degree);
    return dim() == 2 ? (q + 1) * (q + 2) / 2 : (q + 1) * (q + 2) * (q + 3) / 6;
  }

  std::size_t num_dofs() const { return scalar_dofs() * value_size(); }

  std::string to_string() const
  {
    std::string out = vector ? "VectorElement(" : "FiniteElement(";
    out += "\"" + std::string(formc::to_string(family)) + "\", \""
           + std::string(formc::to_string(cell)) + "\", "
           + std::to_string(degree) + ")";
    return out;
  }

  friend bool operator==(const FiniteElement&, const FiniteElement&) = default;
  friend auto operator<=>(const FiniteElement&, const FiniteElement&) = default;
};

} // namespace formc
