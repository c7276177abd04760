#pragma once

#include "formc/error.hpp"
#include "formc/finite_element.hpp"
#include "formc/harness/mesh.hpp"
#include "formc/kernel/interpret.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace formc::harness
{

/// Per-cell global dof indices of a Lagrange space on a triangle mesh.
struct DofMap
{
  FiniteElement element;
  std::size_t global_dimension = 0;
  std::vector<std::vector<std::size_t>> cell_dofs;
};

inline DofMap build_dofmap(const Mesh& mesh, const FiniteElement& element)
{
  if (mesh.cell != CellType::triangle || element.cell != CellType::triangle)
    throw Error(ErrorKind::unsupported_cell, "assembly supports triangle meshes only");
  if (element.degree > 4)
    throw Error(ErrorKind::invalid_element, "dof maps support degree <= 4");

  DofMap map;
  map.element = element;
  const std::size_t ns = element.scalar_dofs();
  const std::size_t nc = element.value_size();
  std::vector<std::vector<std::size_t>> scalar(mesh.num_cells());
  std::size_t scalar_dim = 0;

  if (element.family == Family::discontinuous_lagrange)
  {
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
      for (std::size_t k = 0; k < ns; ++k)
        scalar[c].push_back(scalar_dim++);
  }
  else
  {
    const int q = element.degree;
    const std::size_t per_edge = static_cast<std::size_t>(q - 1);
    const std::size_t nv = mesh.vertices.size();
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> edges;
    for (const auto& cell : mesh.cells)
      for (auto [a, b] : formc::detail::simplex_edges(2))
      {
        auto key = std::minmax(cell[static_cast<std::size_t>(a)], cell[static_cast<std::size_t>(b)]);
        edges.try_emplace({key.first, key.second}, edges.size());
      }
    const std::size_t interior = ns - 3 - 3 * per_edge;
    std::size_t next_interior = nv + edges.size() * per_edge;
    for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    {
      const auto& cell = mesh.cells[c];
      for (auto v : cell)
        scalar[c].push_back(v);
      for (auto [a, b] : formc::detail::simplex_edges(2))
      {
        const std::size_t ga = cell[static_cast<std::size_t>(a)];
        const std::size_t gb = cell[static_cast<std::size_t>(b)];
        const std::size_t e = edges.at({std::min(ga, gb), std::max(ga, gb)});
        for (std::size_t k = 0; k < per_edge; ++k)
        {
          const std::size_t pos = ga < gb ? k : per_edge - 1 - k;
          scalar[c].push_back(nv + e * per_edge + pos);
        }
      }
      for (std::size_t k = 0; k < interior; ++k)
        scalar[c].push_back(next_interior++);
    }
    scalar_dim = next_interior;
  }

  map.global_dimension = scalar_dim * nc;
  map.cell_dofs.resize(mesh.num_cells());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
    for (std::size_t comp = 0; comp < nc; ++comp)
      for (auto s : scalar[c])
        map.cell_dofs[c].push_back(comp * scalar_dim + s);
  return map;
}

/// Compressed sparse row matrix; structure is fixed before insertion.
struct SparseMatrix
{
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;
  std::vector<std::size_t> columns;
  std::vector<double> values;

  std::size_t nnz() const { return columns.size(); }

  std::size_t position(std::size_t r, std::size_t c) const
  {
    const auto begin = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
    const auto end = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
    const auto it = std::lower_bound(begin, end, c);
    if (it == end || *it != c)
      throw Error(ErrorKind::io_error, "entry outside the sparsity pattern");
    return static_cast<std::size_t>(it - columns.begin());
  }

  void add(std::size_t r, std::size_t c, double v) { values[position(r, c)] += v; }

  double at(std::size_t r, std::size_t c) const
  {
    const auto begin = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r]);
    const auto end = columns.begin() + static_cast<std::ptrdiff_t>(row_offsets[r + 1]);
    const auto it = std::lower_bound(begin, end, c);
    return it == end || *it != c ? 0.0 : values[static_cast<std::size_t>(it - columns.begin())];
  }

  double sum() const
  {
    double s = 0.0;
    for (double v : values)
      s += v;
    return s;
  }

  double row_sum(std::size_t r) const
  {
    double s = 0.0;
    for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
      s += values[k];
    return s;
  }
};

/// Sparsity pattern from cell dof adjacency, values zero.
inline SparseMatrix sparsity_pattern(const DofMap& test, const DofMap& trial)
{
  std::vector<std::vector<std::size_t>> rows(test.global_dimension);
  for (std::size_t c = 0; c < test.cell_dofs.size(); ++c)
    for (auto r : test.cell_dofs[c])
      rows[r].insert(rows[r].end(), trial.cell_dofs[c].begin(), trial.cell_dofs[c].end());
  SparseMatrix m;
  m.rows = test.global_dimension;
  m.cols = trial.global_dimension;
  m.row_offsets.push_back(0);
  for (auto& r : rows)
  {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    m.columns.insert(m.columns.end(), r.begin(), r.end());
    m.row_offsets.push_back(m.columns.size());
  }
  m.values.assign(m.columns.size(), 0.0);
  return m;
}

struct AssemblyTimings
{
  double structure = 0.0;
  double compute = 0.0;
  double insertion = 0.0;
};

/// Global coefficient vectors, one per coefficient, indexed by its dof map.
struct GlobalCoefficient
{
  const DofMap* dofmap = nullptr;
  std::vector<double> values;
};

/// Serial two-phase assembly of a bilinear form kernel.
inline SparseMatrix assemble(const kernel::KernelIR& k, const Mesh& mesh, const DofMap& test,
                             const DofMap& trial,
                             const std::vector<GlobalCoefficient>& coefficients = {},
                             AssemblyTimings* timings = nullptr)
{
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  SparseMatrix m = sparsity_pattern(test, trial);
  auto t1 = clock::now();

  double compute = 0.0;
  double insertion = 0.0;
  std::vector<double> A(k.tensor_size(), 0.0);
  kernel::Coefficients w(coefficients.size());
  for (std::size_t c = 0; c < mesh.num_cells(); ++c)
  {
    auto a = clock::now();
    for (std::size_t f = 0; f < coefficients.size(); ++f)
    {
      const auto& dofs = coefficients[f].dofmap->cell_dofs[c];
      w[f].resize(dofs.size());
      for (std::size_t i = 0; i < dofs.size(); ++i)
        w[f][i] = coefficients[f].values[dofs[i]];
    }
    try
    {
      kernel::interpret(k, kernel::affine_map(mesh.cell_vertices(c)), w, A);
    }
    catch (const Error& e)
    {
      throw Error(e.kind(), "cell " + std::to_string(c) + ": " + e.message());
    }
    auto b = clock::now();
    const auto& rows = test.cell_dofs[c];
    const auto& cols = trial.cell_dofs[c];
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j)
        m.add(rows[i], cols[j], A[i * cols.size() + j]);
    auto e = clock::now();
    compute += std::chrono::duration<double>(b - a).count();
    insertion += std::chrono::duration<double>(e - b).count();
  }
  if (timings)
    *timings = {std::chrono::duration<double>(t1 - t0).count(), compute, insertion};
  return m;
}

} // namespace formc::harness
