#pragma once

#include "formc/dsl/typecheck.hpp"
#include "formc/error.hpp"
#include "formc/format.hpp"
#include "formc/harness/mesh.hpp"
#include "formc/kernel/emit.hpp"
#include "formc/kernel/interpret.hpp"
#include "formc/lowering.hpp"
#include "formc/quadrature_rep.hpp"
#include "formc/tensor_rep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace formc::harness
{

/// Marker used in reports for a representation that could not be generated.
inline constexpr const char* failure_marker = "FFC failure";

struct CompileOptions
{
  QuadratureOptions quadrature;
  TensorOptions tensor;
  bool emit = true; // render source to measure byte size
};

/// One backend's outcome for a form.
struct BackendResult
{
  std::optional<kernel::KernelIR> kernel;
  std::optional<ErrorKind> error;
  std::string message;
  double generation_seconds = 0.0;
  std::size_t bytes = 0;

  bool ok() const { return kernel.has_value(); }
};

struct CompiledForm
{
  std::string name;
  MonomialSum sum;
  BackendResult quadrature;
  BackendResult tensor;
};

namespace detail
{

template <class Build>
BackendResult run_backend(const std::string& name, bool emit, Build build)
{
  BackendResult r;
  const auto t0 = std::chrono::steady_clock::now();
  try
  {
    r.kernel = build();
  }
  catch (const Error& e)
  {
    r.error = e.kind();
    r.message = e.what();
  }
  r.generation_seconds
      = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.kernel && emit)
    r.bytes = kernel::emit_source(*r.kernel, name).size();
  return r;
}

} // namespace detail

/// Lower once and run both backends; FormRejected if neither succeeds.
inline CompiledForm compile_both(const std::string& name, const std::string& source,
                                 const CompileOptions& options = {})
{
  CompiledForm c;
  c.name = name;
  c.sum = lower(dsl::compile_form(source));
  c.quadrature = detail::run_backend(name + "_quadrature", options.emit, [&]
                                     { return build_quadrature_kernel(c.sum, options.quadrature); });
  c.tensor = detail::run_backend(name + "_tensor", options.emit,
                                 [&] { return build_tensor_kernel(c.sum, options.tensor); });
  if (!c.quadrature.ok() && !c.tensor.ok())
  {
    throw Error(ErrorKind::form_rejected,
                name + ": " + c.quadrature.message + "; " + c.tensor.message);
  }
  return c;
}

/// Pseudo-random coefficient dofs in [0.5, 1.5].
inline kernel::Coefficients random_coefficients(const std::vector<std::size_t>& dofs,
                                                std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  kernel::Coefficients w;
  for (auto n : dofs)
  {
    std::vector<double> x(n);
    for (auto& v : x)
      v = dist(rng);
    w.push_back(std::move(x));
  }
  return w;
}

/// max |a - b| / max |b|, with max |b| floored at the smallest normal.
inline double relative_difference(const std::vector<double>& a, const std::vector<double>& b)
{
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    diff = std::max(diff, std::fabs(a[i] - b[i]));
    scale = std::max(scale, std::fabs(b[i]));
  }
  return diff / std::max(scale, 1e-300);
}

/// Worst relative difference between two kernels of the same form over
/// seeded random cells and coefficients.
inline double cross_check(const kernel::KernelIR& a, const kernel::KernelIR& b, CellType cell,
                          std::size_t cells, std::uint64_t seed)
{
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  double worst = 0.0;
  for (const auto& v : random_cells(cell, cells, seed))
  {
    const auto g = kernel::affine_map(v);
    const auto w = random_coefficients(a.coefficient_dofs, rng);
    worst = std::max(worst, relative_difference(kernel::interpret(a, g, w), kernel::interpret(b, g, w)));
  }
  return worst;
}

/// Seconds to evaluate the element tensor n times on one random cell.
inline double benchmark(const kernel::KernelIR& k, CellType cell, std::size_t n, std::uint64_t seed = 0)
{
  std::mt19937_64 rng(seed);
  const auto g = kernel::affine_map(random_cells(cell, 1, seed).front());
  const auto w = random_coefficients(k.coefficient_dofs, rng);
  std::vector<double> A(k.tensor_size());
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < n; ++i)
    kernel::interpret(k, g, w, A);
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CompareOptions
{
  std::size_t cells = 100;
  std::uint64_t seed = 0;
  std::size_t repetitions = 10'000; // N
  bool run_benchmark = true;
  double tolerance = 1e-10;
  // Division forms: quadrature self-consistency between these point counts.
  int self_check_points[2] = {10, 12};
  double self_check_tolerance = 1e-8;
  CompileOptions compile;
};

struct ComparisonReport
{
  std::string form;
  std::optional<std::size_t> flops_quadrature;
  std::optional<std::size_t> flops_tensor;
  std::optional<double> runtime_quadrature;
  std::optional<double> runtime_tensor;
  std::optional<double> max_difference;
  double gen_time_quadrature = 0.0;
  double gen_time_tensor = 0.0;
  std::size_t bytes_quadrature = 0;
  std::size_t bytes_tensor = 0;
  std::string quadrature_failure;
  std::string tensor_failure;
  bool self_consistency = false; // max_difference compares two quadrature degrees
  bool passed = true;

  std::optional<double> ratio() const
  {
    if (flops_quadrature && flops_tensor && *flops_tensor > 0)
      return static_cast<double>(*flops_quadrature) / static_cast<double>(*flops_tensor);
    return std::nullopt;
  }

  std::optional<double> runtime_ratio() const
  {
    if (runtime_quadrature && runtime_tensor && *runtime_tensor > 0)
      return *runtime_quadrature / *runtime_tensor;
    return std::nullopt;
  }
};

/// Report for an already compiled form.
inline ComparisonReport compare(const CompiledForm& c, const CompareOptions& options = {})
{
  ComparisonReport r;
  r.form = c.name;
  r.gen_time_quadrature = c.quadrature.generation_seconds;
  r.gen_time_tensor = c.tensor.generation_seconds;
  r.bytes_quadrature = c.quadrature.bytes;
  r.bytes_tensor = c.tensor.bytes;
  if (c.quadrature.ok())
    r.flops_quadrature = kernel::count_flops(*c.quadrature.kernel);
  else
    r.quadrature_failure = c.quadrature.message;
  if (c.tensor.ok())
    r.flops_tensor = kernel::count_flops(*c.tensor.kernel);
  else
    r.tensor_failure = c.tensor.message;

  if (options.cells > 0)
  {
    if (c.quadrature.ok() && c.tensor.ok())
    {
      r.max_difference = cross_check(*c.quadrature.kernel, *c.tensor.kernel, c.sum.cell,
                                     options.cells, options.seed);
      r.passed = *r.max_difference <= options.tolerance;
    }
    else if (c.quadrature.ok())
    {
      QuadratureOptions lo = options.compile.quadrature;
      QuadratureOptions hi = options.compile.quadrature;
      lo.points = options.self_check_points[0];
      hi.points = options.self_check_points[1];
      r.max_difference = cross_check(build_quadrature_kernel(c.sum, lo),
                                     build_quadrature_kernel(c.sum, hi), c.sum.cell,
                                     options.cells, options.seed);
      r.self_consistency = true;
      r.passed = *r.max_difference <= options.self_check_tolerance;
    }
  }
  if (options.run_benchmark)
  {
    if (c.quadrature.ok())
      r.runtime_quadrature = benchmark(*c.quadrature.kernel, c.sum.cell, options.repetitions, options.seed);
    if (c.tensor.ok())
      r.runtime_tensor = benchmark(*c.tensor.kernel, c.sum.cell, options.repetitions, options.seed);
  }
  return r;
}

inline ComparisonReport compare(const std::string& name, const std::string& source,
                                const CompareOptions& options = {})
{
  return compare(compile_both(name, source, options.compile), options);
}

namespace detail
{

inline std::string field(const std::optional<double>& v)
{
  return v ? format_double(*v) : "NA";
}

inline std::string field(const std::optional<std::size_t>& v)
{
  return v ? std::to_string(*v) : "NA";
}

inline std::string fixed(double v, int digits)
{
  std::ostringstream out;
  out.setf(std::ios::fixed);
  out.precision(digits);
  out << v;
  return out.str();
}

} // namespace detail

inline std::string csv_header()
{
  return "form,flops_q,flops_t,ratio,runtime_q,runtime_t,maxdiff,gen_time_q,gen_time_t,bytes_q,bytes_t";
}

inline std::string csv_row(const ComparisonReport& r)
{
  using detail::field;
  std::ostringstream out;
  out << r.form << ',' << field(r.flops_quadrature) << ',' << field(r.flops_tensor) << ','
      << field(r.ratio()) << ',' << field(r.runtime_quadrature) << ',' << field(r.runtime_tensor)
      << ',' << field(r.max_difference) << ',' << format_double(r.gen_time_quadrature) << ','
      << format_double(r.gen_time_tensor) << ',' << r.bytes_quadrature << ',' << r.bytes_tensor;
  return out.str();
}

/// Human-readable report.
inline std::string render(const ComparisonReport& r)
{
  using detail::fixed;
  std::ostringstream out;
  out << "form: " << r.form << "\n";
  out << "  quadrature: ";
  if (r.flops_quadrature)
    out << *r.flops_quadrature << " flops, " << r.bytes_quadrature << " bytes, generated in "
        << fixed(r.gen_time_quadrature, 4) << " s\n";
  else
    out << failure_marker << " (" << r.quadrature_failure << ")\n";
  out << "  tensor:     ";
  if (r.flops_tensor)
    out << *r.flops_tensor << " flops, " << r.bytes_tensor << " bytes, generated in "
        << fixed(r.gen_time_tensor, 4) << " s\n";
  else
    out << failure_marker << " (" << r.tensor_failure << ")\n";
  if (auto q = r.ratio())
    out << "  flops q/t:  " << fixed(*q, 2) << "\n";
  if (r.runtime_quadrature || r.runtime_tensor)
  {
    out << "  runtime (interpreted):";
    if (r.runtime_quadrature)
      out << " q " << fixed(*r.runtime_quadrature, 4) << " s";
    if (r.runtime_tensor)
      out << " t " << fixed(*r.runtime_tensor, 4) << " s";
    if (auto q = r.runtime_ratio())
      out << " q/t " << fixed(*q, 2);
    out << "\n";
  }
  if (r.max_difference)
  {
    out << (r.self_consistency ? "  quadrature self-consistency: " : "  max relative difference: ")
        << format_double(*r.max_difference) << (r.passed ? " (ok)" : " (FAILED)") << "\n";
  }
  return out.str();
}

} // namespace formc::harness
