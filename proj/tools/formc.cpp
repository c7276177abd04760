#include "formc/dsl/printer.hpp"
#include "formc/dsl/typecheck.hpp"
#include "formc/harness/assembly.hpp"
#include "formc/harness/compare.hpp"
#include "formc/harness/trends.hpp"
#include "formc/kernel/emit.hpp"
#include "formc/lowering.hpp"
#include "formc/quadrature_rep.hpp"
#include "formc/tensor_rep.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using namespace formc;

namespace
{

constexpr int exit_rejected = 2;
constexpr int exit_mismatch = 3;

std::string read_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw Error(ErrorKind::io_error, "cannot read " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

int exit_code(const Error& e)
{
  switch (e.kind())
  {
  case ErrorKind::io_error: return 1;
  default: return exit_rejected;
  }
}

struct CompileArgs
{
  std::string file;
  std::string representation = "quadrature";
  int points = 0;
  bool dump_ir = false;
  bool dump_monomials = false;
  std::string emit_dir;
  bool no_zero_elimination = false;
  bool no_hoist = false;
};

int run_compile(const CompileArgs& a)
{
  const auto sum = lower(dsl::compile_form(read_file(a.file)));
  if (a.dump_monomials)
    std::cout << dump_monomials(sum);

  kernel::KernelIR k;
  if (a.representation == "tensor")
  {
    try
    {
      k = build_tensor_kernel(sum);
    }
    catch (const Error& e)
    {
      std::cerr << stem(a.file) << " tensor: " << harness::failure_marker << ": " << e.what() << "\n";
      return exit_rejected;
    }
  }
  else
  {
    QuadratureOptions o;
    o.eliminate_zeros = !a.no_zero_elimination;
    o.hoist = !a.no_hoist;
    if (a.points > 0)
      o.points = a.points;
    k = build_quadrature_kernel(sum, o);
  }

  const std::string name = stem(a.file) + "_" + a.representation;
  if (a.dump_ir)
    std::cout << kernel::dump_ir(k);
  const std::string source = kernel::emit_source(k, name);
  if (!a.emit_dir.empty())
  {
    fs::create_directories(a.emit_dir);
    const fs::path out = fs::path(a.emit_dir) / (name + ".kernel.c");
    std::ofstream(out) << source;
    std::cout << "wrote " << out.string() << " (" << source.size() << " bytes)\n";
  }
  if (!a.dump_ir && !a.dump_monomials && a.emit_dir.empty())
    std::cout << source;
  std::cerr << name << ": " << kernel::count_flops(k) << " flops\n";
  return 0;
}

int report(const harness::ComparisonReport& r)
{
  std::cout << harness::render(r);
  std::cout << harness::csv_header() << "\n" << harness::csv_row(r) << "\n";
  return r.passed ? 0 : exit_mismatch;
}

int run_check(const std::string& file, std::size_t cells, std::uint64_t seed)
{
  harness::CompareOptions o;
  o.cells = cells;
  o.seed = seed;
  o.run_benchmark = false;
  return report(harness::compare(stem(file), read_file(file), o));
}

int run_bench(const std::string& file, std::size_t n, std::size_t cells)
{
  harness::CompareOptions o;
  o.cells = cells;
  o.repetitions = n;
  return report(harness::compare(stem(file), read_file(file), o));
}

int run_assemble(const std::string& file, std::size_t n, std::uint64_t seed)
{
  const auto form = dsl::compile_form(read_file(file));
  if (form.arity != 2)
    throw Error(ErrorKind::form_rejected, "assembly needs a bilinear form");
  const auto sum = lower(form);
  const auto mesh = harness::unit_square_mesh(n);
  const auto test = harness::build_dofmap(mesh, form.test.element);
  const auto trial = harness::build_dofmap(mesh, form.trial->element);

  std::vector<harness::DofMap> coefficient_maps;
  for (const auto& c : form.coefficients)
    coefficient_maps.push_back(harness::build_dofmap(mesh, c.element));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<harness::GlobalCoefficient> coefficients;
  for (const auto& m : coefficient_maps)
  {
    harness::GlobalCoefficient g{&m, std::vector<double>(m.global_dimension)};
    for (auto& v : g.values)
      v = dist(rng);
    coefficients.push_back(std::move(g));
  }

  std::cout << "mesh: " << mesh.num_cells() << " cells, " << test.global_dimension
            << " test dofs, " << trial.global_dimension << " trial dofs (serial insertion)\n";

  std::optional<harness::SparseMatrix> reference;
  double worst = 0.0;
  for (const std::string rep : {"quadrature", "tensor"})
  {
    kernel::KernelIR k;
    try
    {
      k = rep == "tensor" ? build_tensor_kernel(sum) : build_quadrature_kernel(sum);
    }
    catch (const Error& e)
    {
      std::cout << rep << ": " << harness::failure_marker << " (" << e.what() << ")\n";
      continue;
    }
    harness::AssemblyTimings t;
    auto m = harness::assemble(k, mesh, test, trial, coefficients, &t);
    double row = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r)
      row = std::max(row, std::fabs(m.row_sum(r)));
    std::cout << rep << ": nnz " << m.nnz() << ", sum " << format_double(m.sum())
              << ", max |row sum| " << format_double(row) << ", structure "
              << format_double(t.structure) << " s, compute " << format_double(t.compute)
              << " s, insertion " << format_double(t.insertion) << " s\n";
    if (reference)
      worst = harness::relative_difference(m.values, reference->values);
    else
      reference = std::move(m);
  }
  std::cout << "max relative difference: " << format_double(worst) << "\n";
  return worst <= 1e-10 ? 0 : exit_mismatch;
}

int run_trends(bool quick, const std::string& csv)
{
  auto entries = harness::trend_suite(quick, [](const harness::TrendEntry& e)
                                      { std::cerr << "  " << e.name() << "\n"; });
  std::cout << harness::render_trends(entries);
  std::cout << "flops only; q/t = quadrature flops / tensor flops\n";
  if (!csv.empty())
  {
    std::ofstream out(csv);
    out << harness::csv_header() << "\n";
    for (const auto& e : entries)
      out << harness::csv_row(e.report) << "\n";
  }
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"formc: variational form compiler"};
  app.require_subcommand(1);

  CompileArgs compile;
  auto* c = app.add_subcommand("compile", "Generate an element kernel");
  c->add_option("file", compile.file, "Form file")->required();
  c->add_option("-r,--representation", compile.representation, "quadrature or tensor")
      ->check(CLI::IsMember({"quadrature", "tensor"}));
  c->add_option("--points", compile.points, "Points per direction override");
  c->add_flag("--dump-ir", compile.dump_ir, "Print the kernel IR as JSON");
  c->add_flag("--dump-monomials", compile.dump_monomials, "Print the canonical monomial sum");
  c->add_option("--emit", compile.emit_dir, "Write the kernel source into this directory");
  c->add_flag("--no-zero-elimination", compile.no_zero_elimination, "Keep zero columns");
  c->add_flag("--no-hoist", compile.no_hoist, "Disable loop invariant code motion");

  std::string file;
  std::size_t cells = 100;
  std::uint64_t seed = 0;
  auto* check = app.add_subcommand("check", "Cross-check both representations");
  check->add_option("file", file, "Form file")->required();
  check->add_option("--cells", cells, "Random cells");
  check->add_option("--seed", seed, "Seed");

  std::size_t repetitions = 10'000;
  std::size_t bench_cells = 10;
  auto* bench = app.add_subcommand("bench", "Benchmark N element tensor evaluations");
  bench->add_option("file", file, "Form file")->required();
  bench->add_option("-N", repetitions, "Evaluations per representation");
  bench->add_option("--cells", bench_cells, "Random cells for the cross-check");

  std::size_t mesh_n = 4;
  auto* assemble = app.add_subcommand("assemble", "Assemble on the unit square mesh");
  assemble->add_option("file", file, "Form file")->required();
  assemble->add_option("--mesh-n", mesh_n, "Cells per side");
  assemble->add_option("--seed", seed, "Seed for coefficient values");

  bool quick = false;
  std::string csv;
  auto* trends = app.add_subcommand("trends", "Flop tables over premultiplied form families");
  trends->add_flag("--quick", quick, "2D mass and p=1 elasticity only");
  trends->add_option("--csv", csv, "Also write CSV rows here");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*c)
      return run_compile(compile);
    if (*check)
      return run_check(file, cells, seed);
    if (*bench)
      return run_bench(file, repetitions, bench_cells);
    if (*assemble)
      return run_assemble(file, mesh_n, seed);
    if (*trends)
      return run_trends(quick, csv);
  }
  catch (const Error& e)
  {
    std::cerr << e.what() << "\n";
    return exit_code(e);
  }
  return 0;
}
