#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace formc
{

enum class ErrorKind
{
  illegal_character,
  syntax_error,
  duplicate_name,
  unknown_name,
  invalid_element,
  rank_mismatch,
  two_test_functions,
  non_scalar_integrand,
  division_by_non_scalar,
  not_multilinear,
  unsupported_operator,
  unsupported_division,
  singular_vandermonde,
  non_convergence,
  degenerate_cell,
  negative_orientation,
  division_by_zero,
  unsupported_cell,
  resource_limit,
  form_rejected,
  io_error
};

constexpr std::string_view to_string(ErrorKind kind)
{
  switch (kind)
  {
  case ErrorKind::illegal_character: return "IllegalCharacter";
  case ErrorKind::syntax_error: return "SyntaxError";
  case ErrorKind::duplicate_name: return "DuplicateName";
  case ErrorKind::unknown_name: return "UnknownName";
  case ErrorKind::invalid_element: return "InvalidElement";
  case ErrorKind::rank_mismatch: return "RankMismatch";
  case ErrorKind::two_test_functions: return "TwoTestFunctions";
  case ErrorKind::non_scalar_integrand: return "NonScalarIntegrand";
  case ErrorKind::division_by_non_scalar: return "DivisionByNonScalar";
  case ErrorKind::not_multilinear: return "NotMultilinear";
  case ErrorKind::unsupported_operator: return "UnsupportedOperator";
  case ErrorKind::unsupported_division: return "UnsupportedDivision";
  case ErrorKind::singular_vandermonde: return "SingularVandermonde";
  case ErrorKind::non_convergence: return "NonConvergence";
  case ErrorKind::degenerate_cell: return "DegenerateCell";
  case ErrorKind::negative_orientation: return "NegativeOrientation";
  case ErrorKind::division_by_zero: return "DivisionByZero";
  case ErrorKind::unsupported_cell: return "UnsupportedCell";
  case ErrorKind::resource_limit: return "ResourceLimit";
  case ErrorKind::form_rejected: return "FormRejected";
  case ErrorKind::io_error: return "IOError";
  }
  return "Unknown";
}

/// Position in a form source; line and column are 1-based, 0 means unknown.
struct SourceLocation
{
  std::size_t line = 0;
  std::size_t column = 0;
};

/// Single exception type for the compiler. The kind is the stable,
/// testable part; the message is for humans.
class Error : public std::runtime_error
{
public:
  Error(ErrorKind kind, const std::string& message, SourceLocation loc = {})
      : std::runtime_error(format(kind, message, loc)), _kind(kind), _loc(loc),
        _message(message)
  {
  }

  ErrorKind kind() const noexcept { return _kind; }
  const std::string& message() const noexcept { return _message; }
  SourceLocation location() const noexcept { return _loc; }

private:
  static std::string format(ErrorKind kind, const std::string& message,
                            SourceLocation loc)
  {
    std::string out(to_string(kind));
    if (loc.line > 0)
    {
      out += " at " + std::to_string(loc.line) + ":"
             + std::to_string(loc.column);
    }
    out += ": " + message;
    return out;
  }

  ErrorKind _kind;
  SourceLocation _loc;
  std::string _message;
};

} // namespace formc
