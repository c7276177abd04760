#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace formc
{

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double value)
{
  if (value == 0.0)
    return "0";
  char buffer[64];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc())
    return "nan";
  return std::string(buffer, ptr);
}

} // namespace formc
