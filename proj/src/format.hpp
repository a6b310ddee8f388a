#pragma once

#include <sstream>
#include <string>

namespace oritrans {

// Shortest general-format rendering, so that 1e-10 does not print as 0.000000.
inline std::string format_number(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace oritrans
