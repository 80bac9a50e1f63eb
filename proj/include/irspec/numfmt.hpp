#pragma once

#include <cstdio>
#include <string>

namespace irspec {

// 17 significant digits: round-trips every double and keeps reports diffable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace irspec
