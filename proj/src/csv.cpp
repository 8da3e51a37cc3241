#include "tda/csv.hpp"

#include <cstdio>

namespace tda {

std::string fmt_g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace tda
