#pragma once

#include <chrono>

namespace tda {

// Monotonic seconds since process start. All staleness and sample-age
// arithmetic uses this clock; wall time appears only in log lines.
inline double mono_now() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point start = clock::now();
  return std::chrono::duration<double>(clock::now() - start).count();
}

}  // namespace tda
