#pragma once

namespace tda::cli {

// Full command-line entry point; returns the process exit code.
// 0 success, 1 domain error, 2 usage error.
int run(int argc, const char* const* argv);

}  // namespace tda::cli
