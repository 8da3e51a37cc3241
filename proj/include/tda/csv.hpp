#pragma once

#include <string>

namespace tda {

// 9 significant digits, '.' decimal separator, no locale surprises.
std::string fmt_g9(double v);

}  // namespace tda
