#pragma once

#include <string>

namespace netkoop {

/// Shortest text that reads back to the same double.
std::string format_short(double v);

/// 17 significant digits, the CSV convention.
std::string format_full(double v);

}  // namespace netkoop
