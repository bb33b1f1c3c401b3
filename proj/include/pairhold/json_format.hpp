#pragma once

#include <string>
#include <string_view>

#include "pairhold/geometry.hpp"

namespace pairhold::json {

/// Fixed 6-decimal rendering used by every file this project writes.
/// Values that round to zero are written as "0.000000" (never "-0.000000").
std::string fixed6(double value);

/// JSON string literal with escaping.
std::string quote(std::string_view text);

/// "[x1,y1,x2,y2]" with fixed6 coordinates.
std::string box(const Box& b);

}  // namespace pairhold::json
