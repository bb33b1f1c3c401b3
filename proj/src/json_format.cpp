#include "pairhold/json_format.hpp"

#include <cmath>
#include <cstdio>

#include <json.hpp>

namespace pairhold::json {

std::string fixed6(double value) {
  if (std::fabs(value) < 5e-7) value = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

std::string quote(std::string_view text) {
  return nlohmann::json(std::string(text)).dump();
}

std::string box(const Box& b) {
  return "[" + fixed6(b.x1) + "," + fixed6(b.y1) + "," + fixed6(b.x2) + "," +
         fixed6(b.y2) + "]";
}

}  // namespace pairhold::json
