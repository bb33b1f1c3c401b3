#include "pairhold/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pairhold/errors.hpp"

namespace pairhold {

bool Box::is_valid() const {
  return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) &&
         std::isfinite(y2) && x2 > x1 && y2 > y1;
}

void require_valid(const Box& box, const char* what) {
  if (!box.is_valid()) {
    std::ostringstream msg;
    msg << "invalid geometry: " << what << " [" << box.x1 << ", " << box.y1
        << ", " << box.x2 << ", " << box.y2 << "] has no positive extent";
    throw GeometryError(msg.str());
  }
}

double intersection_area(const Box& a, const Box& b) {
  require_valid(a, "first box");
  require_valid(b, "second box");
  const double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0.0 || h <= 0.0) return 0.0;
  return w * h;
}

double iou(const Box& a, const Box& b) {
  const double inter = intersection_area(a, b);
  const double uni = a.area() + b.area() - inter;
  // Clamp guards against last-bit rounding above one for identical boxes.
  return std::clamp(inter / uni, 0.0, 1.0);
}

double enclosure(const Box& inner, const Box& outer) {
  const double inter = intersection_area(inner, outer);
  return std::clamp(inter / inner.area(), 0.0, 1.0);
}

Box union_box(const Box& a, const Box& b) {
  require_valid(a, "first box");
  require_valid(b, "second box");
  return Box{std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
             std::max(a.y2, b.y2)};
}

bool contains(const Box& box, double x, double y) {
  return box.x1 <= x && x <= box.x2 && box.y1 <= y && y <= box.y2;
}

Box clip_to_frame(const Box& box, double width, double height) {
  return Box{std::clamp(box.x1, 0.0, width), std::clamp(box.y1, 0.0, height),
             std::clamp(box.x2, 0.0, width), std::clamp(box.y2, 0.0, height)};
}

ResizedDims resize_long_side(double width, double height, double target) {
  if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) ||
      !std::isfinite(height)) {
    std::ostringstream msg;
    msg << "invalid geometry: cannot resize " << width << "x" << height;
    throw GeometryError(msg.str());
  }
  if (!(target > 0.0) || !std::isfinite(target)) {
    throw GeometryError("invalid geometry: resize target must be positive");
  }
  const double scale = target / std::max(width, height);
  // std::lround rounds half away from zero.
  return ResizedDims{std::lround(width * scale), std::lround(height * scale),
                     scale};
}

}  // namespace pairhold
