#pragma once

#include <string>

namespace pairhold {

/// Axis-aligned box in continuous pixel coordinates, corner form.
/// x grows rightward, y grows downward. A valid box has x2 > x1 and y2 > y1.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  double center_x() const { return 0.5 * (x1 + x2); }
  double center_y() const { return 0.5 * (y1 + y2); }

  /// Finite coordinates and strictly positive extent on both axes.
  bool is_valid() const;

  friend bool operator==(const Box&, const Box&) = default;
};

struct Keypoint {
  std::string name;
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// Throws GeometryError naming `what` if the box is not valid.
void require_valid(const Box& box, const char* what = "box");

/// Area of the overlap of two valid boxes (0 when disjoint or touching).
double intersection_area(const Box& a, const Box& b);

/// Intersection over union, in [0,1].
double iou(const Box& a, const Box& b);

/// Fraction of `inner` covered by `outer`: |inner ∩ outer| / |inner|.
double enclosure(const Box& inner, const Box& outer);

/// Smallest axis-aligned box containing both inputs.
Box union_box(const Box& a, const Box& b);

/// Closed-box point test: boundary points are inside.
bool contains(const Box& box, double x, double y);

/// Returns the part of `box` inside [0,width]x[0,height]. The result may be
/// degenerate when the box lies outside the frame; callers check is_valid().
Box clip_to_frame(const Box& box, double width, double height);

struct ResizedDims {
  long width = 0;
  long height = 0;
  double scale = 1.0;

  friend bool operator==(const ResizedDims&, const ResizedDims&) = default;
};

/// Scales (width, height) so that the longer side equals `target`.
/// New dimensions are rounded half away from zero.
ResizedDims resize_long_side(double width, double height, double target = 600.0);

}  // namespace pairhold
