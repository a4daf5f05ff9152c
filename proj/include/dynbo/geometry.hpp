#pragma once

#include <algorithm>

namespace dynbo {

/// Axis-aligned box in pixel coordinates, stored by center.
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double width = 0.0;
  double height = 0.0;

  static BoundingBox from_top_left(double x, double y, double w, double h) {
    return {x + 0.5 * w, y + 0.5 * h, w, h};
  }

  double left() const { return cx - 0.5 * width; }
  double top() const { return cy - 0.5 * height; }
  double right() const { return cx + 0.5 * width; }
  double bottom() const { return cy + 0.5 * height; }
  double area() const { return width * height; }

  // Same center, both sides multiplied by `s`.
  BoundingBox scaled(double s) const { return {cx, cy, width * s, height * s}; }
  BoundingBox moved_to(double x, double y) const { return {x, y, width, height}; }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Intersection over union in continuous pixel measure. Throws on boxes with
/// non-positive area.
double iou(const BoundingBox& a, const BoundingBox& b);

}  // namespace dynbo
