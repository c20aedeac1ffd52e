#pragma once

#include <cmath>

namespace attrcons {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

inline double distance(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Four extreme points of one eye.
struct EyePoints {
  Point2 outer;
  Point2 inner;
  Point2 top;
  Point2 bottom;

  bool operator==(const EyePoints&) const = default;

  Point2 center() const {
    return {(outer.x + inner.x + top.x + bottom.x) / 4.0,
            (outer.y + inner.y + top.y + bottom.y) / 4.0};
  }
};

struct MouthPoints {
  Point2 left;
  Point2 right;
  Point2 top;
  Point2 bottom;

  bool operator==(const MouthPoints&) const = default;
};

// Facial landmark set consumed by the pose / eyes / mouth quality features.
// Landmarks are an input of this library, never detected by it.
struct Landmarks {
  EyePoints left_eye;
  EyePoints right_eye;
  MouthPoints mouth;
  Point2 nose_tip;

  bool operator==(const Landmarks&) const = default;
};

}  // namespace attrcons
