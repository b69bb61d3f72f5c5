#pragma once

#include "hogs/types.hpp"

namespace hogs {

// Pinhole camera. Pixel (x, y) has its center at integer coordinates (x, y).
struct Camera {
  double fx = 1.0, fy = 1.0;
  double cx = 0.0, cy = 0.0;
  int width = 1, height = 1;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();

  Vec3 center() const { return -rotation.transpose() * translation; }
  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

  /// Throws std::invalid_argument when intrinsics are non-positive or the
  /// rotation is not orthonormal with det +1 (tolerance `tol`).
  void validate(double tol = 1e-9) const;

  /// Camera at `eye` looking at `target`. Camera axes: +x right, +y down,
  /// +z forward. `up` is the world up hint.
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                        int width, int height);
};

/// Project `rotation` to the nearest rotation matrix (polar decomposition).
Mat3 orthonormalize(const Mat3& rotation);

}  // namespace hogs
