#pragma once

// Coordinate parametrizations for Gaussian geometry.
//
// Every Gaussian stores the same raw slots regardless of parametrization:
//
//   position  (3)  Cartesian: mean.  Homogeneous: mean * w.
//                  InvertedSpherical: (theta, phi, unused).
//   log_scale (3)  log of the scale.  Homogeneous: log of (scale * w).
//   rotation  (4)  unnormalized quaternion (w, x, y, z).
//   weight    (1)  Homogeneous: rho = ln w.  InvertedSpherical: ln w' where
//                  w' = 1 / radius.  Unused for Cartesian.
//
// Decoding always produces a Cartesian mean, per-axis scale and rotation.

#include "hogs/types.hpp"

#include <optional>
#include <string_view>

namespace hogs {

enum class Parametrization { Cartesian = 0, Homogeneous = 1, InvertedSpherical = 2 };

std::string_view to_string(Parametrization p);
Parametrization parse_parametrization(std::string_view name);

struct RawGeometry {
  Vec3 position = Vec3::Zero();
  Vec3 log_scale = Vec3::Zero();
  Vec4 rotation = Vec4(1, 0, 0, 0);
  double weight = 0.0;
};

struct DecodedGeometry {
  Vec3 mean = Vec3::Zero();
  Vec3 scale = Vec3::Ones();
  Mat3 rotation = Mat3::Identity();
  Mat3 covariance = Mat3::Identity();
  bool valid = false;
};

// Gradient of a scalar with respect to the raw slots.
using RawGradient = RawGeometry;

/// Upper clamp on the inverted depth w' = exp(weight).
inline constexpr double kMaxInverseDepth = 1e12;

double activate_weight(double raw);

Mat3 quaternion_to_rotation(const Vec4& q);

Vec3 decode_position(const RawGeometry& raw, Parametrization p);
Vec3 decode_scale(const RawGeometry& raw, Parametrization p);
Mat3 decode_covariance(const RawGeometry& raw, Parametrization p);

/// Full decode. `valid` is false when the quaternion is zero or any decoded
/// quantity is non-finite (for example exp overflow of an extreme weight).
DecodedGeometry decode(const RawGeometry& raw, Parametrization p);

/// Encode a Cartesian Gaussian. For Homogeneous, `w_hint` overrides the
/// default w = 1 / |mean| (w = 1 at the origin). Throws std::invalid_argument
/// for non-positive scales or a mean at the origin under InvertedSpherical.
RawGeometry encode_from_cartesian(const Vec3& mean, const Vec3& scale, const Vec4& rotation,
                                  Parametrization p, std::optional<double> w_hint = std::nullopt);

/// Move along the projective equivalence class: (mu~, s~, w) -> k (mu~, s~, w).
RawGeometry rescale_homogeneous(const RawGeometry& raw, double k);

/// Chain dL/dmean and dL/dcovariance (full 3x3, entries treated as
/// independent) back to the raw slots.
RawGradient decode_backward(const RawGeometry& raw, Parametrization p, const Vec3& dL_dmean,
                            const Mat3& dL_dcov);

/// Same chain when the scale gradient is already available (used by tests
/// that differentiate with respect to decoded scales directly).
RawGradient decode_backward_scale(const RawGeometry& raw, Parametrization p, const Vec3& dL_dmean,
                                  const Vec3& dL_dscale, const Mat3& dL_drotation);

}  // namespace hogs
