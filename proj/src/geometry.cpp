#include "hogs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hogs {

std::string_view to_string(Parametrization p) {
  switch (p) {
    case Parametrization::Cartesian: return "cartesian";
    case Parametrization::Homogeneous: return "homogeneous";
    case Parametrization::InvertedSpherical: return "inverted-spherical";
  }
  return "unknown";
}

Parametrization parse_parametrization(std::string_view name) {
  if (name == "cartesian") return Parametrization::Cartesian;
  if (name == "homogeneous") return Parametrization::Homogeneous;
  if (name == "inverted-spherical" || name == "inverted_spherical")
    return Parametrization::InvertedSpherical;
  throw std::invalid_argument("unknown parametrization '" + std::string(name) +
                              "' (expected cartesian, homogeneous or inverted-spherical)");
}

double activate_weight(double raw) { return std::exp(raw); }

namespace {

double inverse_depth(double raw) {
  return std::min(std::exp(raw), kMaxInverseDepth);
}

bool inverse_depth_clamped(double raw) { return std::exp(raw) > kMaxInverseDepth; }

Vec3 unit_direction(double theta, double phi) {
  return {std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta), std::cos(phi)};
}

Mat3 rotation_from_unit(double r, double x, double y, double z) {
  Mat3 R;
  R << 1 - 2 * (y * y + z * z), 2 * (x * y - r * z), 2 * (x * z + r * y),
       2 * (x * y + r * z), 1 - 2 * (x * x + z * z), 2 * (y * z - r * x),
       2 * (x * z - r * y), 2 * (y * z + r * x), 1 - 2 * (x * x + y * y);
  return R;
}

bool all_finite(const Vec3& v) { return v.allFinite(); }

}  // namespace

Mat3 quaternion_to_rotation(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("zero quaternion");
  const Vec4 u = q / n;
  return rotation_from_unit(u[0], u[1], u[2], u[3]);
}

Vec3 decode_position(const RawGeometry& raw, Parametrization p) {
  switch (p) {
    case Parametrization::Cartesian:
      return raw.position;
    case Parametrization::Homogeneous:
      return raw.position * std::exp(-raw.weight);
    case Parametrization::InvertedSpherical:
      return unit_direction(raw.position[0], raw.position[1]) / inverse_depth(raw.weight);
  }
  return raw.position;
}

Vec3 decode_scale(const RawGeometry& raw, Parametrization p) {
  if (p == Parametrization::Homogeneous) {
    return (raw.log_scale.array() - raw.weight).exp().matrix();
  }
  return raw.log_scale.array().exp().matrix();
}

DecodedGeometry decode(const RawGeometry& raw, Parametrization p) {
  DecodedGeometry out;
  const double qn = raw.rotation.norm();
  if (!(qn > 0.0) || !std::isfinite(qn)) return out;
  out.mean = decode_position(raw, p);
  out.scale = decode_scale(raw, p);
  out.rotation = quaternion_to_rotation(raw.rotation);
  const Mat3 M = out.rotation * out.scale.asDiagonal();
  out.covariance = M * M.transpose();
  out.valid = all_finite(out.mean) && all_finite(out.scale) && out.covariance.allFinite();
  return out;
}

Mat3 decode_covariance(const RawGeometry& raw, Parametrization p) {
  const Mat3 R = quaternion_to_rotation(raw.rotation);
  const Mat3 M = R * decode_scale(raw, p).asDiagonal();
  return M * M.transpose();
}

RawGeometry encode_from_cartesian(const Vec3& mean, const Vec3& scale, const Vec4& rotation,
                                  Parametrization p, std::optional<double> w_hint) {
  if (!(scale.array() > 0.0).all()) throw std::invalid_argument("scales must be positive");
  RawGeometry raw;
  raw.rotation = rotation;
  raw.log_scale = scale.array().log().matrix();
  switch (p) {
    case Parametrization::Cartesian:
      raw.position = mean;
      break;
    case Parametrization::Homogeneous: {
      double w = 1.0;
      if (w_hint) {
        if (!(*w_hint > 0.0)) throw std::invalid_argument("w hint must be positive");
        w = *w_hint;
      } else if (const double d = mean.norm(); d > 0.0) {
        w = 1.0 / d;
      }
      raw.weight = std::log(w);
      raw.position = mean * w;
      raw.log_scale.array() += raw.weight;
      break;
    }
    case Parametrization::InvertedSpherical: {
      const double r = mean.norm();
      if (!(r > 0.0)) {
        throw std::invalid_argument("inverted spherical encoding is undefined at the origin");
      }
      const double theta = std::atan2(mean[1], mean[0]);
      const double phi = std::acos(std::clamp(mean[2] / r, -1.0, 1.0));
      raw.position = Vec3(theta, phi, 0.0);
      raw.weight = std::min(-std::log(r), std::log(kMaxInverseDepth));
      break;
    }
  }
  return raw;
}

RawGeometry rescale_homogeneous(const RawGeometry& raw, double k) {
  if (!(k > 0.0) || !std::isfinite(k)) {
    throw std::invalid_argument("rescale factor must be positive and finite");
  }
  RawGeometry out = raw;
  const double lk = std::log(k);
  out.position *= k;
  out.log_scale.array() += lk;
  out.weight += lk;
  return out;
}

RawGradient decode_backward_scale(const RawGeometry& raw, Parametrization p, const Vec3& dL_dmean,
                                  const Vec3& dL_dscale, const Mat3& dL_dR) {
  RawGradient g;
  g.rotation.setZero();
  g.position.setZero();
  g.log_scale.setZero();
  g.weight = 0.0;

  // Quaternion through the normalization.
  const double n = raw.rotation.norm();
  const Vec4 u = raw.rotation / n;
  const double r = u[0], x = u[1], y = u[2], z = u[3];
  const Mat3& G = dL_dR;
  Vec4 du;
  du[0] = 2 * (-z * G(0, 1) + y * G(0, 2) + z * G(1, 0) - x * G(1, 2) - y * G(2, 0) + x * G(2, 1));
  du[1] = 2 * (y * G(0, 1) + z * G(0, 2) + y * G(1, 0) - 2 * x * G(1, 1) - r * G(1, 2) +
               z * G(2, 0) + r * G(2, 1) - 2 * x * G(2, 2));
  du[2] = 2 * (-2 * y * G(0, 0) + x * G(0, 1) + r * G(0, 2) + x * G(1, 0) + z * G(1, 2) -
               r * G(2, 0) + z * G(2, 1) - 2 * y * G(2, 2));
  du[3] = 2 * (-2 * z * G(0, 0) - r * G(0, 1) + x * G(0, 2) + r * G(1, 0) - 2 * z * G(1, 1) +
               y * G(1, 2) + x * G(2, 0) + y * G(2, 1));
  g.rotation = (du - u * u.dot(du)) / n;

  const Vec3 scale = decode_scale(raw, p);
  g.log_scale = dL_dscale.cwiseProduct(scale);

  switch (p) {
    case Parametrization::Cartesian:
      g.position = dL_dmean;
      break;
    case Parametrization::Homogeneous: {
      const double inv_w = std::exp(-raw.weight);
      g.position = dL_dmean * inv_w;
      const Vec3 mean = raw.position * inv_w;
      // d mean / d rho = -mean, d s_i / d rho = -s_i
      g.weight = -dL_dmean.dot(mean) - dL_dscale.dot(scale);
      break;
    }
    case Parametrization::InvertedSpherical: {
      const double theta = raw.position[0], phi = raw.position[1];
      const double radius = 1.0 / inverse_depth(raw.weight);
      const Vec3 d_theta(-std::sin(phi) * std::sin(theta), std::sin(phi) * std::cos(theta), 0.0);
      const Vec3 d_phi(std::cos(phi) * std::cos(theta), std::cos(phi) * std::sin(theta),
                       -std::sin(phi));
      g.position[0] = radius * dL_dmean.dot(d_theta);
      g.position[1] = radius * dL_dmean.dot(d_phi);
      if (!inverse_depth_clamped(raw.weight)) {
        g.weight = -radius * dL_dmean.dot(unit_direction(theta, phi));
      }
      break;
    }
  }
  return g;
}

RawGradient decode_backward(const RawGeometry& raw, Parametrization p, const Vec3& dL_dmean,
                            const Mat3& dL_dcov) {
  // Sigma = M M^T with M = R S.
  const Mat3 R = quaternion_to_rotation(raw.rotation);
  const Vec3 scale = decode_scale(raw, p);
  const Mat3 M = R * scale.asDiagonal();
  const Mat3 dM = (dL_dcov + dL_dcov.transpose()) * M;
  Vec3 dscale;
  for (int j = 0; j < 3; ++j) dscale[j] = dM.col(j).dot(R.col(j));
  const Mat3 dR = dM * scale.asDiagonal();
  return decode_backward_scale(raw, p, dL_dmean, dscale, dR);
}

}  // namespace hogs
