#include "hogs/render.hpp"

#include "hogs/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hogs {

void Camera::validate(double tol) const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw std::invalid_argument("image size must be positive");
  const double err = (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err > tol || std::abs(rotation.determinant() - 1.0) > tol) {
    throw std::invalid_argument("camera rotation is not orthonormal");
  }
}

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double focal,
                       int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-12) right = forward.unitOrthogonal();
  right.normalize();
  const Vec3 down = forward.cross(right);
  Camera cam;
  cam.fx = cam.fy = focal;
  cam.width = width;
  cam.height = height;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * eye;
  return cam;
}

Mat3 orthonormalize(const Mat3& rotation) {
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 R = svd.matrixU() * svd.matrixV().transpose();
  if (R.determinant() < 0) {
    Mat3 U = svd.matrixU();
    U.col(2) *= -1.0;
    R = U * svd.matrixV().transpose();
  }
  return R;
}

namespace {

double max_eigenvalue(const Mat2& c) {
  const double mid = 0.5 * (c(0, 0) + c(1, 1));
  const double det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
  return mid + std::sqrt(std::max(0.0, mid * mid - det));
}

}  // namespace

Projected2D project_gaussian(const Vec3& mean_world, const Mat3& cov_world, const Camera& cam,
                             const RenderConfig& cfg) {
  Projected2D out;
  const Vec3 t = cam.to_camera(mean_world);
  out.depth = t.z();
  if (!(t.z() > cfg.near_clip)) return out;
  const double iz = 1.0 / t.z();
  out.mean = Vec2(cam.fx * t.x() * iz + cam.cx, cam.fy * t.y() * iz + cam.cy);
  Eigen::Matrix<double, 2, 3> J;
  J << cam.fx * iz, 0.0, -cam.fx * t.x() * iz * iz,
       0.0, cam.fy * iz, -cam.fy * t.y() * iz * iz;
  const Eigen::Matrix<double, 2, 3> T = J * cam.rotation;
  out.cov = T * cov_world * T.transpose();
  out.cov(0, 0) += cfg.dilation;
  out.cov(1, 1) += cfg.dilation;
  out.radius = 3.0 * std::sqrt(max_eigenvalue(out.cov));
  out.valid = out.mean.allFinite() && out.cov.allFinite() && std::isfinite(out.radius);
  return out;
}

RenderOutput render(const GaussianSet& set, const Camera& cam, const RenderConfig& cfg) {
  const int W = cam.width, H = cam.height;
  auto st = std::make_shared<RasterState>();
  st->config = cfg;
  st->camera = cam;
  st->cam_center = cam.center();
  st->sh_degree = std::min(set.active_sh_degree, set.max_sh_degree);
  st->splats.resize(set.size());

  parallel_for(set.size(), [&](size_t i) {
    auto& s = st->splats[i];
    const DecodedGeometry g = set.decoded(i);
    if (!g.valid) return;
    const Projected2D p = project_gaussian(g.mean, g.covariance, cam, cfg);
    if (!p.valid) return;
    const double det = p.cov.determinant();
    if (!(det > kMinCov2dDet) || !(p.radius > 0.0)) return;
    s.mean_world = g.mean;
    s.cam_space = cam.to_camera(g.mean);
    s.mean2d = p.mean;
    s.cov2d = p.cov;
    s.conic = Vec3(p.cov(1, 1) / det, -p.cov(0, 1) / det, p.cov(0, 0) / det);
    s.radius = p.radius;
    s.depth = p.depth;
    const double bx0 = std::max(0.0, std::ceil(p.mean.x() - p.radius));
    const double bx1 = std::min(W - 1.0, std::floor(p.mean.x() + p.radius));
    const double by0 = std::max(0.0, std::ceil(p.mean.y() - p.radius));
    const double by1 = std::min(H - 1.0, std::floor(p.mean.y() + p.radius));
    if (!(bx0 <= bx1) || !(by0 <= by1)) return;
    s.x0 = static_cast<int>(bx0);
    s.x1 = static_cast<int>(bx1);
    s.y0 = static_cast<int>(by0);
    s.y1 = static_cast<int>(by1);
    s.opacity = set.opacity(i);
    Vec3 dir = g.mean - st->cam_center;
    s.view_dist = dir.norm();
    s.view_dir = s.view_dist > 0.0 ? Vec3(dir / s.view_dist) : Vec3(0, 0, 1);
    std::array<double, 16> Y;
    sh_basis(s.view_dir, st->sh_degree, Y);
    const auto coeffs = set.sh(i);
    Vec3 c(0.5, 0.5, 0.5);
    for (int k = 0; k < sh_coeff_count(st->sh_degree); ++k) {
      for (int ch = 0; ch < 3; ++ch) c[ch] += Y[k] * coeffs[3 * k + ch];
    }
    for (int ch = 0; ch < 3; ++ch) {
      s.color_clamped[ch] = c[ch] < 0.0 || c[ch] > 1.0;
      s.color[ch] = std::clamp(c[ch], 0.0, 1.0);
    }
    s.visible = true;
  });

  for (uint32_t i = 0; i < set.size(); ++i) {
    if (st->splats[i].visible) st->order.push_back(i);
  }
  std::stable_sort(st->order.begin(), st->order.end(), [&](uint32_t a, uint32_t b) {
    return st->splats[a].depth < st->splats[b].depth;
  });

  st->tiles_x = (W + kTileSize - 1) / kTileSize;
  st->tiles_y = (H + kTileSize - 1) / kTileSize;
  st->tile_lists.assign(static_cast<size_t>(st->tiles_x) * st->tiles_y, {});
  for (uint32_t id : st->order) {
    const auto& s = st->splats[id];
    for (int ty = s.y0 / kTileSize; ty <= s.y1 / kTileSize; ++ty) {
      for (int tx = s.x0 / kTileSize; tx <= s.x1 / kTileSize; ++tx) {
        st->tile_lists[static_cast<size_t>(ty) * st->tiles_x + tx].push_back(id);
      }
    }
  }

  RenderOutput out;
  out.radiance = Image(W, H, 3);
  out.alpha = Image(W, H, 1);
  out.depth_expected = Image(W, H, 1);
  const RasterState& rs = *st;
  parallel_for(static_cast<size_t>(H), [&](size_t row) {
    const int y = static_cast<int>(row);
    for (int x = 0; x < W; ++x) {
      Vec3 C = Vec3::Zero();
      double D = 0.0;
      const double T = composite_pixel(rs, x, y, [&](const PixelContribution& pc) {
        const auto& s = rs.splats[pc.index];
        const double w = pc.alpha * pc.transmittance;
        C += w * s.color;
        D += w * s.depth;
      });
      const double a = 1.0 - T;
      for (int ch = 0; ch < 3; ++ch) out.radiance.at(x, y, ch) = C[ch] + T * cfg.background[ch];
      out.alpha.at(x, y) = a;
      out.depth_expected.at(x, y) = D / std::max(a, 1e-6);
    }
  });
  out.state = std::move(st);
  return out;
}

}  // namespace hogs
