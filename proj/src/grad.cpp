#include "hogs/grad.hpp"

#include "hogs/parallel.hpp"

#include <cmath>

namespace hogs {

namespace {

// Screen-space gradient of one Gaussian: mean2d (2), conic (3), color (3),
// opacity (1).
constexpr int kG2 = 9;

struct Contribution {
  uint32_t index;
  double alpha;
  double transmittance;
  double gaussian;
  bool clamped;
  Vec2 offset;
};

void accumulate_band(const RasterState& st, const Image& dL_dpix, int band,
                     std::vector<uint32_t>& ids, std::vector<double>& grads) {
  const int W = st.camera.width, H = st.camera.height;
  const size_t N = st.splats.size();
  std::vector<int32_t> slot(N, -1);
  for (int tx = 0; tx < st.tiles_x; ++tx) {
    for (uint32_t id : st.tile_lists[static_cast<size_t>(band) * st.tiles_x + tx]) {
      if (slot[id] < 0) {
        slot[id] = static_cast<int32_t>(ids.size());
        ids.push_back(id);
      }
    }
  }
  grads.assign(ids.size() * kG2, 0.0);
  const Vec3 bg = st.config.background;
  std::vector<Contribution> contribs;
  const int y_end = std::min(H, (band + 1) * kTileSize);
  for (int y = band * kTileSize; y < y_end; ++y) {
    for (int x = 0; x < W; ++x) {
      const Vec3 g(dL_dpix.at(x, y, 0), dL_dpix.at(x, y, 1), dL_dpix.at(x, y, 2));
      if (g.isZero(0.0)) continue;
      contribs.clear();
      const double T_final = composite_pixel(st, x, y, [&](const PixelContribution& pc) {
        contribs.push_back({pc.index, pc.alpha, pc.transmittance, pc.gaussian, pc.clamped,
                            pc.offset});
      });
      Vec3 behind = T_final * bg;  // radiance arriving from behind, weighted
      for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
        const auto& s = st.splats[it->index];
        double* gr = grads.data() + static_cast<size_t>(slot[it->index]) * kG2;
        const double a = it->alpha, T = it->transmittance;
        for (int ch = 0; ch < 3; ++ch) gr[5 + ch] += a * T * g[ch];
        const double dalpha = g.dot(s.color * T - behind / (1.0 - a));
        behind += s.color * (a * T);
        if (it->clamped) continue;
        gr[8] += dalpha * it->gaussian;
        const double dpower = dalpha * s.opacity * it->gaussian;
        const Vec2& d = it->offset;
        gr[0] += dpower * (s.conic[0] * d[0] + s.conic[1] * d[1]);
        gr[1] += dpower * (s.conic[1] * d[0] + s.conic[2] * d[1]);
        gr[2] += -0.5 * d[0] * d[0] * dpower;
        gr[3] += -d[0] * d[1] * dpower;
        gr[4] += -0.5 * d[1] * d[1] * dpower;
      }
    }
  }
}

}  // namespace

GradientBuffer backward(const GaussianSet& set, const RenderOutput& out,
                        const Image& dL_dradiance) {
  if (!out.state) throw std::invalid_argument("render output carries no raster state");
  const RasterState& st = *out.state;
  if (st.splats.size() != set.size()) {
    throw std::invalid_argument("render output does not match the Gaussian set");
  }
  if (dL_dradiance.width != st.camera.width || dL_dradiance.height != st.camera.height ||
      dL_dradiance.channels != 3) {
    throw std::invalid_argument("radiance gradient has the wrong shape");
  }
  const size_t N = set.size();

  std::vector<std::vector<uint32_t>> band_ids(st.tiles_y);
  std::vector<std::vector<double>> band_grads(st.tiles_y);
  parallel_for(static_cast<size_t>(st.tiles_y), [&](size_t b) {
    accumulate_band(st, dL_dradiance, static_cast<int>(b), band_ids[b], band_grads[b]);
  });
  std::vector<double> g2(N * kG2, 0.0);
  for (int b = 0; b < st.tiles_y; ++b) {
    const auto& ids = band_ids[b];
    const auto& gb = band_grads[b];
    for (size_t k = 0; k < ids.size(); ++k) {
      for (int j = 0; j < kG2; ++j) g2[ids[k] * kG2 + j] += gb[k * kG2 + j];
    }
  }

  GradientBuffer result;
  result.grads = set.params.zeros_like();
  result.screen_grad_norm.assign(N, 0.0);
  result.visible.assign(N, false);
  const Camera& cam = st.camera;
  const int n_coeffs = sh_coeff_count(st.sh_degree);

  parallel_for(N, [&](size_t i) {
    const auto& s = st.splats[i];
    if (!s.visible) return;
    result.visible[i] = true;
    const double* gr = g2.data() + i * kG2;
    const Vec2 dmean2d(gr[0], gr[1]);
    result.screen_grad_norm[i] =
        Vec2(dmean2d[0] * 0.5 * cam.width, dmean2d[1] * 0.5 * cam.height).norm();

    Vec3 dmean = Vec3::Zero();

    // Color -> SH coefficients and view direction.
    const Vec3 dcolor(gr[5], gr[6], gr[7]);
    Vec3 dc_eff = dcolor;
    for (int ch = 0; ch < 3; ++ch) {
      if (s.color_clamped[ch]) dc_eff[ch] = 0.0;
    }
    std::array<double, 16> Y;
    std::array<Vec3, 16> dY;
    sh_basis(s.view_dir, st.sh_degree, Y);
    sh_basis_gradient(s.view_dir, st.sh_degree, dY);
    const auto coeffs = set.sh(i);
    double* dsh = result.grads.sh.data() + i * 3 * set.params.sh_coeffs;
    Vec3 ddir = Vec3::Zero();
    for (int k = 0; k < n_coeffs; ++k) {
      double proj = 0.0;
      for (int ch = 0; ch < 3; ++ch) {
        dsh[3 * k + ch] = Y[k] * dc_eff[ch];
        proj += coeffs[3 * k + ch] * dc_eff[ch];
      }
      ddir += proj * dY[k];
    }
    if (s.view_dist > 0.0) {
      dmean += (ddir - s.view_dir * s.view_dir.dot(ddir)) / s.view_dist;
    }

    // Conic -> 2D covariance.
    const Mat2 A = (Mat2() << s.conic[0], s.conic[1], s.conic[1], s.conic[2]).finished();
    const Mat2 dA = (Mat2() << gr[2], 0.5 * gr[3], 0.5 * gr[3], gr[4]).finished();
    const Mat2 dcov2d = -A * dA * A;

    // 2D covariance -> Jacobian and world covariance.
    const Vec3& t = s.cam_space;
    const double iz = 1.0 / t.z();
    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx * iz, 0.0, -cam.fx * t.x() * iz * iz,
         0.0, cam.fy * iz, -cam.fy * t.y() * iz * iz;
    const Eigen::Matrix<double, 2, 3> T = J * cam.rotation;
    const DecodedGeometry geo = set.decoded(i);
    const Mat3 dcov3d = T.transpose() * dcov2d * T;
    const Eigen::Matrix<double, 2, 3> dT = 2.0 * dcov2d * T * geo.covariance;
    const Eigen::Matrix<double, 2, 3> dJ = dT * cam.rotation.transpose();

    Vec3 dt = Vec3::Zero();
    const double iz2 = iz * iz, iz3 = iz2 * iz;
    dt.x() += -cam.fx * iz2 * dJ(0, 2);
    dt.y() += -cam.fy * iz2 * dJ(1, 2);
    dt.z() += -cam.fx * iz2 * dJ(0, 0) + 2.0 * cam.fx * t.x() * iz3 * dJ(0, 2) -
              cam.fy * iz2 * dJ(1, 1) + 2.0 * cam.fy * t.y() * iz3 * dJ(1, 2);
    // mean2d = f * t_xy / t_z + c
    dt.x() += cam.fx * iz * dmean2d[0];
    dt.y() += cam.fy * iz * dmean2d[1];
    dt.z() += -cam.fx * t.x() * iz2 * dmean2d[0] - cam.fy * t.y() * iz2 * dmean2d[1];
    dmean += cam.rotation.transpose() * dt;

    const double o = s.opacity;
    result.grads.opacity[i] = gr[8] * o * (1.0 - o);

    const RawGradient rg = decode_backward(set.geometry(i), set.parametrization, dmean, dcov3d);
    for (int k = 0; k < 3; ++k) {
      result.grads.position[3 * i + k] = rg.position[k];
      result.grads.log_scale[3 * i + k] = rg.log_scale[k];
    }
    for (int k = 0; k < 4; ++k) result.grads.rotation[4 * i + k] = rg.rotation[k];
    result.grads.weight[i] = rg.weight;
  });
  return result;
}

GradientBuffer finite_diff_gradients(const GaussianSet& set, const Camera& cam,
                                     const LossFn& loss_fn, double h, const RenderConfig& cfg) {
  GradientBuffer result;
  result.grads = set.params.zeros_like();
  result.screen_grad_norm.assign(set.size(), 0.0);
  result.visible.assign(set.size(), false);
  GaussianSet work = set;
  for (Param p : kAllParams) {
    auto& values = work.params.get(p);
    auto& out = result.grads.get(p);
    for (size_t k = 0; k < values.size(); ++k) {
      const double orig = values[k];
      values[k] = orig + h;
      const double lp = loss_fn(render(work, cam, cfg));
      values[k] = orig - h;
      const double lm = loss_fn(render(work, cam, cfg));
      values[k] = orig;
      out[k] = (lp - lm) / (2.0 * h);
    }
  }
  return result;
}

}  // namespace hogs
