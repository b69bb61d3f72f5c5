#pragma once

#include "hogs/camera.hpp"
#include "hogs/scene.hpp"

#include <memory>

namespace hogs {

struct RenderConfig {
  double near_clip = 0.01;
  double dilation = 0.3;  // px^2 added to the 2D covariance diagonal
  Vec3 background = Vec3::Zero();
};

inline constexpr double kAlphaCeiling = 0.999;
inline constexpr double kAlphaSkip = 1.0 / 255.0;
inline constexpr double kTransmittanceCutoff = 1e-4;
inline constexpr double kMinCov2dDet = 1e-12;
inline constexpr int kTileSize = 16;

struct Projected2D {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Zero();
  double depth = 0.0;
  double radius = 0.0;
  bool valid = false;
};

/// EWA projection of one world-space Gaussian.
Projected2D project_gaussian(const Vec3& mean_world, const Mat3& cov_world, const Camera& cam,
                             const RenderConfig& cfg);

// Per-view intermediate state kept by the forward pass so that the backward
// pass can replay compositing exactly.
struct RasterState {
  struct Splat {
    Vec3 mean_world = Vec3::Zero();
    Vec3 cam_space = Vec3::Zero();
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Zero();
    Vec3 conic = Vec3::Zero();  // inverse cov2d: (a, b, c) for [[a, b], [b, c]]
    double radius = 0.0;
    double depth = 0.0;
    double opacity = 0.0;
    Vec3 color = Vec3::Zero();
    Vec3 view_dir = Vec3::Zero();
    double view_dist = 0.0;
    std::array<bool, 3> color_clamped{};
    bool visible = false;
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
  };
  std::vector<Splat> splats;            // indexed like the GaussianSet
  std::vector<uint32_t> order;          // visible Gaussians, front to back
  int tiles_x = 0, tiles_y = 0;
  std::vector<std::vector<uint32_t>> tile_lists;  // front-to-back per tile
  int sh_degree = 0;
  Vec3 cam_center = Vec3::Zero();
  RenderConfig config;
  Camera camera;
};

struct RenderOutput {
  Image radiance;        // H x W x 3
  Image alpha;           // H x W x 1
  Image depth_expected;  // H x W x 1
  std::vector<double> per_gaussian_screen_grad_norm;  // filled by backward
  std::shared_ptr<const RasterState> state;
};

/// Depth-sorted front-to-back alpha compositing of the set into one view.
RenderOutput render(const GaussianSet& set, const Camera& cam, const RenderConfig& cfg = {});

// Shared per-pixel visitor for forward and backward: walks the tile list of
// pixel (x, y) in compositing order and calls fn(index, alpha, transmittance
// before, gaussian value, alpha_clamped). Returns the final transmittance.
struct PixelContribution {
  uint32_t index;
  double alpha;
  double transmittance;
  double gaussian;
  bool clamped;
  Vec2 offset;  // pixel - mean2d
};

template <typename Fn>
double composite_pixel(const RasterState& st, int x, int y, Fn&& fn) {
  const int tx = x / kTileSize, ty = y / kTileSize;
  const auto& list = st.tile_lists[static_cast<size_t>(ty) * st.tiles_x + tx];
  double T = 1.0;
  for (uint32_t id : list) {
    const auto& s = st.splats[id];
    if (x < s.x0 || x > s.x1 || y < s.y0 || y > s.y1) continue;
    const Vec2 d(x - s.mean2d[0], y - s.mean2d[1]);
    const double power =
        -0.5 * (s.conic[0] * d[0] * d[0] + s.conic[2] * d[1] * d[1]) - s.conic[1] * d[0] * d[1];
    if (power > 0.0) continue;
    const double G = std::exp(power);
    double alpha = s.opacity * G;
    bool clamped = false;
    if (alpha > kAlphaCeiling) {
      alpha = kAlphaCeiling;
      clamped = true;
    }
    if (alpha < kAlphaSkip) continue;
    const double next_T = T * (1.0 - alpha);
    if (next_T < kTransmittanceCutoff) break;
    fn(PixelContribution{id, alpha, T, G, clamped, d});
    T = next_T;
  }
  return T;
}

}  // namespace hogs
