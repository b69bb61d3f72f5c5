#pragma once

// Direct, unoptimized reference metrics used to cross-check the library.

#include "hogs/camera.hpp"

#include <algorithm>
#include <cmath>

namespace hogs::testing {

// Full 2D 11x11 window sums (no separable pass), zero outside the image.
inline double reference_ssim(const Image& a, const Image& b, const Image* mask = nullptr) {
  double g[11];
  double gs = 0.0;
  for (int i = 0; i < 11; ++i) gs += g[i] = std::exp(-((i - 5.0) * (i - 5.0)) / 4.5);
  const double C1 = 1e-4, C2 = 9e-4;
  double total = 0.0;
  size_t count = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      double pixel = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int dy = -5; dy <= 5; ++dy) {
          for (int dx = -5; dx <= 5; ++dx) {
            const int u = x + dx, v = y + dy;
            if (u < 0 || v < 0 || u >= a.width || v >= a.height) continue;
            const double w = g[dx + 5] * g[dy + 5] / (gs * gs);
            const double p = a.at(u, v, c), q = b.at(u, v, c);
            mx += w * p;
            my += w * q;
            sxx += w * p * p;
            syy += w * q * q;
            sxy += w * p * q;
          }
        }
        const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
        pixel += (2 * mx * my + C1) * (2 * cxy + C2) / ((mx * mx + my * my + C1) * (vx + vy + C2));
      }
      if (mask && mask->at(x, y) <= 0.5) continue;
      total += pixel / a.channels;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

inline double reference_psnr(const Image& a, const Image& b, const Image* mask = nullptr) {
  double se = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      if (mask && mask->at(x, y) <= 0.5) continue;
      for (int c = 0; c < a.channels; ++c) {
        const double d = a.at(x, y, c) - b.at(x, y, c);
        se += d * d;
        ++n;
      }
    }
  }
  return -10.0 * std::log10(se / static_cast<double>(n));
}

// Scalar evaluation of one splat's contribution at pixel (x, y): projected
// footprint with the 0.3 px^2 dilation, 3-sigma support, the 1/255 skip and
// the 0.999 ceiling, then "over" the background.
inline double oracle_pixel(const Vec3& mean, const Vec3& scale, const Vec4& q_raw, double opacity,
                    double color, double bg, const Camera& cam, int x, int y) {
  const double qn = std::sqrt(q_raw.squaredNorm());
  const double r = q_raw[0] / qn, a = q_raw[1] / qn, b = q_raw[2] / qn, c = q_raw[3] / qn;
  double R[3][3] = {{1 - 2 * (b * b + c * c), 2 * (a * b - r * c), 2 * (a * c + r * b)},
                    {2 * (a * b + r * c), 1 - 2 * (a * a + c * c), 2 * (b * c - r * a)},
                    {2 * (a * c - r * b), 2 * (b * c + r * a), 1 - 2 * (a * a + b * b)}};
  double S[3][3] = {};  // world covariance
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) S[i][j] += R[i][k] * scale[k] * scale[k] * R[j][k];
  double t[3];
  for (int i = 0; i < 3; ++i) {
    t[i] = cam.translation[i];
    for (int k = 0; k < 3; ++k) t[i] += cam.rotation(i, k) * mean[k];
  }
  const double u = cam.fx * t[0] / t[2] + cam.cx, v = cam.fy * t[1] / t[2] + cam.cy;
  double J[2][3] = {{cam.fx / t[2], 0, -cam.fx * t[0] / (t[2] * t[2])},
                    {0, cam.fy / t[2], -cam.fy * t[1] / (t[2] * t[2])}};
  double JW[2][3] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) JW[i][j] += J[i][k] * cam.rotation(k, j);
  double C[2][2] = {};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 3; ++k)
        for (int l = 0; l < 3; ++l) C[i][j] += JW[i][k] * S[k][l] * JW[j][l];
  C[0][0] += 0.3;
  C[1][1] += 0.3;
  const double det = C[0][0] * C[1][1] - C[0][1] * C[1][0];
  const double mid = 0.5 * (C[0][0] + C[1][1]);
  const double radius = 3.0 * std::sqrt(mid + std::sqrt(std::max(0.0, mid * mid - det)));
  const double dx = x - u, dy = y - v;
  if (std::abs(dx) > radius || std::abs(dy) > radius) return bg;
  const double power = -0.5 * (C[1][1] * dx * dx - 2 * C[0][1] * dx * dy + C[0][0] * dy * dy) / det;
  double alpha = std::min(0.999, opacity * std::exp(power));
  if (alpha < 1.0 / 255.0) return bg;
  return alpha * color + (1 - alpha) * bg;
}

}  // namespace hogs::testing
