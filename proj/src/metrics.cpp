#include "hogs/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace hogs {

namespace {

constexpr int kRadius = 5;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, 2 * kRadius + 1>& window() {
  static const auto w = [] {
    std::array<double, 2 * kRadius + 1> k{};
    double sum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
      k[i + kRadius] = std::exp(-(i * i) / (2.0 * 1.5 * 1.5));
      sum += k[i + kRadius];
    }
    for (auto& v : k) v /= sum;
    return k;
  }();
  return w;
}

void check_shapes(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("image dimensions differ");
  if (a.empty()) throw std::invalid_argument("empty image");
}

std::vector<double> channel(const Image& img, int c) {
  std::vector<double> out(img.pixel_count());
  for (size_t i = 0; i < out.size(); ++i) out[i] = img.data[i * img.channels + c];
  return out;
}

struct SsimStats {
  std::vector<double> mu_x, mu_y, ex2, ey2, exy;
};

SsimStats ssim_stats(const std::vector<double>& x, const std::vector<double>& y, int w, int h) {
  std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  return {gaussian_blur(x, w, h), gaussian_blur(y, w, h), gaussian_blur(xx, w, h),
          gaussian_blur(yy, w, h), gaussian_blur(xy, w, h)};
}

double ssim_value(const SsimStats& s, size_t i) {
  const double mx = s.mu_x[i], my = s.mu_y[i];
  const double n1 = 2 * mx * my + kC1;
  const double n2 = 2 * (s.exy[i] - mx * my) + kC2;
  const double d1 = mx * mx + my * my + kC1;
  const double d2 = (s.ex2[i] - mx * mx) + (s.ey2[i] - my * my) + kC2;
  return n1 * n2 / (d1 * d2);
}

}  // namespace

std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height) {
  const auto& k = window();
  std::vector<double> tmp(plane.size(), 0.0), out(plane.size(), 0.0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) {
        const int xx = x + i;
        if (xx >= 0 && xx < width) acc += k[i + kRadius] * plane[static_cast<size_t>(y) * width + xx];
      }
      tmp[static_cast<size_t>(y) * width + x] = acc;
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) {
        const int yy = y + i;
        if (yy >= 0 && yy < height) acc += k[i + kRadius] * tmp[static_cast<size_t>(yy) * width + x];
      }
      out[static_cast<size_t>(y) * width + x] = acc;
    }
  }
  return out;
}

Image ssim_map(const Image& pred, const Image& gt) {
  check_shapes(pred, gt);
  Image map(pred.width, pred.height, 1);
  for (int c = 0; c < pred.channels; ++c) {
    const SsimStats s = ssim_stats(channel(pred, c), channel(gt, c), pred.width, pred.height);
    for (size_t i = 0; i < map.data.size(); ++i) map.data[i] += ssim_value(s, i) / pred.channels;
  }
  return map;
}

double ssim(const Image& pred, const Image& gt, const Image* mask) {
  const Image map = ssim_map(pred, gt);
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < map.data.size(); ++i) {
    if (mask && !(mask->data[i] > 0.5)) continue;
    sum += map.data[i];
    ++n;
  }
  return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
}

double psnr(const Image& pred, const Image& gt, const Image* mask) {
  check_shapes(pred, gt);
  double se = 0.0;
  size_t n = 0;
  for (size_t p = 0; p < pred.pixel_count(); ++p) {
    if (mask && !(mask->data[p] > 0.5)) continue;
    for (int c = 0; c < pred.channels; ++c) {
      const double d = pred.data[p * pred.channels + c] - gt.data[p * gt.channels + c];
      se += d * d;
    }
    n += pred.channels;
  }
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  const double mse = se / static_cast<double>(n);
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / mse));
}

double ssim_with_gradient(const Image& pred, const Image& gt, Image& grad) {
  check_shapes(pred, gt);
  const int w = pred.width, h = pred.height, C = pred.channels;
  const size_t P = pred.pixel_count();
  const double norm = 1.0 / (static_cast<double>(P) * C);
  grad = Image(w, h, C);
  double total = 0.0;
  std::vector<double> d_mx(P), d_ex2(P), d_exy(P);
  for (int c = 0; c < C; ++c) {
    const auto x = channel(pred, c);
    const auto y = channel(gt, c);
    const SsimStats s = ssim_stats(x, y, w, h);
    for (size_t i = 0; i < P; ++i) {
      const double mx = s.mu_x[i], my = s.mu_y[i];
      const double n1 = 2 * mx * my + kC1;
      const double n2 = 2 * (s.exy[i] - mx * my) + kC2;
      const double d1 = mx * mx + my * my + kC1;
      const double d2 = (s.ex2[i] - mx * mx) + (s.ey2[i] - my * my) + kC2;
      const double S = n1 * n2 / (d1 * d2);
      total += S;
      d_mx[i] = norm * ((2 * my * n2 - 2 * my * n1) / (d1 * d2) - S * (2 * mx / d1 - 2 * mx / d2));
      d_ex2[i] = norm * (-S / d2);
      d_exy[i] = norm * (2 * n1 / (d1 * d2));
    }
    // The zero-padded symmetric blur is self-adjoint.
    const auto g_mx = gaussian_blur(d_mx, w, h);
    const auto g_ex2 = gaussian_blur(d_ex2, w, h);
    const auto g_exy = gaussian_blur(d_exy, w, h);
    for (size_t i = 0; i < P; ++i) {
      grad.data[i * C + c] = g_mx[i] + 2 * x[i] * g_ex2[i] + y[i] * g_exy[i];
    }
  }
  return total * norm;
}

PhotometricLoss photometric_loss(const Image& pred, const Image& gt, double lambda) {
  check_shapes(pred, gt);
  PhotometricLoss out;
  Image dssim;
  out.ssim = ssim_with_gradient(pred, gt, dssim);
  const double n = static_cast<double>(pred.data.size());
  out.grad = Image(pred.width, pred.height, pred.channels);
  double l1 = 0.0;
  for (size_t i = 0; i < pred.data.size(); ++i) {
    const double d = pred.data[i] - gt.data[i];
    l1 += std::abs(d);
    const double sgn = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
    out.grad.data[i] = (1.0 - lambda) * sgn / n - lambda * dssim.data[i];
  }
  out.l1 = l1 / n;
  out.loss = (1.0 - lambda) * out.l1 + lambda * (1.0 - out.ssim);
  return out;
}

}  // namespace hogs
