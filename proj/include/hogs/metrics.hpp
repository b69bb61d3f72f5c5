#pragma once

#include "hogs/types.hpp"

#include <optional>

namespace hogs {

inline constexpr double kPsnrCap = 100.0;

// SSIM with an 11x11 Gaussian window (sigma 1.5), C1 = 0.01^2, C2 = 0.03^2,
// zero padding at the borders. The map is averaged over channels.
Image ssim_map(const Image& pred, const Image& gt);

/// Mean SSIM, optionally restricted to mask pixels (mask is H x W x 1, > 0.5
/// selects). The map is always computed on the full images first.
double ssim(const Image& pred, const Image& gt, const Image* mask = nullptr);

/// PSNR for images in [0, 1]; identical inputs report kPsnrCap.
double psnr(const Image& pred, const Image& gt, const Image* mask = nullptr);

/// Mean SSIM and its gradient with respect to `pred`.
double ssim_with_gradient(const Image& pred, const Image& gt, Image& dssim_dpred);

struct PhotometricLoss {
  double loss = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
  Image grad;  // dL/dpred
};

/// (1 - lambda) * mean|pred - gt| + lambda * (1 - SSIM(pred, gt)).
PhotometricLoss photometric_loss(const Image& pred, const Image& gt, double lambda_dssim);

/// Separable 11-tap Gaussian blur of one plane with zero padding.
std::vector<double> gaussian_blur(const std::vector<double>& plane, int width, int height);

}  // namespace hogs
