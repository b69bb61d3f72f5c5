#pragma once

#include "hogs/render.hpp"

#include <functional>

namespace hogs {

struct GradientBuffer {
  ParamArrays grads;
  /// |dL/dmean2d| per Gaussian in NDC units (pixel gradient scaled by W/2, H/2),
  /// zero for Gaussians not visible in the view.
  std::vector<double> screen_grad_norm;
  /// True for Gaussians that were rasterized in this view.
  std::vector<bool> visible;
};

/// Reverse-mode gradient of a loss whose radiance gradient is `dL_dradiance`
/// (H x W x 3) through the render that produced `out`.
GradientBuffer backward(const GaussianSet& set, const RenderOutput& out,
                        const Image& dL_dradiance);

using LossFn = std::function<double(const RenderOutput&)>;

/// Central-difference gradient of loss_fn(render(set)) for every raw scalar.
GradientBuffer finite_diff_gradients(const GaussianSet& set, const Camera& cam,
                                     const LossFn& loss_fn, double h,
                                     const RenderConfig& cfg = {});

}  // namespace hogs
