#pragma once

#include "hogs/grad.hpp"
#include "hogs/metrics.hpp"

#include <random>
#include <string>

namespace hogs {

// Log-linear interpolation from `init` to `final` over [0, max_steps], held
// at `final` afterwards.
struct LrSchedule {
  double init = 1.0;
  double final = 1.0;
  int max_steps = 1;
  double at(int step) const;
};

struct TrainConfig {
  Parametrization parametrization = Parametrization::Homogeneous;
  int iterations = 50000;
  uint64_t seed = 0;

  // Initialization.
  int max_sh_degree = 3;
  int sh_degree_interval = 1000;
  double initial_opacity = 0.1;
  std::string w_init = "1/d";
  size_t skybox_count = 0;
  double skybox_radius = 1000.0;
  Vec3 skybox_up{0.0, 0.0, 1.0};

  // Learning rates. Position rates are multiplied by the scene extent.
  double lr_mu_init = 1.6e-4;
  double lr_mu_final = 1.6e-6;
  int position_lr_max_steps = 30000;
  double lr_rho_init = 2e-4;
  double lr_rho_final = 2e-6;
  double lr_w_multiplier = 1.0;
  double lr_scale = 5e-3;
  double lr_rot = 1e-3;
  double lr_opacity = 5e-2;
  double lr_sh = 2.5e-3;  // DC; higher orders use lr_sh / 20
  double lambda_dssim = 0.2;

  // Adaptive density control.
  int densify_interval = 100;
  int densify_start = 500;
  int densify_stop = 15000;
  double densify_grad_threshold = 2e-4;
  double split_scale_fraction = 0.01;  // of the extent
  int opacity_reset_interval = 3000;
  double prune_opacity = 5e-3;
  double prune_screen_px = 20.0;
  double prune_world_extent_fraction = 0.1;
  bool world_prune_enabled = false;

  // Rendering.
  double near_clip = 0.01;
  Vec3 background = Vec3::Zero();
  bool random_background = false;

  // Outputs (used by the CLI driver).
  int checkpoint_interval = 0;  // 0: final checkpoint only
  int telemetry_interval = 100;

  /// Reference defaults for a parametrization: the world-space prune is on
  /// only for the Cartesian baseline.
  static TrainConfig defaults_for(Parametrization p);

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  LrSchedule position_schedule(double extent) const;
  LrSchedule weight_schedule() const;
};

struct AdamState {
  ParamArrays m;
  ParamArrays v;
  int64_t step = 0;
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-15;

// Per-Gaussian statistics collected between densification passes.
struct DensifyStats {
  std::vector<double> grad_accum;  // sum of screen gradient norms
  std::vector<int> denom;          // views that rasterized the Gaussian
  std::vector<double> max_radius;  // largest screen radius seen (px)
  void reset(size_t n);
};

struct TrainView {
  Camera camera;
  Image image;
  std::string name;
};

struct TrainState {
  TrainConfig config;
  GaussianSet set;
  AdamState adam;
  DensifyStats stats;
  std::mt19937_64 rng;
  std::vector<uint32_t> view_queue;  // remaining views of the current epoch
  double extent = 1.0;
  int iteration = 0;  // completed iterations
};

struct StepStats {
  int iteration = 0;
  uint32_t view = 0;
  double loss = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
  double psnr = 0.0;
  size_t count = 0;
  bool densified = false;
  bool opacity_reset = false;
};

struct DensifyReport {
  size_t cloned = 0;
  size_t split = 0;
  size_t pruned = 0;
};

/// Bounding radius of the camera centers (max distance to their mean) * 1.1.
double scene_extent(const std::vector<Camera>& cameras);

TrainState make_train_state(GaussianSet set, const std::vector<Camera>& train_cameras,
                            const TrainConfig& cfg);

/// Adam update of every raw parameter with the learning rates for
/// `iteration` (1-based).
void adam_step(GaussianSet& set, AdamState& adam, const ParamArrays& grads,
               const TrainConfig& cfg, double extent, int iteration);

/// One iteration: sample a view, render, L1 + D-SSIM, backward, Adam, then the
/// densification hooks due at this iteration. Throws NumericError on a
/// non-finite loss or gradient.
StepStats train_step(TrainState& state, const std::vector<TrainView>& views);

/// Clone, split and prune based on the accumulated statistics. `max_screen_px`
/// <= 0 disables the screen-size prune and with it the world-size prune.
DensifyReport densify_and_prune(TrainState& state, double max_screen_px);

/// Split only: 2 children per parent sampled from the parent's world-space
/// Gaussian with scales / 1.6. Returns the children (parents untouched).
GaussianSet sample_split_children(const GaussianSet& set, const std::vector<size_t>& parents,
                                  std::mt19937_64& rng);

/// Clamp opacities to at most 0.01 and clear their Adam moments.
void reset_opacity(TrainState& state);

/// Resize Adam moments and stats after `set` gained or lost Gaussians.
void keep_gaussians(TrainState& state, const std::vector<bool>& keep);

}  // namespace hogs
