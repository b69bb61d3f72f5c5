#include "hogs/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hogs {

double LrSchedule::at(int step) const {
  if (max_steps <= 0) return final;
  const double t = std::clamp(static_cast<double>(step) / max_steps, 0.0, 1.0);
  return std::exp((1.0 - t) * std::log(init) + t * std::log(final));
}

TrainConfig TrainConfig::defaults_for(Parametrization p) {
  TrainConfig cfg;
  cfg.parametrization = p;
  cfg.world_prune_enabled = p == Parametrization::Cartesian;
  return cfg;
}

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
  };
  require(iterations >= 0, "iterations must be >= 0");
  require(max_sh_degree >= 0 && max_sh_degree <= 3, "max_sh_degree must be in [0, 3]");
  require(sh_degree_interval > 0, "sh_degree_interval must be > 0");
  require(initial_opacity > 0.0 && initial_opacity < 1.0, "initial_opacity must be in (0, 1)");
  for (double lr : {lr_mu_init, lr_mu_final, lr_rho_init, lr_rho_final, lr_w_multiplier,
                    lr_scale, lr_rot, lr_opacity, lr_sh}) {
    require(lr > 0.0, "learning rates must be > 0");
  }
  require(position_lr_max_steps > 0, "position_lr_max_steps must be > 0");
  require(lambda_dssim >= 0.0 && lambda_dssim <= 1.0, "lambda_dssim must be in [0, 1]");
  require(densify_interval > 0, "densify_interval must be > 0");
  require(opacity_reset_interval > 0, "opacity_reset_interval must be > 0");
  require(densify_grad_threshold >= 0.0, "densify_grad_threshold must be >= 0");
  require(split_scale_fraction > 0.0, "split_scale_fraction must be > 0");
  require(prune_world_extent_fraction > 0.0, "prune_world_extent_fraction must be > 0");
  require(near_clip > 0.0, "near_clip must be > 0");
  require(skybox_radius > 0.0, "skybox_radius must be > 0");
  require(skybox_up.norm() > 0.0, "skybox_up must be non-zero");
  require(checkpoint_interval >= 0 && telemetry_interval >= 0, "intervals must be >= 0");
  InitConfig probe;
  parse_weight_init(w_init, probe);
}

LrSchedule TrainConfig::position_schedule(double extent) const {
  return {lr_mu_init * extent, lr_mu_final * extent, position_lr_max_steps};
}

LrSchedule TrainConfig::weight_schedule() const {
  return {lr_rho_init * lr_w_multiplier, lr_rho_final * lr_w_multiplier, position_lr_max_steps};
}

void DensifyStats::reset(size_t n) {
  grad_accum.assign(n, 0.0);
  denom.assign(n, 0);
  max_radius.assign(n, 0.0);
}

double scene_extent(const std::vector<Camera>& cameras) {
  if (cameras.empty()) return 1.0;
  Vec3 center = Vec3::Zero();
  for (const auto& c : cameras) center += c.center();
  center /= static_cast<double>(cameras.size());
  double r = 0.0;
  for (const auto& c : cameras) r = std::max(r, (c.center() - center).norm());
  // A single camera (or coincident cameras) still needs a usable scale.
  if (r == 0.0) r = 1.0;
  return 1.1 * r;
}

TrainState make_train_state(GaussianSet set, const std::vector<Camera>& train_cameras,
                            const TrainConfig& cfg) {
  cfg.validate();
  if (set.parametrization != cfg.parametrization) {
    throw std::invalid_argument("Gaussian set parametrization differs from the config");
  }
  TrainState st;
  st.config = cfg;
  st.set = std::move(set);
  st.adam.m = st.set.params.zeros_like();
  st.adam.v = st.set.params.zeros_like();
  st.stats.reset(st.set.size());
  st.rng.seed(cfg.seed);
  st.extent = scene_extent(train_cameras);
  return st;
}

void adam_step(GaussianSet& set, AdamState& adam, const ParamArrays& grads,
               const TrainConfig& cfg, double extent, int iteration) {
  ++adam.step;
  const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
  const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
  const double lr_pos = cfg.position_schedule(extent).at(iteration);
  const double lr_w = cfg.weight_schedule().at(iteration);
  const bool has_weight = set.parametrization != Parametrization::Cartesian;
  for (Param p : kAllParams) {
    if (p == Param::Weight && !has_weight) continue;
    auto& x = set.params.get(p);
    auto& m = adam.m.get(p);
    auto& v = adam.v.get(p);
    const auto& g = grads.get(p);
    const size_t stride = set.params.stride(p);
    double lr = 0.0;
    switch (p) {
      case Param::Position: lr = lr_pos; break;
      case Param::LogScale: lr = cfg.lr_scale; break;
      case Param::Rotation: lr = cfg.lr_rot; break;
      case Param::Weight: lr = lr_w; break;
      case Param::Opacity: lr = cfg.lr_opacity; break;
      case Param::Sh: lr = cfg.lr_sh; break;
    }
    for (size_t k = 0; k < x.size(); ++k) {
      m[k] = kAdamBeta1 * m[k] + (1.0 - kAdamBeta1) * g[k];
      v[k] = kAdamBeta2 * v[k] + (1.0 - kAdamBeta2) * g[k] * g[k];
      double step_lr = lr;
      if (p == Param::Sh && (k % stride) >= 3) step_lr = lr / 20.0;
      x[k] -= step_lr * (m[k] / bc1) / (std::sqrt(v[k] / bc2) + kAdamEps);
    }
  }
}

namespace {

void check_finite(const ParamArrays& g, int iteration, uint32_t view) {
  for (Param p : kAllParams) {
    for (double v : g.get(p)) {
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << "non-finite " << to_string(p) << " gradient at iteration " << iteration
            << ", view " << view;
        throw NumericError(msg.str());
      }
    }
  }
}

void append_zeros(ParamArrays& a, size_t n) { a.resize(a.size() + n); }

}  // namespace

StepStats train_step(TrainState& st, const std::vector<TrainView>& views) {
  if (views.empty()) throw std::invalid_argument("no training views");
  const TrainConfig& cfg = st.config;
  const int it = ++st.iteration;
  if (it % cfg.sh_degree_interval == 0 && st.set.active_sh_degree < st.set.max_sh_degree) {
    ++st.set.active_sh_degree;
  }

  if (st.view_queue.empty()) {
    st.view_queue.resize(views.size());
    std::iota(st.view_queue.begin(), st.view_queue.end(), 0u);
    std::shuffle(st.view_queue.begin(), st.view_queue.end(), st.rng);
  }
  const uint32_t vid = st.view_queue.back();
  st.view_queue.pop_back();
  if (vid >= views.size()) throw std::invalid_argument("view queue refers to a missing view");
  const TrainView& view = views[vid];

  RenderConfig rc;
  rc.near_clip = cfg.near_clip;
  rc.background = cfg.background;
  if (cfg.random_background) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int c = 0; c < 3; ++c) rc.background[c] = u(st.rng);
  }

  StepStats out;
  out.iteration = it;
  out.view = vid;
  const RenderOutput r = render(st.set, view.camera, rc);
  const PhotometricLoss loss = photometric_loss(r.radiance, view.image, cfg.lambda_dssim);
  if (!std::isfinite(loss.loss)) {
    std::ostringstream msg;
    msg << "non-finite loss at iteration " << it << ", view " << vid;
    throw NumericError(msg.str());
  }
  out.loss = loss.loss;
  out.l1 = loss.l1;
  out.ssim = loss.ssim;
  out.psnr = psnr(r.radiance, view.image);

  const GradientBuffer g = backward(st.set, r, loss.grad);
  check_finite(g.grads, it, vid);

  if (it < cfg.densify_stop) {
    for (size_t i = 0; i < st.set.size(); ++i) {
      if (!g.visible[i]) continue;
      st.stats.max_radius[i] = std::max(st.stats.max_radius[i], r.state->splats[i].radius);
      st.stats.grad_accum[i] += g.screen_grad_norm[i];
      st.stats.denom[i] += 1;
    }
  }

  adam_step(st.set, st.adam, g.grads, cfg, st.extent, it);

  if (it < cfg.densify_stop) {
    if (it > cfg.densify_start && it % cfg.densify_interval == 0) {
      const double screen = it > cfg.opacity_reset_interval ? cfg.prune_screen_px : 0.0;
      densify_and_prune(st, screen);
      out.densified = true;
    }
    if (it % cfg.opacity_reset_interval == 0) {
      reset_opacity(st);
      out.opacity_reset = true;
    }
  }
  out.count = st.set.size();
  return out;
}

GaussianSet sample_split_children(const GaussianSet& set, const std::vector<size_t>& parents,
                                  std::mt19937_64& rng) {
  GaussianSet children(set.parametrization, set.max_sh_degree);
  children.active_sh_degree = set.active_sh_degree;
  for (size_t parent : parents) {
    const RawGeometry raw = set.geometry(parent);
    const DecodedGeometry g = decode(raw, set.parametrization);
    for (int c = 0; c < 2; ++c) {
      Vec3 z;
      for (int k = 0; k < 3; ++k) z[k] = std::normal_distribution<double>(0.0, g.scale[k])(rng);
      const Vec3 mean = g.rotation * z + g.mean;
      std::optional<double> hint;
      if (set.parametrization == Parametrization::Homogeneous) hint = std::exp(raw.weight);
      RawGeometry child =
          encode_from_cartesian(mean, g.scale / 1.6, raw.rotation, set.parametrization, hint);
      children.push_back(child, set.params.opacity[parent], set.sh(parent));
    }
  }
  return children;
}

DensifyReport densify_and_prune(TrainState& st, double max_screen_px) {
  const TrainConfig& cfg = st.config;
  GaussianSet& set = st.set;
  const size_t n0 = set.size();
  const double split_threshold = cfg.split_scale_fraction * st.extent;

  std::vector<size_t> clones, splits;
  for (size_t i = 0; i < n0; ++i) {
    const double grad = st.stats.denom[i] > 0 ? st.stats.grad_accum[i] / st.stats.denom[i] : 0.0;
    if (!(grad >= cfg.densify_grad_threshold)) continue;
    const DecodedGeometry g = set.decoded(i);
    if (!g.valid) continue;
    if (g.scale.maxCoeff() <= split_threshold) clones.push_back(i);
    else splits.push_back(i);
  }

  const GaussianSet children = sample_split_children(set, splits, st.rng);
  const ParamArrays snapshot = set.params;
  for (size_t i : clones) set.params.append(snapshot, i);
  for (size_t i = 0; i < children.size(); ++i) set.params.append(children.params, i);
  const size_t added = clones.size() + children.size();
  append_zeros(st.adam.m, added);
  append_zeros(st.adam.v, added);
  st.stats.max_radius.resize(set.size(), 0.0);

  std::vector<bool> keep(set.size(), true);
  for (size_t i : splits) keep[i] = false;
  size_t pruned = 0;
  const double world_limit = cfg.prune_world_extent_fraction * st.extent;
  for (size_t i = 0; i < set.size(); ++i) {
    if (!keep[i]) continue;
    bool drop = set.opacity(i) < cfg.prune_opacity;
    if (!drop && max_screen_px > 0.0) {
      drop = st.stats.max_radius[i] > max_screen_px;
      if (!drop && cfg.world_prune_enabled) {
        const DecodedGeometry g = set.decoded(i);
        drop = g.valid && g.scale.maxCoeff() > world_limit;
      }
    }
    if (drop) {
      keep[i] = false;
      ++pruned;
    }
  }
  keep_gaussians(st, keep);
  return {clones.size(), splits.size(), pruned};
}

void keep_gaussians(TrainState& st, const std::vector<bool>& keep) {
  st.set.params.keep(keep);
  st.adam.m.keep(keep);
  st.adam.v.keep(keep);
  st.stats.reset(st.set.size());
}

void reset_opacity(TrainState& st) {
  const double cap = logit(0.01);
  for (auto& o : st.set.params.opacity) o = std::min(o, cap);
  std::fill(st.adam.m.opacity.begin(), st.adam.m.opacity.end(), 0.0);
  std::fill(st.adam.v.opacity.begin(), st.adam.v.opacity.end(), 0.0);
}

}  // namespace hogs
