#include "hogs/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

namespace hogs {

namespace {

Vec4 random_rotation(std::mt19937_64& rng) {
  Vec4 q;
  for (int k = 0; k < 4; ++k) q[k] = std::normal_distribution<double>(0.0, 1.0)(rng);
  return q.normalized();
}

double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

double normal(std::mt19937_64& rng, double sigma) {
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

Vec3 direction(double azimuth, double elevation) {
  return Vec3(std::sin(azimuth) * std::cos(elevation), std::cos(azimuth) * std::cos(elevation),
              std::sin(elevation));
}

void push_gaussian(GaussianSet& set, const Vec3& mean, const Vec3& scale, const Vec4& rot,
                   double opacity, const Vec3& color) {
  const double sh[3] = {rgb_to_sh_dc(color[0]), rgb_to_sh_dc(color[1]), rgb_to_sh_dc(color[2])};
  set.push_back(encode_from_cartesian(mean, scale, rot, Parametrization::Cartesian), logit(opacity),
                sh);
}

double max_alpha(const GaussianSet& set, const Camera& cam) {
  const RenderOutput r = render(set, cam);
  return *std::max_element(r.alpha.data.begin(), r.alpha.data.end());
}

}  // namespace

SyntheticSceneSpec SyntheticSceneSpec::small(uint64_t seed) {
  SyntheticSceneSpec spec;
  spec.seed = seed;
  spec.near_count = 40;
  spec.far_count = 300;
  spec.far_scale = 20.0;
  spec.camera_count = 10;
  spec.width = spec.height = 32;
  spec.focal = 28.8;
  spec.test_every = 8;
  return spec;
}

SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
  SyntheticScene s;
  s.spec = spec;
  std::mt19937_64 rng(spec.seed);
  s.ground_truth = GaussianSet(Parametrization::Cartesian, 0);
  GaussianSet near_only(Parametrization::Cartesian, 0), far_only(Parametrization::Cartesian, 0);

  std::vector<Vec3> colors;
  for (size_t i = 0; i < spec.near_count; ++i) {
    Vec3 offset;
    do {
      offset = Vec3(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    } while (offset.squaredNorm() > 1.0);
    const Vec3 mean = spec.near_center + spec.near_radius * offset;
    const Vec3 scale = spec.near_scale * Vec3(uniform(rng, 0.7, 1.4), uniform(rng, 0.7, 1.4),
                                              uniform(rng, 0.7, 1.4));
    const Vec3 color(uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 0.9), uniform(rng, 0.1, 0.9));
    const Vec4 rot = random_rotation(rng);
    push_gaussian(s.ground_truth, mean, scale, rot, spec.near_opacity, color);
    push_gaussian(near_only, mean, scale, rot, spec.near_opacity, color);
    colors.push_back(color);
  }
  s.near_count = spec.near_count;

  const Vec3 toward = spec.near_center.normalized();
  const double base_azimuth = std::atan2(toward.x(), toward.y());
  std::vector<std::pair<double, double>> far_angles;
  for (size_t i = 0; i < spec.far_count; ++i) {
    const double a = uniform(rng, -spec.far_azimuth_halfwidth, spec.far_azimuth_halfwidth);
    const double e = uniform(rng, -spec.far_elevation_halfwidth, spec.far_elevation_halfwidth);
    const Vec3 mean = spec.far_distance * direction(base_azimuth + a, e);
    const Vec3 scale = spec.far_scale * Vec3(uniform(rng, 0.8, 1.3), uniform(rng, 0.8, 1.3),
                                             uniform(rng, 0.8, 1.3));
    // Smooth sky-like gradient with per-Gaussian variation.
    Vec3 color(0.35 + 0.25 * std::sin(3.0 * a), 0.5 + 0.25 * std::cos(4.0 * e), 0.75);
    for (int c = 0; c < 3; ++c) color[c] = std::clamp(color[c] + normal(rng, 0.08), 0.05, 0.95);
    const Vec4 rot = random_rotation(rng);
    push_gaussian(s.ground_truth, mean, scale, rot, spec.far_opacity, color);
    push_gaussian(far_only, mean, scale, rot, spec.far_opacity, color);
    colors.push_back(color);
    far_angles.emplace_back(base_azimuth + a, e);
  }

  for (size_t k = 0; k < spec.camera_count; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(std::max<size_t>(spec.camera_count, 1));
    const Vec3 eye(spec.ring_radius * std::cos(t), spec.ring_radius * std::sin(t),
                   spec.ring_height_jitter * std::sin(3.0 * t));
    Camera cam = Camera::look_at(eye, spec.near_center, Vec3(0, 0, 1), spec.focal, spec.width,
                                 spec.height);
    if (spec.near_count > 0 && max_alpha(near_only, cam) < 0.5) {
      throw std::runtime_error("synthetic camera " + std::to_string(k) + " misses the near cluster");
    }
    if (spec.far_count > 0 && max_alpha(far_only, cam) < 0.5) {
      throw std::runtime_error("synthetic camera " + std::to_string(k) + " misses the far shell");
    }
    const RenderOutput r = render(s.ground_truth, cam);
    s.cameras.push_back(cam);
    s.images.push_back(r.radiance);
    s.depths.push_back(r.depth_expected);
  }

  for (size_t i = 0; i < s.ground_truth.size(); ++i) {
    const Vec3 mean = s.ground_truth.decoded(i).mean;
    Vec3 p;
    if (i < spec.near_count) {
      p = mean + Vec3(normal(rng, spec.near_position_noise), normal(rng, spec.near_position_noise),
                      normal(rng, spec.near_position_noise));
    } else {
      const auto [a, e] = far_angles[i - spec.near_count];
      const double da = normal(rng, spec.far_angle_noise);
      const double de = normal(rng, spec.far_angle_noise);
      const double d = mean.norm() * std::exp(normal(rng, spec.far_depth_log_noise));
      p = d * direction(a + da, e + de);
    }
    Vec3 c = colors[i];
    for (int k = 0; k < 3; ++k) c[k] = std::clamp(c[k] + normal(rng, spec.color_noise), 0.0, 1.0);
    s.init_points.positions.push_back(p);
    s.init_points.colors.push_back(c);
  }
  s.split = split_train_test(spec.camera_count, spec.test_every);
  return s;
}

std::string write_scene(const SyntheticScene& scene, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "images");
  fs::create_directories(fs::path(dir) / "depth");
  SceneManifest m;
  m.point_cloud_path = "points.ply";
  write_ply_points(scene.init_points, (fs::path(dir) / "points.ply").string());
  for (size_t k = 0; k < scene.cameras.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "view_%03zu", k);
    ViewEntry e;
    e.name = name;
    e.image_path = "images/" + e.name + ".png";
    e.depth_path = "depth/" + e.name + ".pfm";
    e.camera = scene.cameras[k];
    write_png(scene.images[k], (fs::path(dir) / e.image_path).string());
    write_pfm(scene.depths[k], (fs::path(dir) / *e.depth_path).string());
    m.views.push_back(std::move(e));
  }
  const std::string path = (fs::path(dir) / "manifest.json").string();
  write_manifest(m, path);
  return path;
}

std::vector<TrainView> make_views(const SyntheticScene& scene, const std::vector<size_t>& indices) {
  std::vector<TrainView> out;
  for (size_t i : indices) {
    out.push_back({scene.cameras.at(i), scene.images.at(i), "view_" + std::to_string(i)});
  }
  return out;
}

}  // namespace hogs
