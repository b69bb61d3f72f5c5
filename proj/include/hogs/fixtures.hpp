#pragma once

// Deterministic synthetic "unbounded" scene: a small cluster of Gaussians a
// few units in front of a ring of cameras and a sparse shell of large
// Gaussians two orders of magnitude further away behind it.

#include "hogs/eval.hpp"
#include "hogs/io.hpp"
#include "hogs/render.hpp"

namespace hogs {

struct SyntheticSceneSpec {
  uint64_t seed = 7;

  size_t near_count = 150;
  Vec3 near_center{0.0, 5.0, 0.0};
  double near_radius = 1.0;  // cluster extent
  double near_scale = 0.1;
  double near_opacity = 0.8;

  size_t far_count = 1200;
  double far_distance = 500.0;
  double far_scale = 10.0;
  double far_opacity = 0.9;
  double far_azimuth_halfwidth = 1.05;    // radians around the near-cluster direction
  double far_elevation_halfwidth = 0.6;   // radians

  size_t camera_count = 18;
  double ring_radius = 2.0;
  double ring_height_jitter = 0.2;
  int width = 64;
  int height = 64;
  double focal = 57.6;

  // Initial point cloud noise.
  double near_position_noise = 0.03;
  double far_angle_noise = 0.02;       // radians
  double far_depth_log_noise = 0.1;    // std of log(distance)
  double color_noise = 0.05;

  /// Test views are those with index divisible by this (2 of 18 by default).
  size_t test_every = 9;

  /// 32x32, 10 views, fewer Gaussians: quick smoke runs.
  static SyntheticSceneSpec small(uint64_t seed);
};

struct SyntheticScene {
  SyntheticSceneSpec spec;
  GaussianSet ground_truth;  // Cartesian, SH degree 0
  size_t near_count = 0;     // ground_truth[0, near_count) is the near cluster
  std::vector<Camera> cameras;
  std::vector<Image> images;  // rendered ground truth, black background
  std::vector<Image> depths;  // expected depth of the ground-truth render
  PointCloud init_points;     // noisy samples of the ground-truth means
  TrainTestSplit split;
};

/// Throws std::runtime_error if a camera fails to see both near and far
/// content.
SyntheticScene generate_scene(const SyntheticSceneSpec& spec);

/// Writes manifest.json, points.ply, images/*.png and depth/*.pfm into `dir`
/// and returns the manifest path.
std::string write_scene(const SyntheticScene& scene, const std::string& dir);

std::vector<TrainView> make_views(const SyntheticScene& scene, const std::vector<size_t>& indices);

}  // namespace hogs
