#pragma once

#include "hogs/camera.hpp"
#include "hogs/optim.hpp"
#include "hogs/scene.hpp"

#include <optional>
#include <string>

namespace hogs {

// ---- scene manifest -------------------------------------------------------
//
// {
//   "version": 1,
//   "point_cloud": "points.ply",
//   "views": [
//     {"name": "view_000", "image": "images/view_000.png", "depth": "depth/view_000.pfm",
//      "fx": 57.6, "fy": 57.6, "cx": 32, "cy": 32, "width": 64, "height": 64,
//      "rotation": [9 numbers, row-major, world to camera], "translation": [3 numbers]}
//   ]
// }
//
// Relative paths are resolved against the manifest's directory.

inline constexpr int kManifestVersion = 1;

struct ViewEntry {
  std::string name;
  std::string image_path;
  std::optional<std::string> depth_path;
  Camera camera;
};

struct SceneManifest {
  int version = kManifestVersion;
  std::string point_cloud_path;
  std::vector<ViewEntry> views;
  std::string base_dir;  // directory relative paths are resolved against

  std::string resolve(const std::string& path) const;
};

struct LoadedScene {
  SceneManifest manifest;
  PointCloud points;
  std::vector<Image> images;
  std::vector<std::optional<Image>> depths;
  std::vector<std::string> warnings;

  std::vector<Camera> cameras() const;
  bool has_all_depths() const;
};

/// Parse and validate a manifest. Rotations off by more than 1e-9 but within
/// 1e-6 of orthonormal are re-orthonormalized; the notes are appended to
/// `warnings` when given.
SceneManifest read_manifest(const std::string& path, std::vector<std::string>* warnings = nullptr);
void write_manifest(const SceneManifest& m, const std::string& path);

/// Manifest plus images, depth maps and (optionally) the point cloud.
LoadedScene load_manifest(const std::string& path, bool load_points = true);

// ---- point clouds ---------------------------------------------------------

/// ASCII or binary little-endian PLY with float/double x, y, z and optional
/// uchar red, green, blue. Missing colors default to 0.5.
PointCloud read_ply_points(const std::string& path);
void write_ply_points(const PointCloud& cloud, const std::string& path, bool binary = true);

/// Decode every Gaussian to Cartesian and write the common 3DGS vertex layout
/// (binary little-endian float32).
void export_3dgs_ply(const GaussianSet& set, const std::string& path);
/// Read a 3DGS-layout PLY into a Cartesian set.
GaussianSet import_3dgs_ply(const std::string& path);

// ---- images ---------------------------------------------------------------

/// 8-bit PNG to an RGB image in [0, 1]. Other bit depths are rejected.
Image read_png(const std::string& path);
/// Writes 8-bit RGB (3 channels) or gray (1 channel); values are clamped.
void write_png(const Image& img, const std::string& path);

/// PFM ("Pf" gray or "PF" color); the sign of the scale selects endianness.
/// Rows are stored bottom to top in the file.
Image read_pfm(const std::string& path);
void write_pfm(const Image& img, const std::string& path, bool little_endian = true);

// ---- checkpoints ----------------------------------------------------------

inline constexpr uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainState state;
  std::string manifest_path;
};

void save_checkpoint(const TrainState& state, const std::string& manifest_path,
                     const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace hogs
