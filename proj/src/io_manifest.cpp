#include "hogs/io.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>

namespace hogs {

namespace fs = std::filesystem;
using nlohmann::json;

std::string SceneManifest::resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

std::vector<Camera> LoadedScene::cameras() const {
  std::vector<Camera> out;
  for (const auto& v : manifest.views) out.push_back(v.camera);
  return out;
}

bool LoadedScene::has_all_depths() const {
  return std::all_of(depths.begin(), depths.end(), [](const auto& d) { return d.has_value(); });
}

namespace {

double number(const json& v, const std::string& key, const std::string& where) {
  if (!v.contains(key) || !v.at(key).is_number()) {
    throw DataError(where + ": missing numeric field '" + key + "'");
  }
  return v.at(key).get<double>();
}

std::vector<double> numbers(const json& v, const std::string& key, size_t n,
                            const std::string& where) {
  if (!v.contains(key) || !v.at(key).is_array() || v.at(key).size() != n) {
    throw DataError(where + ": field '" + key + "' must be an array of " + std::to_string(n) +
                    " numbers");
  }
  std::vector<double> out;
  for (const auto& x : v.at(key)) {
    if (!x.is_number()) throw DataError(where + ": field '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string text(const json& v, const std::string& key, const std::string& where) {
  if (!v.contains(key) || !v.at(key).is_string()) {
    throw DataError(where + ": missing string field '" + key + "'");
  }
  return v.at(key).get<std::string>();
}

}  // namespace

SceneManifest read_manifest(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path);
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("manifest " + path + " is not valid JSON");

  SceneManifest m;
  m.base_dir = fs::path(path).parent_path().string();
  m.version = static_cast<int>(number(j, "version", "manifest"));
  if (m.version != kManifestVersion) {
    throw DataError("unsupported manifest version " + std::to_string(m.version));
  }
  m.point_cloud_path = text(j, "point_cloud", "manifest");
  if (!j.contains("views") || !j.at("views").is_array()) {
    throw DataError("manifest: 'views' must be an array");
  }
  size_t idx = 0;
  for (const auto& v : j.at("views")) {
    const std::string where = "view " + std::to_string(idx);
    ViewEntry e;
    e.name = v.contains("name") ? text(v, "name", where) : "view_" + std::to_string(idx);
    e.image_path = text(v, "image", where);
    if (v.contains("depth") && !v.at("depth").is_null()) e.depth_path = text(v, "depth", where);
    Camera& c = e.camera;
    c.fx = number(v, "fx", where);
    c.fy = number(v, "fy", where);
    c.cx = number(v, "cx", where);
    c.cy = number(v, "cy", where);
    c.width = static_cast<int>(number(v, "width", where));
    c.height = static_cast<int>(number(v, "height", where));
    if (!(c.fx > 0) || !(c.fy > 0) || c.width <= 0 || c.height <= 0) {
      throw DataError(where + ": intrinsics and image size must be positive");
    }
    const auto r = numbers(v, "rotation", 9, where);
    const auto t = numbers(v, "translation", 3, where);
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) c.rotation(row, col) = r[3 * row + col];
    }
    c.translation = Vec3(t[0], t[1], t[2]);
    const double err = (c.rotation * c.rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det_err = std::abs(c.rotation.determinant() - 1.0);
    if (err > 1e-6 || det_err > 1e-6) {
      throw DataError(where + ": rotation is not orthonormal");
    }
    if (err > 1e-12 || det_err > 1e-12) {
      c.rotation = orthonormalize(c.rotation);
      if (warnings) warnings->push_back(where + ": rotation re-orthonormalized");
    }
    m.views.push_back(std::move(e));
    ++idx;
  }
  return m;
}

void write_manifest(const SceneManifest& m, const std::string& path) {
  json j;
  j["version"] = m.version;
  j["point_cloud"] = m.point_cloud_path;
  j["views"] = json::array();
  for (const auto& e : m.views) {
    const Camera& c = e.camera;
    json v;
    v["name"] = e.name;
    v["image"] = e.image_path;
    if (e.depth_path) v["depth"] = *e.depth_path;
    v["fx"] = c.fx;
    v["fy"] = c.fy;
    v["cx"] = c.cx;
    v["cy"] = c.cy;
    v["width"] = c.width;
    v["height"] = c.height;
    json r = json::array();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 3; ++col) r.push_back(c.rotation(row, col));
    }
    v["rotation"] = r;
    v["translation"] = {c.translation[0], c.translation[1], c.translation[2]};
    j["views"].push_back(v);
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

LoadedScene load_manifest(const std::string& path, bool load_points) {
  LoadedScene s;
  s.manifest = read_manifest(path, &s.warnings);
  if (load_points) s.points = read_ply_points(s.manifest.resolve(s.manifest.point_cloud_path));
  for (const auto& v : s.manifest.views) {
    Image img = read_png(s.manifest.resolve(v.image_path));
    if (img.width != v.camera.width || img.height != v.camera.height) {
      throw DataError("image " + v.image_path + " does not match the camera size");
    }
    s.images.push_back(std::move(img));
    if (!v.depth_path) {
      s.warnings.push_back(v.name + ": no depth map; near/far evaluation unavailable");
      s.depths.emplace_back();
      continue;
    }
    Image d = read_pfm(s.manifest.resolve(*v.depth_path));
    if (d.channels != 1) throw DataError("depth map " + *v.depth_path + " must be single-channel");
    if (d.width != v.camera.width || d.height != v.camera.height) {
      throw DataError("depth map " + *v.depth_path + " does not match the camera size");
    }
    s.depths.emplace_back(std::move(d));
  }
  return s;
}

}  // namespace hogs
