#include "hogs/config.hpp"
#include "hogs/fixtures.hpp"
#include "hogs/io.hpp"
#include "support/temp_dir.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace hogs;
using namespace hogs::testing;

namespace {

Camera small_camera() { return Camera::look_at({0, 0, -3}, {0, 0, 0}, {0, -1, 0}, 8.0, 6, 4); }

void write_one_view(const fs::path& dir, const std::string& rotation_json, bool depth) {
  Image img(6, 4, 3);
  for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = (i % 7) / 6.0;
  write_png(img, (dir / "a.png").string());
  if (depth) {
    Image d(6, 4, 1);
    for (auto& v : d.data) v = 2.0;
    write_pfm(d, (dir / "a.pfm").string());
  }
  write_text(dir / "points.ply",
             "ply\nformat ascii 1.0\nelement vertex 1\nproperty float x\nproperty float y\n"
             "property float z\nend_header\n0 0 0\n");
  std::string view = R"({"name": "a", "image": "a.png", "fx": 8, "fy": 8, "cx": 3, "cy": 2,
      "width": 6, "height": 4, "rotation": )" + rotation_json + R"(, "translation": [0, 0, 3])";
  if (depth) view += R"(, "depth": "a.pfm")";
  write_text(dir / "manifest.json",
             R"({"version": 1, "point_cloud": "points.ply", "views": [)" + view + "}]}");
}

}  // namespace

TEST_CASE("one-view manifest") {
  const fs::path dir = temp_dir("manifest_one");
  write_one_view(dir, "[1, 0, 0, 0, 1, 0, 0, 0, 1]", true);
  const LoadedScene s = load_manifest((dir / "manifest.json").string());
  REQUIRE(s.cameras().size() == 1);
  CHECK(s.images[0].width == 6);
  CHECK(s.images[0].height == 4);
  CHECK(s.has_all_depths());
  CHECK(s.warnings.empty());
  CHECK(s.points.size() == 1);
}

TEST_CASE("slightly skewed rotation is repaired, badly skewed is rejected") {
  const fs::path dir = temp_dir("manifest_skew");
  write_one_view(dir, "[1.0000001, 0, 0, 0, 1, 0, 0, 0, 1]", true);
  const LoadedScene s = load_manifest((dir / "manifest.json").string());
  CHECK(s.warnings.size() == 1);
  CHECK((s.cameras()[0].rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  write_one_view(dir, "[1.01, 0, 0, 0, 1, 0, 0, 0, 1]", true);
  CHECK_THROWS_AS(load_manifest((dir / "manifest.json").string()), DataError);
}

TEST_CASE("missing depth map is a warning") {
  const fs::path dir = temp_dir("manifest_nodepth");
  write_one_view(dir, "[1, 0, 0, 0, 1, 0, 0, 0, 1]", false);
  const LoadedScene s = load_manifest((dir / "manifest.json").string());
  CHECK_FALSE(s.has_all_depths());
  REQUIRE(s.warnings.size() == 1);
  CHECK(s.warnings[0].find("depth") != std::string::npos);
}

TEST_CASE("malformed manifests") {
  const fs::path dir = temp_dir("manifest_bad");
  write_text(dir / "m.json", "{not json");
  CHECK_THROWS_AS(read_manifest((dir / "m.json").string()), DataError);
  write_text(dir / "m.json", R"({"version": 9, "point_cloud": "p.ply", "views": []})");
  CHECK_THROWS_AS(read_manifest((dir / "m.json").string()), DataError);
  write_text(dir / "m.json", R"({"version": 1, "point_cloud": "p.ply", "views": [{"name": "v"}]})");
  CHECK_THROWS_AS(read_manifest((dir / "m.json").string()), DataError);
  CHECK_THROWS_AS(read_manifest((dir / "absent.json").string()), DataError);
}

TEST_CASE("manifest write and read") {
  const fs::path dir = temp_dir("manifest_rt");
  SceneManifest m;
  m.point_cloud_path = "p.ply";
  ViewEntry v;
  v.name = "x";
  v.image_path = "x.png";
  v.camera = small_camera();
  m.views.push_back(v);
  write_manifest(m, (dir / "m.json").string());
  const SceneManifest back = read_manifest((dir / "m.json").string());
  REQUIRE(back.views.size() == 1);
  CHECK((back.views[0].camera.rotation - v.camera.rotation).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(back.views[0].camera.translation == v.camera.translation);
  CHECK_FALSE(back.views[0].depth_path);
}

TEST_CASE("PLY point clouds") {
  const fs::path dir = temp_dir("ply");
  write_text(dir / "a.ply",
             "ply\nformat ascii 1.0\ncomment three points\nelement vertex 3\nproperty float x\n"
             "property float y\nproperty float z\nproperty uchar red\nproperty uchar green\n"
             "property uchar blue\nend_header\n1 2 3 255 0 0\n-1.5 0.25 8 0 255 0\n0 0 -4 0 0 255\n");
  const PointCloud a = read_ply_points((dir / "a.ply").string());
  REQUIRE(a.size() == 3);
  CHECK(a.positions[1] == Vec3(-1.5, 0.25, 8));
  CHECK(a.colors[2] == Vec3(0, 0, 1));

  write_text(dir / "b.ply",
             "ply\nformat ascii 1.0\nelement vertex 2\nproperty double x\nproperty double y\n"
             "property double z\nend_header\n1 2 3\n4 5 6\n");
  const PointCloud b = read_ply_points((dir / "b.ply").string());
  for (const auto& c : b.colors) CHECK(c == Vec3(0.5, 0.5, 0.5));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<float> u(-100.f, 100.f);
  PointCloud big;
  for (int i = 0; i < 100000; ++i) {
    big.positions.emplace_back(u(rng), u(rng), u(rng));
    big.colors.emplace_back((i % 256) / 255.0, ((i * 7) % 256) / 255.0, ((i * 13) % 256) / 255.0);
  }
  write_ply_points(big, (dir / "big.ply").string());
  const PointCloud back = read_ply_points((dir / "big.ply").string());
  CHECK(back.positions == big.positions);
  CHECK(back.colors == big.colors);

  write_text(dir / "faces.ply",
             "ply\nformat ascii 1.0\nelement face 1\nproperty list uchar int vertex_indices\n"
             "element vertex 1\nproperty float x\nproperty float y\nproperty float z\nend_header\n"
             "3 0 0 0\n0 0 0\n");
  CHECK_THROWS_WITH_AS(read_ply_points((dir / "faces.ply").string()),
                       doctest::Contains("face"), DataError);
  write_text(dir / "be.ply", "ply\nformat binary_big_endian 1.0\nelement vertex 0\nend_header\n");
  CHECK_THROWS_AS(read_ply_points((dir / "be.ply").string()), DataError);
  write_text(dir / "short.ply",
             "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\nproperty float y\n"
             "property float z\nend_header\n1 2 3\n");
  CHECK_THROWS_AS(read_ply_points((dir / "short.ply").string()), DataError);
}

TEST_CASE("3DGS export") {
  const fs::path dir = temp_dir("export");
  GaussianSet set(Parametrization::Homogeneous, 1);
  const double sh[12] = {0.1, 0.2, 0.3, 0.01, 0.02, 0.03, -0.01, -0.02, -0.03, 0.04, 0.05, 0.06};
  set.push_back(encode_from_cartesian({1, 2, 3}, Vec3(0.1, 0.2, 0.3), Vec4(0.9, 0.1, 0.2, 0.3),
                                      Parametrization::Homogeneous, 0.25),
                0.7, sh);
  export_3dgs_ply(set, (dir / "a.ply").string());
  const GaussianSet imported = import_3dgs_ply((dir / "a.ply").string());
  REQUIRE(imported.size() == 1);
  CHECK((imported.decoded(0).mean - Vec3(1, 2, 3)).norm() < 1e-6);
  CHECK((imported.decoded(0).scale - Vec3(0.1, 0.2, 0.3)).norm() < 1e-6);
  CHECK(imported.max_sh_degree == 1);
  CHECK(std::abs(imported.sh(0)[4] - 0.02) < 1e-7);
  export_3dgs_ply(imported, (dir / "b.ply").string());
  export_3dgs_ply(import_3dgs_ply((dir / "b.ply").string()), (dir / "c.ply").string());
  CHECK(read_bytes(dir / "b.ply") == read_bytes(dir / "c.ply"));

  export_3dgs_ply(GaussianSet(Parametrization::Cartesian, 0), (dir / "empty.ply").string());
  CHECK(import_3dgs_ply((dir / "empty.ply").string()).size() == 0);
}

TEST_CASE("PNG and PFM") {
  const fs::path dir = temp_dir("images");
  Image rgb(5, 3, 3);
  for (size_t i = 0; i < rgb.data.size(); ++i) rgb.data[i] = static_cast<double>(i * 17 % 256) / 255.0;
  write_png(rgb, (dir / "a.png").string());
  const Image back = read_png((dir / "a.png").string());
  REQUIRE(back.same_shape(rgb));
  for (size_t i = 0; i < rgb.data.size(); ++i) CHECK(back.data[i] == doctest::Approx(rgb.data[i]).epsilon(1e-12));
  write_text(dir / "junk.png", "not a png");
  CHECK_THROWS_AS(read_png((dir / "junk.png").string()), DataError);

  Image d(4, 3, 1);
  for (size_t i = 0; i < d.data.size(); ++i) d.data[i] = 0.5 * static_cast<double>(i) + 0.25;
  for (bool le : {true, false}) {
    write_pfm(d, (dir / "d.pfm").string(), le);
    const Image r = read_pfm((dir / "d.pfm").string());
    CHECK(r.data == d.data);
  }
  // Rows are bottom-up and the negative scale marks little endian.
  write_pfm(d, (dir / "d.pfm").string(), true);
  const std::string bytes = read_bytes(dir / "d.pfm");
  CHECK(bytes.substr(0, 12) == "Pf\n4 3\n-1.0\n");
  float first;
  std::memcpy(&first, bytes.data() + 12, 4);
  CHECK(first == static_cast<float>(d.at(0, 2)));

  write_text(dir / "bad.pfm", "P6\n1 1\n-1\n");
  CHECK_THROWS_AS(read_pfm((dir / "bad.pfm").string()), DataError);
  write_text(dir / "short.pfm", "Pf\n4 3\n-1.0\nabc");
  CHECK_THROWS_AS(read_pfm((dir / "short.pfm").string()), DataError);
}

TEST_CASE("config JSON") {
  TrainConfig cfg = TrainConfig::defaults_for(Parametrization::Cartesian);
  cfg.lr_w_multiplier = 20.0;
  cfg.background = Vec3(0.1, 0.2, 0.3);
  const TrainConfig back = config_from_json(config_to_json(cfg), TrainConfig{});
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"lr_mu", 1.0}}, TrainConfig{}),
                       doctest::Contains("lr_mu_init"), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"iterations", "many"}}, TrainConfig{}),
                  std::invalid_argument);
  apply_override(cfg, "w_init=0.01");
  CHECK(cfg.w_init == "0.01");
  apply_override(cfg, "parametrization=homogeneous");
  CHECK_FALSE(cfg.world_prune_enabled);
  apply_override(cfg, "world_prune_enabled=true");
  CHECK(cfg.world_prune_enabled);
  CHECK_THROWS_AS(apply_override(cfg, "no_equals_sign"), std::invalid_argument);
}

TEST_CASE("checkpoints") {
  const fs::path dir = temp_dir("checkpoint");
  const SyntheticScene scene = generate_scene(SyntheticSceneSpec::small(3));
  TrainConfig cfg = TrainConfig::defaults_for(Parametrization::Homogeneous);
  cfg.densify_start = 4;
  cfg.densify_interval = 5;
  cfg.densify_grad_threshold = 1e-5;
  cfg.opacity_reset_interval = 12;
  cfg.max_sh_degree = 1;
  cfg.sh_degree_interval = 8;
  const auto views = make_views(scene, scene.split.train);
  std::vector<Camera> cams;
  for (const auto& v : views) cams.push_back(v.camera);
  InitConfig init;
  init.max_sh_degree = 1;
  TrainState a = make_train_state(init_from_points(scene.init_points, cfg.parametrization, init), cams, cfg);
  for (int i = 0; i < 10; ++i) train_step(a, views);

  save_checkpoint(a, "somewhere/manifest.json", (dir / "k.hgsc").string());
  Checkpoint ck = load_checkpoint((dir / "k.hgsc").string());
  CHECK(ck.manifest_path == "somewhere/manifest.json");
  CHECK(ck.state.iteration == 10);
  CHECK(ck.state.rng == a.rng);
  CHECK(ck.state.view_queue == a.view_queue);
  for (Param p : kAllParams) {
    CHECK(ck.state.set.params.get(p) == a.set.params.get(p));
    CHECK(ck.state.adam.m.get(p) == a.adam.m.get(p));
    CHECK(ck.state.adam.v.get(p) == a.adam.v.get(p));
  }

  // Resume and continue for 10 more iterations next to the original run.
  TrainState& b = ck.state;
  for (int i = 0; i < 10; ++i) {
    train_step(a, views);
    train_step(b, views);
  }
  CHECK(a.set.size() == b.set.size());
  for (Param p : kAllParams) CHECK(a.set.params.get(p) == b.set.params.get(p));

  std::string bytes = read_bytes(dir / "k.hgsc");
  bytes[4] = 7;
  write_text(dir / "v.hgsc", bytes);
  CHECK_THROWS_WITH_AS(load_checkpoint((dir / "v.hgsc").string()), doctest::Contains("version"),
                       DataError);
  write_text(dir / "t.hgsc", read_bytes(dir / "k.hgsc").substr(0, 200));
  CHECK_THROWS_AS(load_checkpoint((dir / "t.hgsc").string()), DataError);
  write_text(dir / "m.hgsc", "XXXX");
  CHECK_THROWS_AS(load_checkpoint((dir / "m.hgsc").string()), DataError);
}
