#include "hogs/parallel.hpp"
#include "hogs/render.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace hogs;
using hogs::testing::oracle_pixel;

namespace {

Camera axis_camera(int W, int H, double f) {
  Camera cam;
  cam.fx = cam.fy = f;
  cam.width = W;
  cam.height = H;
  cam.cx = W / 2.0;
  cam.cy = H / 2.0;
  return cam;
}

void push(GaussianSet& set, const Vec3& mean, const Vec3& scale, const Vec4& q, double opacity,
          const Vec3& color) {
  const double sh[3] = {rgb_to_sh_dc(color[0]), rgb_to_sh_dc(color[1]), rgb_to_sh_dc(color[2])};
  set.push_back(encode_from_cartesian(mean, scale, q, set.parametrization), logit(opacity), sh);
}

}  // namespace

TEST_CASE("projection closed forms") {
  const Camera cam = axis_camera(32, 32, 40.0);
  RenderConfig cfg;
  cfg.dilation = 0.0;
  const double sigma = 0.3, z = 4.0;
  const Projected2D p = project_gaussian({0, 0, z}, sigma * sigma * Mat3::Identity(), cam, cfg);
  REQUIRE(p.valid);
  CHECK((p.mean - Vec2(16, 16)).norm() < 1e-14);
  const double e = std::pow(40.0 * sigma / z, 2);
  CHECK(p.cov(0, 0) == doctest::Approx(e).epsilon(1e-14));
  CHECK(p.cov(1, 1) == doctest::Approx(e).epsilon(1e-14));
  CHECK(std::abs(p.cov(0, 1)) < 1e-15);
  CHECK(p.depth == z);
  CHECK_FALSE(project_gaussian({0, 0, -1}, Mat3::Identity(), cam, cfg).valid);
  CHECK_FALSE(project_gaussian({0, 0, 0.005}, Mat3::Identity(), cam, cfg).valid);
}

TEST_CASE("empty set renders the background") {
  const RenderOutput black = render(GaussianSet(Parametrization::Cartesian, 0), axis_camera(8, 8, 8));
  CHECK(std::all_of(black.radiance.data.begin(), black.radiance.data.end(),
                    [](double v) { return v == 0.0; }));
  CHECK(std::all_of(black.alpha.data.begin(), black.alpha.data.end(),
                    [](double v) { return v == 0.0; }));
  RenderConfig cfg;
  cfg.background = Vec3(0.1, 0.2, 0.3);
  const RenderOutput bg = render(GaussianSet(Parametrization::Cartesian, 0), axis_camera(8, 8, 8), cfg);
  CHECK(bg.radiance.at(3, 5, 2) == 0.3);
}

TEST_CASE("single Gaussian renders match the scalar oracle") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    Camera cam = Camera::look_at({u(rng) - 0.5, u(rng) - 0.5, -1.0}, {0, 0, 3}, {0, -1, 0},
                                 20.0 + 10.0 * u(rng), 24, 20);
    GaussianSet set(Parametrization::Cartesian, 0);
    const Vec3 mean(u(rng) - 0.5, u(rng) - 0.5, 2.0 + 2.0 * u(rng));
    const Vec3 scale(0.05 + 0.4 * u(rng), 0.05 + 0.4 * u(rng), 0.05 + 0.4 * u(rng));
    const Vec4 q(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
    const double opacity = 0.05 + 0.94 * u(rng);
    const Vec3 color(u(rng), u(rng), u(rng));
    push(set, mean, scale, q, opacity, color);
    RenderConfig cfg;
    cfg.background = Vec3(0.2, 0.0, 0.7);
    const RenderOutput out = render(set, cam, cfg);
    for (int y = 0; y < cam.height; ++y) {
      for (int x = 0; x < cam.width; ++x) {
        for (int ch = 0; ch < 3; ++ch) {
          const double ref =
              oracle_pixel(mean, scale, q, opacity, color[ch], cfg.background[ch], cam, x, y);
          worst = std::max(worst, std::abs(out.radiance.at(x, y, ch) - ref));
        }
      }
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("opaque on-axis Gaussian at the principal point") {
  const Camera cam = axis_camera(16, 16, 16.0);
  GaussianSet set(Parametrization::Cartesian, 0);
  const Vec3 c(0.9, 0.6, 0.3);
  push(set, {0, 0, 3}, Vec3::Constant(0.5), Vec4(1, 0, 0, 0), 0.99, c);
  const RenderOutput out = render(set, cam);
  for (int ch = 0; ch < 3; ++ch) CHECK(out.radiance.at(8, 8, ch) == doctest::Approx(0.99 * c[ch]).epsilon(1e-12));
}

TEST_CASE("two stacked half-transparent Gaussians give 0.75c") {
  const Camera cam = axis_camera(16, 16, 16.0);
  GaussianSet set(Parametrization::Homogeneous, 0);
  const Vec3 c(0.8, 0.4, 0.2);
  const double z = 2.0;
  push(set, {0, 0, 2 * z}, Vec3::Constant(0.3), Vec4(1, 0, 0, 0), 0.5, c);
  push(set, {0, 0, z}, Vec3::Constant(0.3), Vec4(1, 0, 0, 0), 0.5, c);
  const RenderOutput out = render(set, cam);
  for (int ch = 0; ch < 3; ++ch) CHECK(std::abs(out.radiance.at(8, 8, ch) - 0.75 * c[ch]) <= 1e-7);
  CHECK(std::abs(out.alpha.at(8, 8) - 0.75) <= 1e-12);
  CHECK(out.depth_expected.at(8, 8) == doctest::Approx((0.5 * z + 0.25 * 2 * z) / 0.75));
}

TEST_CASE("render is invariant to the storage order") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Camera cam = axis_camera(20, 20, 20.0);
  std::vector<std::tuple<Vec3, Vec3, double, Vec3>> items;
  for (int i = 0; i < 30; ++i) {
    items.emplace_back(Vec3(u(rng) - 0.5, u(rng) - 0.5, 2 + 3 * u(rng)),
                       Vec3::Constant(0.05 + 0.2 * u(rng)), 0.2 + 0.7 * u(rng),
                       Vec3(u(rng), u(rng), u(rng)));
  }
  auto build = [&] {
    GaussianSet set(Parametrization::Homogeneous, 0);
    for (auto& [m, s, o, c] : items) push(set, m, s, Vec4(1, 0, 0, 0), o, c);
    return render(set, cam);
  };
  const RenderOutput a = build();
  std::shuffle(items.begin(), items.end(), rng);
  const RenderOutput b = build();
  CHECK(a.radiance.data == b.radiance.data);
}

TEST_CASE("camera at the origin cannot see w") {
  Camera cam = axis_camera(32, 32, 30.0);
  GaussianSet base(Parametrization::Homogeneous, 0);
  RawGeometry g;
  g.position = Vec3(0.3, -0.2, 1.0);
  g.log_scale = Vec3(std::log(0.05), std::log(0.1), std::log(0.02));
  g.rotation = Vec4(0.9, 0.1, -0.3, 0.2);
  const RenderConfig cfg;
  std::vector<Projected2D> proj;
  for (double rho : {0.0, std::log(0.1), std::log(0.01)}) {
    g.weight = rho;
    const DecodedGeometry d = decode(g, Parametrization::Homogeneous);
    proj.push_back(project_gaussian(d.mean, d.covariance, cam, cfg));
  }
  for (const auto& p : proj) {
    CHECK((p.mean - proj[0].mean).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((p.cov - proj[0].cov).cwiseAbs().maxCoeff() <= 1e-9 * proj[0].cov.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("worker count does not change the image") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  GaussianSet set(Parametrization::Cartesian, 0);
  for (int i = 0; i < 200; ++i) {
    push(set, {2 * u(rng) - 1, 2 * u(rng) - 1, 2 + 3 * u(rng)}, Vec3::Constant(0.02 + 0.1 * u(rng)),
         Vec4(1, u(rng), u(rng), 0), 0.3 + 0.6 * u(rng), {u(rng), u(rng), u(rng)});
  }
  const Camera cam = axis_camera(40, 36, 30.0);
  const int saved = thread_count();
  set_thread_count(1);
  const RenderOutput a = render(set, cam);
  set_thread_count(4);
  const RenderOutput b = render(set, cam);
  set_thread_count(saved);
  CHECK(a.radiance.data == b.radiance.data);
  CHECK(a.depth_expected.data == b.depth_expected.data);
}

TEST_CASE("invalid Gaussians are skipped") {
  const Camera cam = axis_camera(8, 8, 8.0);
  GaussianSet set(Parametrization::Homogeneous, 0);
  RawGeometry g;
  g.position = Vec3(0, 0, 1);
  g.weight = -900.0;  // exp overflow when decoding
  const double sh[3] = {0, 0, 0};
  set.push_back(g, 0.0, sh);
  const RenderOutput out = render(set, cam);
  CHECK(std::all_of(out.alpha.data.begin(), out.alpha.data.end(), [](double v) { return v == 0.0; }));
  CHECK_FALSE(out.state->splats[0].visible);
}
