#include "hogs/metrics.hpp"
#include "support/oracles.hpp"

#include <doctest.h>

#include <random>

using namespace hogs;
using namespace hogs::testing;

namespace {

Image random_image(int w, int h, std::mt19937_64& rng) {
  Image img(w, h, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : img.data) v = u(rng);
  return img;
}

Image perturbed(const Image& src, double sigma, std::mt19937_64& rng) {
  Image out = src;
  std::normal_distribution<double> n(0.0, sigma);
  for (auto& v : out.data) v = std::clamp(v + n(rng), 0.0, 1.0);
  return out;
}

}  // namespace

TEST_CASE("identical images") {
  std::mt19937_64 rng(1);
  const Image a = random_image(16, 12, rng);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("PSNR formula") {
  Image a(4, 4, 3), b(4, 4, 3);
  for (auto& v : b.data) v = 0.1;  // MSE = 0.01
  CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(a, Image(3, 4, 3)), std::invalid_argument);
}

TEST_CASE("SSIM and PSNR against the direct reference") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 4; ++t) {
    const Image a = random_image(32, 32, rng);
    const Image b = perturbed(a, 0.1, rng);
    CHECK(std::abs(ssim(a, b) - reference_ssim(a, b)) <= 1e-6);
    CHECK(std::abs(psnr(a, b) - reference_psnr(a, b)) <= 1e-4);
  }
  const Image a = random_image(20, 14, rng);
  const Image b = perturbed(a, 0.2, rng);
  Image mask(20, 14, 1);
  for (int y = 0; y < 14; ++y)
    for (int x = 0; x < 20; ++x) mask.at(x, y) = (x + 2 * y) % 3 == 0 ? 1.0 : 0.0;
  CHECK(std::abs(ssim(a, b, &mask) - reference_ssim(a, b, &mask)) <= 1e-6);
  CHECK(std::abs(psnr(a, b, &mask) - reference_psnr(a, b, &mask)) <= 1e-4);
}

TEST_CASE("photometric loss") {
  Image gt(16, 16, 3);
  for (auto& v : gt.data) v = 0.5;
  CHECK(photometric_loss(gt, gt, 0.2).loss == doctest::Approx(0.0).epsilon(1e-12));
  Image shifted = gt;
  for (auto& v : shifted.data) v += 0.1;
  const PhotometricLoss l = photometric_loss(shifted, gt, 0.2);
  CHECK(l.l1 == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(l.loss - 0.2 * (1.0 - l.ssim) == doctest::Approx(0.1 * 0.8).epsilon(1e-12));
  CHECK_THROWS_AS(photometric_loss(gt, Image(16, 15, 3), 0.2), std::invalid_argument);
}

TEST_CASE("SSIM gradient matches finite differences") {
  std::mt19937_64 rng(3);
  const Image a = random_image(12, 10, rng);
  const Image b = perturbed(a, 0.15, rng);
  Image grad;
  const double base = ssim_with_gradient(a, b, grad);
  CHECK(base == doctest::Approx(ssim(a, b)).epsilon(1e-12));
  const double h = 1e-6;
  for (size_t i : {size_t{0}, size_t{17}, size_t{151}, a.data.size() - 1}) {
    Image up = a, dn = a;
    up.data[i] += h;
    dn.data[i] -= h;
    CHECK(grad.data[i] == doctest::Approx((ssim(up, b) - ssim(dn, b)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("photometric loss gradient matches finite differences") {
  std::mt19937_64 rng(4);
  const Image gt = random_image(10, 9, rng);
  const Image pred = perturbed(gt, 0.2, rng);
  const PhotometricLoss l = photometric_loss(pred, gt, 0.2);
  const double h = 1e-7;
  for (size_t i : {size_t{3}, size_t{40}, size_t{200}}) {
    Image up = pred, dn = pred;
    up.data[i] += h;
    dn.data[i] -= h;
    const double fd = (photometric_loss(up, gt, 0.2).loss - photometric_loss(dn, gt, 0.2).loss) / (2 * h);
    CHECK(l.grad.data[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}
