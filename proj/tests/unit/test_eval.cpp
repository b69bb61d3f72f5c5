#include "hogs/eval.hpp"
#include "hogs/metrics.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace hogs;

namespace {

Image ramp(int w, int h) {
  Image d(w, h, 1);
  const double n = static_cast<double>(w * h - 1);
  for (size_t i = 0; i < d.data.size(); ++i) d.data[i] = static_cast<double>(i) / n;
  return d;
}

}  // namespace

TEST_CASE("every eighth view is held out") {
  const TrainTestSplit s16 = split_train_test(16);
  CHECK(s16.test == std::vector<size_t>{0, 8});
  CHECK(s16.train.size() == 14);
  CHECK_FALSE(s16.warning);

  const TrainTestSplit s1 = split_train_test(1);
  CHECK(s1.test == std::vector<size_t>{0});
  CHECK(s1.train.empty());
  CHECK(s1.warning);

  CHECK(split_train_test(24).test.size() == 3);
}

TEST_CASE("far masks from depth quantiles") {
  Image flat(8, 8, 1);
  for (auto& v : flat.data) v = 3.0;
  const auto all = compute_far_masks({flat});
  CHECK(all[0].far_count() == 64);

  const auto m95 = compute_far_masks({ramp(20, 20)}, 95.0);
  CHECK(std::abs(static_cast<double>(m95[0].far_count()) - 20.0) <= 1.0);

  const size_t c93 = compute_far_masks({ramp(20, 20)}, 93.0)[0].far_count();
  const size_t c97 = compute_far_masks({ramp(20, 20)}, 97.0)[0].far_count();
  CHECK(c97 < m95[0].far_count());
  CHECK(m95[0].far_count() < c93);

  Image bad(4, 4, 1);
  for (auto& v : bad.data) v = std::nan("");
  CHECK_THROWS_AS(compute_far_masks({ramp(4, 4), bad}), DataError);

  const Image near = near_mask(m95[0]);
  for (size_t i = 0; i < near.data.size(); ++i) CHECK(near.data[i] + m95[0].far_mask.data[i] == 1.0);
}

TEST_CASE("quantile interpolates linearly") {
  CHECK(quantile({4, 1, 3, 2}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  CHECK(quantile({7}, 0.3) == 7.0);
}

TEST_CASE("metric report") {
  Image gt(12, 12, 3);
  for (auto& v : gt.data) v = 0.4;
  const auto masks = compute_far_masks({ramp(12, 12)});
  MetricReport r;
  r.views.push_back(evaluate_view(gt, gt, &masks[0]));
  r.views.back().view_id = "a";
  Image off = gt;
  for (auto& v : off.data) v = 0.5;
  r.views.push_back(evaluate_view(off, gt, nullptr));
  r.views.back().view_id = "b";
  CHECK(r.views[0].psnr == kPsnrCap);
  CHECK(r.views[0].ssim == doctest::Approx(1.0));
  CHECK(std::isnan(r.views[1].psnr_far));
  CHECK(r.views[1].psnr == doctest::Approx(20.0));
  const ViewMetrics mean = r.mean();
  CHECK(mean.psnr == doctest::Approx(60.0));
  CHECK(mean.psnr_far == kPsnrCap);

  std::ostringstream out;
  write_metric_csv(r, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "view_id,split,psnr,ssim,psnr_near,ssim_near,psnr_far,ssim_far,lpips");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "n/a");
  }
  CHECK(rows == 3);
}

TEST_CASE("telemetry snapshot") {
  GaussianSet set(Parametrization::Homogeneous, 0);
  const double sh[3] = {0, 0, 0};
  for (int d = 1; d <= 10; ++d) {
    set.push_back(encode_from_cartesian(Vec3(d, 0, 0), Vec3::Ones(), Vec4(1, 0, 0, 0),
                                        Parametrization::Homogeneous),
                  0.0, sh);
  }
  const TelemetrySnapshot snap = telemetry_snapshot(set, 42);
  CHECK(snap.count == 10);
  CHECK(snap.mean_dist_farthest_10pct == doctest::Approx(10.0));
  CHECK(snap.w_histogram.size() == kWeightBins);
  CHECK(weight_distance_correlation(snap) == doctest::Approx(-1.0));

  GaussianSet same(Parametrization::Homogeneous, 0);
  for (int d = 1; d <= 5; ++d) {
    same.push_back(encode_from_cartesian(Vec3(0, d, 0), Vec3::Ones(), Vec4(1, 0, 0, 0),
                                         Parametrization::Homogeneous, 0.5),
                   0.0, sh);
  }
  size_t occupied = 0;
  for (const auto& b : telemetry_snapshot(same, 0).w_histogram) occupied += b.count > 0;
  CHECK(occupied == 1);

  GaussianSet cart(Parametrization::Cartesian, 0);
  cart.push_back(RawGeometry{}, 0.0, sh);
  CHECK(telemetry_snapshot(cart, 0).w_histogram.empty());
}

TEST_CASE("Spearman correlation") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 2, 3}, {1, 3, 2, 4}) == doctest::Approx(4.5 / std::sqrt(22.5)));
  CHECK(std::isnan(spearman({1}, {2})));
  CHECK(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
}
