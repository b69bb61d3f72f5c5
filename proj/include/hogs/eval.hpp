#pragma once

#include "hogs/scene.hpp"

#include <limits>
#include <ostream>

namespace hogs {

struct TrainTestSplit {
  std::vector<size_t> train;
  std::vector<size_t> test;
  bool warning = false;  // fewer views than the split period
};

/// Views are assumed ordered by file name; indices divisible by `every` are
/// held out for testing.
TrainTestSplit split_train_test(size_t view_count, size_t every = 8);

struct DepthMask {
  Image far_mask;  // H x W x 1, 1 = far
  double threshold = 0.0;
  size_t far_count() const;
};

/// Linear-interpolation quantile (q in [0, 1]) of `values`; sorts a copy.
double quantile(std::vector<double> values, double q);

/// One threshold for the whole scene: the `percentile` quantile of all valid
/// (finite, positive) depth pixels pooled across views; far = depth >=
/// threshold. Throws DataError for a view without any valid pixel.
std::vector<DepthMask> compute_far_masks(const std::vector<Image>& depth_maps,
                                         double percentile = 95.0);

/// Complement of a far mask.
Image near_mask(const DepthMask& m);

struct ViewMetrics {
  std::string view_id;
  std::string split = "test";
  double psnr = 0.0;
  double ssim = 0.0;
  // NaN when no depth mask is available or the region is empty.
  double psnr_near = std::numeric_limits<double>::quiet_NaN();
  double ssim_near = std::numeric_limits<double>::quiet_NaN();
  double psnr_far = std::numeric_limits<double>::quiet_NaN();
  double ssim_far = std::numeric_limits<double>::quiet_NaN();
};

ViewMetrics evaluate_view(const Image& pred, const Image& gt, const DepthMask* mask);

struct MetricReport {
  std::vector<ViewMetrics> views;
  /// Mean over views (NaN entries are skipped).
  ViewMetrics mean() const;
};

/// Columns: view_id,split,psnr,ssim,psnr_near,ssim_near,psnr_far,ssim_far,lpips
/// followed by a "mean" row. LPIPS is always "n/a".
void write_metric_csv(const MetricReport& report, std::ostream& out);

struct WeightBin {
  double w_lo = 0.0;
  double w_hi = 0.0;
  size_t count = 0;
  double mean_distance = 0.0;
};

struct TelemetrySnapshot {
  int iteration = 0;
  size_t count = 0;
  double mean_dist_farthest_10pct = 0.0;
  std::vector<WeightBin> w_histogram;  // Homogeneous only, 64 log-spaced bins
};

inline constexpr int kWeightBins = 64;

TelemetrySnapshot telemetry_snapshot(const GaussianSet& set, int iteration);

/// Spearman rank correlation (average ranks for ties); NaN for < 2 samples or
/// constant input.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Spearman correlation between bin center w and per-bin mean distance over
/// occupied bins.
double weight_distance_correlation(const TelemetrySnapshot& snap);

void write_telemetry_header(std::ostream& out);
void write_telemetry_row(const TelemetrySnapshot& snap, std::ostream& out);
/// Columns: bin,w_lo,w_hi,count,mean_distance.
void write_weight_histogram(const TelemetrySnapshot& snap, std::ostream& out);

}  // namespace hogs
