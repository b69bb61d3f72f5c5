#include "hogs/eval.hpp"

#include "hogs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>

namespace hogs {

TrainTestSplit split_train_test(size_t view_count, size_t every) {
  if (every == 0) throw std::invalid_argument("split period must be > 0");
  TrainTestSplit s;
  for (size_t i = 0; i < view_count; ++i) (i % every == 0 ? s.test : s.train).push_back(i);
  s.warning = view_count < every;
  return s;
}

size_t DepthMask::far_count() const {
  return static_cast<size_t>(std::count_if(far_mask.data.begin(), far_mask.data.end(),
                                           [](double v) { return v > 0.5; }));
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

bool valid_depth(double d) { return std::isfinite(d) && d > 0.0; }

}  // namespace

std::vector<DepthMask> compute_far_masks(const std::vector<Image>& depth_maps,
                                         double percentile) {
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw std::invalid_argument("percentile must be in [0, 100]");
  }
  std::vector<double> pooled;
  for (size_t v = 0; v < depth_maps.size(); ++v) {
    const size_t before = pooled.size();
    for (double d : depth_maps[v].data) {
      if (valid_depth(d)) pooled.push_back(d);
    }
    if (pooled.size() == before) {
      throw DataError("depth map " + std::to_string(v) + " has no valid pixels");
    }
  }
  std::vector<DepthMask> out;
  if (depth_maps.empty()) return out;
  const double threshold = quantile(std::move(pooled), percentile / 100.0);
  for (const Image& d : depth_maps) {
    DepthMask m;
    m.threshold = threshold;
    m.far_mask = Image(d.width, d.height, 1);
    for (size_t i = 0; i < d.pixel_count(); ++i) {
      const double v = d.data[i * d.channels];
      m.far_mask.data[i] = valid_depth(v) && v >= threshold ? 1.0 : 0.0;
    }
    out.push_back(std::move(m));
  }
  return out;
}

Image near_mask(const DepthMask& m) {
  Image n = m.far_mask;
  for (auto& v : n.data) v = v > 0.5 ? 0.0 : 1.0;
  return n;
}

ViewMetrics evaluate_view(const Image& pred, const Image& gt, const DepthMask* mask) {
  ViewMetrics r;
  r.psnr = psnr(pred, gt);
  r.ssim = ssim(pred, gt);
  if (mask) {
    if (mask->far_mask.width != pred.width || mask->far_mask.height != pred.height) {
      throw std::invalid_argument("depth mask size differs from the image");
    }
    const Image near = near_mask(*mask);
    r.psnr_near = psnr(pred, gt, &near);
    r.ssim_near = ssim(pred, gt, &near);
    r.psnr_far = psnr(pred, gt, &mask->far_mask);
    r.ssim_far = ssim(pred, gt, &mask->far_mask);
  }
  return r;
}

ViewMetrics MetricReport::mean() const {
  ViewMetrics m;
  m.view_id = "mean";
  m.split = views.empty() ? "" : views.front().split;
  auto avg = [&](double ViewMetrics::*f) {
    double s = 0.0;
    size_t n = 0;
    for (const auto& v : views) {
      if (std::isfinite(v.*f)) {
        s += v.*f;
        ++n;
      }
    }
    return n ? s / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
  };
  m.psnr = avg(&ViewMetrics::psnr);
  m.ssim = avg(&ViewMetrics::ssim);
  m.psnr_near = avg(&ViewMetrics::psnr_near);
  m.ssim_near = avg(&ViewMetrics::ssim_near);
  m.psnr_far = avg(&ViewMetrics::psnr_far);
  m.ssim_far = avg(&ViewMetrics::ssim_far);
  return m;
}

namespace {

void write_value(std::ostream& out, double v) {
  if (std::isfinite(v)) out << v;
  else out << "n/a";
}

void write_row(std::ostream& out, const ViewMetrics& v) {
  out << v.view_id << ',' << v.split;
  for (double x : {v.psnr, v.ssim, v.psnr_near, v.ssim_near, v.psnr_far, v.ssim_far}) {
    out << ',';
    write_value(out, x);
  }
  out << ",n/a\n";
}

}  // namespace

void write_metric_csv(const MetricReport& report, std::ostream& out) {
  out << "view_id,split,psnr,ssim,psnr_near,ssim_near,psnr_far,ssim_far,lpips\n";
  out << std::setprecision(10);
  for (const auto& v : report.views) write_row(out, v);
  write_row(out, report.mean());
}

TelemetrySnapshot telemetry_snapshot(const GaussianSet& set, int iteration) {
  TelemetrySnapshot snap;
  snap.iteration = iteration;
  snap.count = set.size();
  std::vector<double> dist;
  std::vector<double> weights;
  dist.reserve(set.size());
  for (size_t i = 0; i < set.size(); ++i) {
    const DecodedGeometry g = set.decoded(i);
    if (!g.valid) continue;
    dist.push_back(g.mean.norm());
    if (set.parametrization == Parametrization::Homogeneous) {
      weights.push_back(activate_weight(set.params.weight[i]));
    }
  }
  if (!dist.empty()) {
    std::vector<double> sorted = dist;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const size_t k = std::max<size_t>(1, (sorted.size() + 9) / 10);
    snap.mean_dist_farthest_10pct =
        std::accumulate(sorted.begin(), sorted.begin() + k, 0.0) / static_cast<double>(k);
  }
  if (!weights.empty()) {
    const double lo = std::log(*std::min_element(weights.begin(), weights.end()));
    const double hi = std::log(*std::max_element(weights.begin(), weights.end()));
    const double width = (hi - lo) / kWeightBins;
    snap.w_histogram.resize(kWeightBins);
    for (int b = 0; b < kWeightBins; ++b) {
      snap.w_histogram[b].w_lo = std::exp(lo + b * width);
      snap.w_histogram[b].w_hi = std::exp(lo + (b + 1) * width);
    }
    for (size_t i = 0; i < weights.size(); ++i) {
      int b = width > 0.0 ? static_cast<int>((std::log(weights[i]) - lo) / width) : 0;
      b = std::clamp(b, 0, kWeightBins - 1);
      auto& bin = snap.w_histogram[b];
      bin.mean_distance += dist[i];
      ++bin.count;
    }
    for (auto& bin : snap.w_histogram) {
      if (bin.count) bin.mean_distance /= static_cast<double>(bin.count);
    }
  }
  return snap;
}

namespace {

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (size_t i = 0; i < idx.size();) {
    size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("spearman: length mismatch");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (x.size() < 2) return nan;
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return nan;
  return sxy / std::sqrt(sxx * syy);
}

double weight_distance_correlation(const TelemetrySnapshot& snap) {
  std::vector<double> w, d;
  for (const auto& b : snap.w_histogram) {
    if (!b.count) continue;
    w.push_back(std::sqrt(b.w_lo * b.w_hi));
    d.push_back(b.mean_distance);
  }
  return spearman(w, d);
}

void write_telemetry_header(std::ostream& out) {
  out << "iter,count,mean_dist_farthest_10pct\n";
}

void write_telemetry_row(const TelemetrySnapshot& snap, std::ostream& out) {
  out << std::setprecision(10) << snap.iteration << ',' << snap.count << ','
      << snap.mean_dist_farthest_10pct << '\n';
}

void write_weight_histogram(const TelemetrySnapshot& snap, std::ostream& out) {
  out << "bin,w_lo,w_hi,count,mean_distance\n" << std::setprecision(10);
  for (size_t b = 0; b < snap.w_histogram.size(); ++b) {
    const auto& bin = snap.w_histogram[b];
    out << b << ',' << bin.w_lo << ',' << bin.w_hi << ',' << bin.count << ','
        << bin.mean_distance << '\n';
  }
}

}  // namespace hogs
