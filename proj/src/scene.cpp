#include "hogs/scene.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>
#include <random>

namespace hogs {

std::string_view to_string(Param p) {
  switch (p) {
    case Param::Position: return "position";
    case Param::LogScale: return "log_scale";
    case Param::Rotation: return "rotation";
    case Param::Weight: return "weight";
    case Param::Opacity: return "opacity";
    case Param::Sh: return "sh";
  }
  return "?";
}

std::vector<double>& ParamArrays::get(Param p) {
  switch (p) {
    case Param::Position: return position;
    case Param::LogScale: return log_scale;
    case Param::Rotation: return rotation;
    case Param::Weight: return weight;
    case Param::Opacity: return opacity;
    case Param::Sh: return sh;
  }
  return sh;
}

const std::vector<double>& ParamArrays::get(Param p) const {
  return const_cast<ParamArrays*>(this)->get(p);
}

int ParamArrays::stride(Param p) const {
  switch (p) {
    case Param::Position:
    case Param::LogScale: return 3;
    case Param::Rotation: return 4;
    case Param::Weight:
    case Param::Opacity: return 1;
    case Param::Sh: return 3 * sh_coeffs;
  }
  return 1;
}

ParamArrays ParamArrays::zeros_like() const {
  ParamArrays z;
  z.sh_coeffs = sh_coeffs;
  z.resize(size());
  return z;
}

void ParamArrays::resize(size_t n) {
  for (Param p : kAllParams) get(p).resize(n * stride(p), 0.0);
}

void ParamArrays::append(const ParamArrays& src, size_t index) {
  for (Param p : kAllParams) {
    const int s = stride(p);
    const auto& from = src.get(p);
    auto& to = get(p);
    to.insert(to.end(), from.begin() + index * s, from.begin() + (index + 1) * s);
  }
}

void ParamArrays::keep(const std::vector<bool>& keep_mask) {
  const size_t n = size();
  for (Param p : kAllParams) {
    const size_t s = stride(p);
    auto& a = get(p);
    size_t out = 0;
    for (size_t i = 0; i < n; ++i) {
      if (!keep_mask[i]) continue;
      if (out != i) std::copy_n(a.begin() + i * s, s, a.begin() + out * s);
      ++out;
    }
    a.resize(out * s);
  }
}

bool ParamArrays::consistent() const {
  const size_t n = size();
  for (Param p : kAllParams) {
    if (get(p).size() != n * static_cast<size_t>(stride(p))) return false;
  }
  return true;
}

GaussianSet::GaussianSet(Parametrization p, int max_degree)
    : parametrization(p), max_sh_degree(max_degree) {
  if (max_degree < 0 || max_degree > 3) throw std::invalid_argument("SH degree must be in [0, 3]");
  params.sh_coeffs = sh_coeff_count(max_degree);
}

RawGeometry GaussianSet::geometry(size_t i) const {
  RawGeometry g;
  const auto& a = params;
  g.position = Vec3(a.position[3 * i], a.position[3 * i + 1], a.position[3 * i + 2]);
  g.log_scale = Vec3(a.log_scale[3 * i], a.log_scale[3 * i + 1], a.log_scale[3 * i + 2]);
  g.rotation = Vec4(a.rotation[4 * i], a.rotation[4 * i + 1], a.rotation[4 * i + 2],
                    a.rotation[4 * i + 3]);
  g.weight = a.weight[i];
  return g;
}

void GaussianSet::set_geometry(size_t i, const RawGeometry& g) {
  auto& a = params;
  for (int k = 0; k < 3; ++k) {
    a.position[3 * i + k] = g.position[k];
    a.log_scale[3 * i + k] = g.log_scale[k];
  }
  for (int k = 0; k < 4; ++k) a.rotation[4 * i + k] = g.rotation[k];
  a.weight[i] = g.weight;
}

double GaussianSet::opacity(size_t i) const { return sigmoid(params.opacity[i]); }

std::span<const double> GaussianSet::sh(size_t i) const {
  const size_t s = 3 * params.sh_coeffs;
  return {params.sh.data() + i * s, s};
}

std::span<double> GaussianSet::sh(size_t i) {
  const size_t s = 3 * params.sh_coeffs;
  return {params.sh.data() + i * s, s};
}

void GaussianSet::push_back(const RawGeometry& g, double opacity_logit,
                            std::span<const double> sh_in) {
  const size_t i = size();
  params.resize(i + 1);
  set_geometry(i, g);
  params.opacity[i] = opacity_logit;
  auto dst = sh(i);
  std::copy_n(sh_in.begin(), std::min(sh_in.size(), dst.size()), dst.begin());
}

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};

}  // namespace

double rgb_to_sh_dc(double c) { return (c - 0.5) / kC0; }

void sh_basis(const Vec3& d, int degree, std::array<double, 16>& Y) {
  Y.fill(0.0);
  Y[0] = kC0;
  if (degree < 1) return;
  const double x = d[0], y = d[1], z = d[2];
  Y[1] = -kC1 * y;
  Y[2] = kC1 * z;
  Y[3] = -kC1 * x;
  if (degree < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  Y[4] = kC2[0] * x * y;
  Y[5] = kC2[1] * y * z;
  Y[6] = kC2[2] * (2 * zz - xx - yy);
  Y[7] = kC2[3] * x * z;
  Y[8] = kC2[4] * (xx - yy);
  if (degree < 3) return;
  Y[9] = kC3[0] * y * (3 * xx - yy);
  Y[10] = kC3[1] * x * y * z;
  Y[11] = kC3[2] * y * (4 * zz - xx - yy);
  Y[12] = kC3[3] * z * (2 * zz - 3 * xx - 3 * yy);
  Y[13] = kC3[4] * x * (4 * zz - xx - yy);
  Y[14] = kC3[5] * z * (xx - yy);
  Y[15] = kC3[6] * x * (xx - 3 * yy);
}

void sh_basis_gradient(const Vec3& d, int degree, std::array<Vec3, 16>& dY) {
  for (auto& v : dY) v.setZero();
  if (degree < 1) return;
  const double x = d[0], y = d[1], z = d[2];
  dY[1] = Vec3(0, -kC1, 0);
  dY[2] = Vec3(0, 0, kC1);
  dY[3] = Vec3(-kC1, 0, 0);
  if (degree < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  dY[4] = kC2[0] * Vec3(y, x, 0);
  dY[5] = kC2[1] * Vec3(0, z, y);
  dY[6] = kC2[2] * Vec3(-2 * x, -2 * y, 4 * z);
  dY[7] = kC2[3] * Vec3(z, 0, x);
  dY[8] = kC2[4] * Vec3(2 * x, -2 * y, 0);
  if (degree < 3) return;
  dY[9] = kC3[0] * Vec3(6 * x * y, 3 * xx - 3 * yy, 0);
  dY[10] = kC3[1] * Vec3(y * z, x * z, x * y);
  dY[11] = kC3[2] * Vec3(-2 * x * y, 4 * zz - xx - 3 * yy, 8 * y * z);
  dY[12] = kC3[3] * Vec3(-6 * x * z, -6 * y * z, 6 * zz - 3 * xx - 3 * yy);
  dY[13] = kC3[4] * Vec3(4 * zz - 3 * xx - yy, -2 * x * y, 8 * x * z);
  dY[14] = kC3[5] * Vec3(2 * x * z, -2 * y * z, xx - yy);
  dY[15] = kC3[6] * Vec3(3 * xx - 3 * yy, -6 * x * y, 0);
}

Vec3 eval_sh_color(std::span<const double> coeffs, const Vec3& view_dir, int degree) {
  std::array<double, 16> Y;
  sh_basis(view_dir, degree, Y);
  const int n = std::min<int>(sh_coeff_count(degree), static_cast<int>(coeffs.size() / 3));
  Vec3 c(0.5, 0.5, 0.5);
  for (int k = 0; k < n; ++k) {
    for (int ch = 0; ch < 3; ++ch) c[ch] += Y[k] * coeffs[3 * k + ch];
  }
  return c.cwiseMax(0.0).cwiseMin(1.0);
}

void parse_weight_init(std::string_view text, InitConfig& cfg) {
  if (text == "1/d" || text == "inverse-distance") {
    cfg.weight_init = WeightInit::InverseDistance;
    return;
  }
  if (text == "random") {
    cfg.weight_init = WeightInit::Random;
    return;
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !(v > 0.0)) {
    throw std::invalid_argument("w-init must be '1/d', 'random' or a positive number, got '" +
                                std::string(text) + "'");
  }
  cfg.weight_init = WeightInit::Constant;
  cfg.weight_value = v;
}

std::string format_weight_init(const InitConfig& cfg) {
  switch (cfg.weight_init) {
    case WeightInit::InverseDistance: return "1/d";
    case WeightInit::Random: return "random";
    case WeightInit::Constant: {
      char buf[64];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), cfg.weight_value);
      return std::string(buf, ptr);
    }
  }
  return "1/d";
}

namespace {

// Minimal static 3-d tree for nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), 0);
    build(0, idx_.size(), 0);
  }

  // k nearest distances to point `self`, excluding itself.
  void query(size_t self, int k, std::vector<double>& out) const {
    std::priority_queue<double> heap;  // max-heap of squared distances
    search(0, idx_.size(), 0, self, static_cast<size_t>(k), heap);
    out.clear();
    while (!heap.empty()) {
      out.push_back(std::sqrt(heap.top()));
      heap.pop();
    }
  }

 private:
  void build(size_t lo, size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const size_t mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](size_t a, size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(size_t lo, size_t hi, int axis, size_t self, size_t k,
              std::priority_queue<double>& heap) const {
    if (lo >= hi) return;
    const size_t mid = (lo + hi) / 2;
    const size_t node = idx_[mid];
    const Vec3& q = pts_[self];
    if (node != self) {
      const double d2 = (pts_[node] - q).squaredNorm();
      if (heap.size() < k) {
        heap.push(d2);
      } else if (d2 < heap.top()) {
        heap.pop();
        heap.push(d2);
      }
    }
    const double diff = q[axis] - pts_[node][axis];
    const int next = (axis + 1) % 3;
    const bool left_first = diff < 0;
    if (left_first) search(lo, mid, next, self, k, heap);
    else search(mid + 1, hi, next, self, k, heap);
    if (heap.size() < k || diff * diff < heap.top()) {
      if (left_first) search(mid + 1, hi, next, self, k, heap);
      else search(lo, mid, next, self, k, heap);
    }
  }

  const std::vector<Vec3>& pts_;
  std::vector<size_t> idx_;
};

double initial_weight(const Vec3& p, const InitConfig& cfg, std::mt19937_64& rng) {
  switch (cfg.weight_init) {
    case WeightInit::InverseDistance: return 1.0 / std::max(p.norm(), 1e-9);
    case WeightInit::Constant: return cfg.weight_value;
    case WeightInit::Random: {
      std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
      return std::exp(u(rng));
    }
  }
  return 1.0;
}

void append_points(GaussianSet& set, const std::vector<Vec3>& positions,
                   const std::vector<Vec3>& colors, const InitConfig& cfg, std::mt19937_64& rng) {
  const auto scales = mean_knn_distance(positions, 3);
  std::vector<double> sh(3 * set.params.sh_coeffs, 0.0);
  const double op = logit(cfg.initial_opacity);
  for (size_t i = 0; i < positions.size(); ++i) {
    const Vec3& p = positions[i];
    if (!p.allFinite()) throw DataError("point cloud contains non-finite positions");
    const double s = std::max(scales[i], 1e-7);
    std::optional<double> hint;
    if (set.parametrization == Parametrization::Homogeneous) hint = initial_weight(p, cfg, rng);
    RawGeometry g = encode_from_cartesian(p, Vec3::Constant(s), Vec4(1, 0, 0, 0),
                                          set.parametrization, hint);
    for (int ch = 0; ch < 3; ++ch) sh[ch] = rgb_to_sh_dc(colors[i][ch]);
    set.push_back(g, op, sh);
  }
}

}  // namespace

std::vector<double> mean_knn_distance(const std::vector<Vec3>& points, int k) {
  std::vector<double> out(points.size(), 1.0);
  const int kk = std::min<int>(k, static_cast<int>(points.size()) - 1);
  if (kk <= 0) return out;
  KdTree tree(points);
  std::vector<double> d;
  for (size_t i = 0; i < points.size(); ++i) {
    tree.query(i, kk, d);
    out[i] = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  }
  return out;
}

GaussianSet init_from_points(const PointCloud& cloud, Parametrization p, const InitConfig& cfg) {
  if (cloud.size() == 0) throw DataError("cannot initialize from an empty point cloud");
  if (cloud.colors.size() != cloud.positions.size()) {
    throw DataError("point cloud colors and positions differ in length");
  }
  GaussianSet set(p, cfg.max_sh_degree);
  std::mt19937_64 rng(cfg.seed);
  append_points(set, cloud.positions, cloud.colors, cfg, rng);
  return set;
}

void add_skybox(GaussianSet& set, const SkyboxConfig& cfg, const InitConfig& init) {
  if (cfg.count == 0) return;
  if (!(cfg.radius > 0.0)) throw std::invalid_argument("skybox radius must be positive");
  const Vec3 up = cfg.up.normalized();
  const Vec3 e1 = up.unitOrthogonal();
  const Vec3 e2 = up.cross(e1);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::vector<Vec3> pos(cfg.count), col(cfg.count, cfg.color);
  for (auto& p : pos) {
    // Uniform on the hemisphere: height is uniform in [0, 1].
    const double h = u01(rng);
    const double a = 2.0 * std::numbers::pi * u01(rng);
    const double r = std::sqrt(std::max(0.0, 1.0 - h * h));
    p = cfg.radius * (h * up + r * std::cos(a) * e1 + r * std::sin(a) * e2);
  }
  InitConfig sky = init;
  if (set.parametrization == Parametrization::Homogeneous) {
    sky.weight_init = WeightInit::Constant;
    sky.weight_value = 1.0 / cfg.radius;
  }
  append_points(set, pos, col, sky, rng);
}

}  // namespace hogs
