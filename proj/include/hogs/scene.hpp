#pragma once

#include "hogs/geometry.hpp"
#include "hogs/types.hpp"

#include <array>
#include <cstdint>
#include <span>

namespace hogs {

enum class Param { Position, LogScale, Rotation, Weight, Opacity, Sh };

inline constexpr std::array<Param, 6> kAllParams = {Param::Position, Param::LogScale,
                                                   Param::Rotation, Param::Weight,
                                                   Param::Opacity,  Param::Sh};

std::string_view to_string(Param p);

/// Number of SH coefficients per channel for a maximum degree.
constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

// Structure-of-arrays store for per-Gaussian raw parameters. Also reused for
// gradients and optimizer moments, which must mirror the parameter layout.
struct ParamArrays {
  int sh_coeffs = 1;  // per channel
  std::vector<double> position;   // 3 per Gaussian
  std::vector<double> log_scale;  // 3
  std::vector<double> rotation;   // 4, (w, x, y, z)
  std::vector<double> weight;     // 1
  std::vector<double> opacity;    // 1, logit
  std::vector<double> sh;         // 3 * sh_coeffs, laid out [coeff][rgb]

  std::vector<double>& get(Param p);
  const std::vector<double>& get(Param p) const;
  int stride(Param p) const;
  size_t size() const { return opacity.size(); }

  /// Same shape, all zeros.
  ParamArrays zeros_like() const;
  void resize(size_t n);
  void append(const ParamArrays& src, size_t index);
  void keep(const std::vector<bool>& keep_mask);
  bool consistent() const;
};

struct GaussianSet {
  Parametrization parametrization = Parametrization::Cartesian;
  int max_sh_degree = 3;
  int active_sh_degree = 0;
  ParamArrays params;

  GaussianSet() = default;
  GaussianSet(Parametrization p, int max_degree);

  size_t size() const { return params.size(); }
  bool empty() const { return size() == 0; }

  RawGeometry geometry(size_t i) const;
  void set_geometry(size_t i, const RawGeometry& g);
  DecodedGeometry decoded(size_t i) const { return decode(geometry(i), parametrization); }

  double opacity(size_t i) const;
  std::span<const double> sh(size_t i) const;
  std::span<double> sh(size_t i);

  /// Append one Gaussian; SH coefficients beyond `sh_in` are zero.
  void push_back(const RawGeometry& g, double opacity_logit, std::span<const double> sh_in);
};

struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;  // [0, 1]
  size_t size() const { return positions.size(); }
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// SH DC coefficient for a target display color.
double rgb_to_sh_dc(double c);

enum class WeightInit { InverseDistance, Constant, Random };

struct InitConfig {
  int max_sh_degree = 3;
  double initial_opacity = 0.1;
  WeightInit weight_init = WeightInit::InverseDistance;
  double weight_value = 1.0;  // WeightInit::Constant
  uint64_t seed = 0;          // WeightInit::Random
};

/// Parse a w-init flag: "1/d", "random" or a positive number.
void parse_weight_init(std::string_view text, InitConfig& cfg);
std::string format_weight_init(const InitConfig& cfg);

/// Mean distance to the 3 nearest neighbours, per point (brute force for
/// small clouds, grid accelerated otherwise).
std::vector<double> mean_knn_distance(const std::vector<Vec3>& points, int k = 3);

GaussianSet init_from_points(const PointCloud& cloud, Parametrization p, const InitConfig& cfg);

struct SkyboxConfig {
  size_t count = 0;
  double radius = 1000.0;
  Vec3 color{0.0, 0.0, 1.0};
  Vec3 up{0.0, 0.0, 1.0};
  uint64_t seed = 0;
};

/// Sample `count` points uniformly on the upper hemisphere (relative to
/// `up`) and append them with the skybox color.
void add_skybox(GaussianSet& set, const SkyboxConfig& cfg, const InitConfig& init);

/// Real SH basis values (3DGS sign convention), `degree` <= 3, 16 slots.
void sh_basis(const Vec3& dir, int degree, std::array<double, 16>& out);
/// Partial derivatives of the basis polynomials with respect to dir.
void sh_basis_gradient(const Vec3& dir, int degree, std::array<Vec3, 16>& out);

/// Clamped color for one Gaussian. `coeffs` is [coeff][rgb].
Vec3 eval_sh_color(std::span<const double> coeffs, const Vec3& view_dir, int degree);

}  // namespace hogs
