#include "hogs/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace hogs {

namespace {

constexpr double kMinWeight = 1e-12;

double sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

struct Adam1D {
  double m = 0.0, v = 0.0;
  double step(double g, double lr, int t) {
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    return lr * mh / (std::sqrt(vh) + 1e-15);
  }
};

}  // namespace

std::string to_string(Sim1DRep r) {
  return r == Sim1DRep::Cartesian ? "cartesian" : "homogeneous";
}

void Sim1DConfig::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("lr must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  if (targets.empty()) throw std::invalid_argument("targets must be non-empty");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(w0 > 0.0)) throw std::invalid_argument("w0 must be > 0");
}

SimTrace simulate_1d_target(const Sim1DConfig& cfg, Sim1DRep rep, double target) {
  cfg.validate();
  SimTrace tr;
  tr.rep = rep;
  tr.target = target;
  // Both raw parameters: (x, unused) or (x~, w or rho).
  double a = rep == Sim1DRep::Cartesian ? cfg.x0 : cfg.x0 * cfg.w0;
  double b = cfg.weight == Sim1DWeight::Exponential ? std::log(cfg.w0) : cfg.w0;
  Adam1D adam_a, adam_b;
  const double slack = 1e-9 * std::max(1.0, std::abs(target));

  auto weight = [&] {
    if (rep == Sim1DRep::Cartesian) return 1.0;
    return cfg.weight == Sim1DWeight::Exponential ? std::exp(b) : b;
  };

  for (int it = 0; it < cfg.max_iters; ++it) {
    const double w = weight();
    const double x = a / w;
    const double r = target - x;
    tr.steps.push_back({it, x, std::abs(r), a, w});
    if (std::abs(r) <= cfg.tol + slack) {
      tr.iterations_to_tol = it;
      break;
    }
    if (it + 1 == cfg.max_iters) break;
    // Subgradients of |x_t - a / w|; zero at the optimum.
    const double ga = -sign(r) / w;
    double gb = sign(r) * a / (w * w);
    if (cfg.weight == Sim1DWeight::Exponential) gb *= w;
    if (cfg.optimizer == Sim1DOptimizer::Adam) {
      a -= adam_a.step(ga, cfg.lr, it + 1);
      if (rep == Sim1DRep::Homogeneous && cfg.optimize_weight) b -= adam_b.step(gb, cfg.lr, it + 1);
    } else {
      a -= cfg.lr * ga;
      if (rep == Sim1DRep::Homogeneous && cfg.optimize_weight) b -= cfg.lr * gb;
    }
    if (rep == Sim1DRep::Homogeneous && cfg.weight == Sim1DWeight::Linear && b <= kMinWeight) {
      b = kMinWeight;
      ++tr.degenerate_events;
    }
  }
  return tr;
}

std::vector<SimTrace> simulate_1d(const Sim1DConfig& cfg, Sim1DRep rep) {
  std::vector<SimTrace> out;
  for (double t : cfg.targets) out.push_back(simulate_1d_target(cfg, rep, t));
  return out;
}

void emit_convergence_csv(const std::vector<SimTrace>& traces, std::ostream& out) {
  out << "iter,representation,target,decoded_x,loss\n";
  out << std::setprecision(17);
  for (const auto& tr : traces) {
    for (const auto& s : tr.steps) {
      out << s.iter << ',' << to_string(tr.rep) << ',' << tr.target << ',' << s.decoded << ','
          << s.loss << '\n';
    }
  }
}

}  // namespace hogs
