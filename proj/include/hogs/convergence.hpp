#pragma once

// One-dimensional study of how fast a point reaches a target when optimized
// in Cartesian form (x) versus homogeneous form (x~, w) with x = x~ / w.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace hogs {

enum class Sim1DRep { Cartesian, Homogeneous };
enum class Sim1DOptimizer { Adam, GradientDescent };
enum class Sim1DWeight { Exponential, Linear };  // w = exp(rho) or w raw

std::string to_string(Sim1DRep r);

struct Sim1DConfig {
  double x0 = 5.0;
  double w0 = 1.0;
  std::vector<double> targets{10.0, 50.0, 250.0};
  double lr = 0.1;
  int max_iters = 10000;
  double tol = 0.5;
  Sim1DOptimizer optimizer = Sim1DOptimizer::Adam;
  Sim1DWeight weight = Sim1DWeight::Exponential;
  bool optimize_weight = true;

  void validate() const;
};

struct SimStep {
  int iter = 0;
  double decoded = 0.0;
  double loss = 0.0;
  double raw_x = 0.0;  // x or x~
  double raw_w = 1.0;  // w (activated), 1 for Cartesian
};

struct SimTrace {
  Sim1DRep rep = Sim1DRep::Cartesian;
  double target = 0.0;
  std::vector<SimStep> steps;           // step 0 is the initial state
  std::optional<int> iterations_to_tol;  // empty when not converged
  int degenerate_events = 0;             // w clamped at 1e-12
};

SimTrace simulate_1d_target(const Sim1DConfig& cfg, Sim1DRep rep, double target);

/// One trace per target.
std::vector<SimTrace> simulate_1d(const Sim1DConfig& cfg, Sim1DRep rep);

/// Rows: iter,representation,target,decoded_x,loss.
void emit_convergence_csv(const std::vector<SimTrace>& traces, std::ostream& out);

}  // namespace hogs
