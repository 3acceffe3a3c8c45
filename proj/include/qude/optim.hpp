#pragma once

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace qude {

struct AdamConfig {
  double learning_rate = 1e-3;
  int batch_size = 2;  // experiments per mini-batch
  int epochs = 300;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moment estimates.
class Adam {
 public:
  Adam(std::size_t n, const AdamConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> x, std::span<const double> grad);
  long steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

struct LbfgsConfig {
  int memory = 10;
  int max_iterations = 200;
  double armijo_c1 = 1e-4;        // sufficient-decrease constant
  double backtrack_factor = 0.5;  // step shrink per rejected trial
  int max_line_search = 40;
  /// Stop once a step decreases f by less than f_tol * f.
  double f_tol = 1e-14;
  double grad_tol = 0.0;  // inf-norm threshold; 0 disables
};

/// f(x, grad) -> value, filling grad.
using ValueAndGradient = std::function<double(std::span<const double>, std::span<double>)>;

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::vector<double> grad;
  int iterations = 0;
  bool stalled = false;  // line search could not find sufficient decrease
};

using LbfgsCallback = std::function<void(int iteration, double f, std::span<const double> grad)>;

/// Limited-memory BFGS (two-loop recursion) with Armijo backtracking. Never
/// returns a point with a higher objective than the start.
LbfgsResult lbfgs_minimize(const ValueAndGradient& fg, std::vector<double> x0, const LbfgsConfig& cfg,
                           const LbfgsCallback& on_iteration = {});

}  // namespace qude
