#include "qude/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qude {

void Adam::step(std::span<double> x, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < x.size(); ++i) {
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    x[i] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
  }
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

struct CurvaturePair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

std::vector<double> two_loop(std::span<const double> g, const std::deque<CurvaturePair>& hist) {
  std::vector<double> q(g.begin(), g.end());
  std::vector<double> alpha(hist.size());
  for (std::size_t k = hist.size(); k-- > 0;) {
    alpha[k] = hist[k].rho * dot(hist[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * hist[k].y[i];
  }
  const auto& last = hist.back();
  const double scale = dot(last.s, last.y) / dot(last.y, last.y);
  for (double& v : q) v *= scale;
  for (std::size_t k = 0; k < hist.size(); ++k) {
    const double beta = hist[k].rho * dot(hist[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (alpha[k] - beta) * hist[k].s[i];
  }
  for (double& v : q) v = -v;
  return q;
}

}  // namespace

LbfgsResult lbfgs_minimize(const ValueAndGradient& fg, std::vector<double> x0, const LbfgsConfig& cfg,
                           const LbfgsCallback& on_iteration) {
  const std::size_t n = x0.size();
  LbfgsResult res;
  res.x = std::move(x0);
  res.grad.assign(n, 0.0);
  res.f = fg(res.x, res.grad);
  if (n == 0) return res;

  std::deque<CurvaturePair> hist;
  std::vector<double> trial(n), trial_grad(n);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (cfg.grad_tol > 0.0 && inf_norm(res.grad) <= cfg.grad_tol) break;

    std::vector<double> dir;
    double t = 1.0;
    if (hist.empty()) {
      dir.assign(res.grad.begin(), res.grad.end());
      for (double& v : dir) v = -v;
      const double gmax = inf_norm(res.grad);
      if (gmax == 0.0) break;
      t = std::min(1.0, 1e-2 / gmax);
    } else {
      dir = two_loop(res.grad, hist);
    }
    double slope = dot(res.grad, dir);
    if (!(slope < 0.0)) {
      // not a descent direction: drop the memory and fall back to steepest descent
      hist.clear();
      dir.assign(res.grad.begin(), res.grad.end());
      for (double& v : dir) v = -v;
      slope = dot(res.grad, dir);
      t = std::min(1.0, 1e-2 / inf_norm(res.grad));
    }

    bool accepted = false;
    double f_trial = 0.0;
    for (int ls = 0; ls < cfg.max_line_search; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = res.x[i] + t * dir[i];
      bool finite = true;
      try {
        f_trial = fg(trial, trial_grad);
        finite = std::isfinite(f_trial);
      } catch (...) {
        // a trial step that blows up the dynamics is treated as too long
        finite = false;
      }
      if (finite && f_trial <= res.f + cfg.armijo_c1 * t * slope) {
        accepted = true;
        break;
      }
      t *= cfg.backtrack_factor;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }

    CurvaturePair pair{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      pair.s[i] = trial[i] - res.x[i];
      pair.y[i] = trial_grad[i] - res.grad[i];
    }
    const double sy = dot(pair.s, pair.y);
    const double decrease = res.f - f_trial;
    const double f_prev = res.f;
    res.x = trial;
    res.f = f_trial;
    res.grad = trial_grad;
    res.iterations = it + 1;
    if (on_iteration) on_iteration(res.iterations, res.f, res.grad);

    if (sy > 1e-300 && std::sqrt(dot(pair.y, pair.y)) > 0.0) {
      pair.rho = 1.0 / sy;
      hist.push_back(std::move(pair));
      if (static_cast<int>(hist.size()) > cfg.memory) hist.pop_front();
    }
    if (decrease <= cfg.f_tol * std::abs(f_prev)) break;
  }
  return res;
}

}  // namespace qude
