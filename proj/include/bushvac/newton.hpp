#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

namespace bushvac {

struct NewtonOptions {
  double tol_converged = 1e-8;  // scaled residual max-norm for convergence
  int max_iterations = 100;
  double fd_step_rel = 1e-6;    // forward-difference step, relative to |x|
  double armijo_c = 1e-4;
  double min_step = 1e-12;      // give up when backtracking shrinks below this
};

struct NewtonResult {
  Eigen::VectorXd x;
  double residual_norm = std::numeric_limits<double>::infinity();  // max-norm at x
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton for square systems F(x) = 0 with a forward-difference
/// Jacobian and Armijo backtracking on 0.5 * ||F||^2.
inline NewtonResult newton_solve(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                 Eigen::VectorXd x, const NewtonOptions& opt = {}) {
  const int n = static_cast<int>(x.size());
  NewtonResult res;
  Eigen::VectorXd fx = f(x);
  double merit = 0.5 * fx.squaredNorm();

  for (int it = 0; it < opt.max_iterations; ++it) {
    res.iterations = it;
    if (fx.lpNorm<Eigen::Infinity>() <= opt.tol_converged) {
      res.converged = true;
      break;
    }
    Eigen::MatrixXd jac(n, n);
    for (int j = 0; j < n; ++j) {
      const double h = opt.fd_step_rel * std::max(std::abs(x[j]), 1.0);
      Eigen::VectorXd xp = x;
      xp[j] += h;
      jac.col(j) = (f(xp) - fx) / h;
    }
    Eigen::VectorXd step = jac.fullPivLu().solve(-fx);
    if (!step.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= opt.min_step) {
      Eigen::VectorXd x_trial = x + alpha * step;
      Eigen::VectorXd f_trial = f(x_trial);
      if (f_trial.allFinite()) {
        const double merit_trial = 0.5 * f_trial.squaredNorm();
        if (merit_trial <= merit * (1.0 - 2.0 * opt.armijo_c * alpha) + 1e-300) {
          x = std::move(x_trial);
          fx = std::move(f_trial);
          merit = merit_trial;
          accepted = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // stagnated
  }
  if (!res.converged && fx.lpNorm<Eigen::Infinity>() <= opt.tol_converged) res.converged = true;
  res.x = std::move(x);
  res.residual_norm = fx.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace bushvac
