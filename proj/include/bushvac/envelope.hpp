#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "bushvac/errors.hpp"

namespace bushvac {

enum class EnvelopeSide { upper, lower };
enum class EnvelopeMethod { constrained_lsq, quantile };

struct EnvelopeOptions {
  EnvelopeMethod method = EnvelopeMethod::constrained_lsq;
  double quantile = 0.95;  // used by the quantile method (mirrored for lower fits)
  int max_iterations = 200;
};

/// Least-squares fit of y ~ A x constrained to one side of the data:
/// upper keeps A x >= y everywhere, lower keeps A x <= y. Solved as a small
/// QP with a primal active-set sweep; A's first column must be constant so a
/// feasible start always exists.
inline Eigen::VectorXd envelope_constrained_lsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                                EnvelopeSide side, int max_iterations = 200) {
  const int n = static_cast<int>(A.rows());
  const int p = static_cast<int>(A.cols());
  if (n < p) throw NumericalError("envelope fit: fewer points than parameters");
  const double sgn = side == EnvelopeSide::upper ? 1.0 : -1.0;

  // Feasible start: unconstrained fit shifted along the intercept column.
  Eigen::VectorXd x = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  {
    const Eigen::VectorXd r = sgn * (A * x - y);
    const double worst = r.minCoeff();
    if (worst < 0.0) x[0] += sgn * (-worst) / A(0, 0);
  }

  std::vector<int> active;
  const Eigen::MatrixXd H = 2.0 * A.transpose() * A;
  const Eigen::VectorXd b = 2.0 * A.transpose() * y;

  for (int it = 0; it < max_iterations; ++it) {
    // Equality-constrained minimizer over the current active set.
    const int m = static_cast<int>(active.size());
    Eigen::MatrixXd kkt(p + m, p + m);
    kkt.setZero();
    kkt.topLeftCorner(p, p) = H;
    Eigen::VectorXd rhs(p + m);
    rhs.head(p) = b;
    for (int i = 0; i < m; ++i) {
      kkt.block(p + i, 0, 1, p) = A.row(active[i]);
      kkt.block(0, p + i, p, 1) = A.row(active[i]).transpose();
      rhs[p + i] = y[active[i]];
    }
    const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
    const Eigen::VectorXd x_eq = sol.head(p);
    const Eigen::VectorXd step = x_eq - x;

    if (step.lpNorm<Eigen::Infinity>() < 1e-11) {
      // Multipliers of g_i = sgn*(a_i x - y_i) >= 0: grad f = sum mu_i sgn a_i.
      if (m == 0) return x;
      Eigen::MatrixXd G(m, p);
      for (int i = 0; i < m; ++i) G.row(i) = sgn * A.row(active[i]);
      const Eigen::VectorXd grad = H * x - b;
      const Eigen::VectorXd mu =
          (G * G.transpose()).fullPivLu().solve(G * grad);
      int drop = -1;
      double most_negative = -1e-9;
      for (int i = 0; i < m; ++i)
        if (mu[i] < most_negative) {
          most_negative = mu[i];
          drop = i;
        }
      if (drop < 0) return x;
      active.erase(active.begin() + drop);
      continue;
    }

    // Longest feasible step toward the equality minimizer.
    double alpha = 1.0;
    int blocking = -1;
    for (int i = 0; i < n; ++i) {
      if (std::find(active.begin(), active.end(), i) != active.end()) continue;
      const double dir = sgn * A.row(i).dot(step);
      if (dir >= -1e-14) continue;
      const double slack = sgn * (A.row(i).dot(x) - y[i]);
      const double a_i = std::max(0.0, slack) / (-dir);
      if (a_i < alpha) {
        alpha = a_i;
        blocking = i;
      }
    }
    x += alpha * step;
    if (blocking >= 0 && static_cast<int>(active.size()) < p)
      active.push_back(blocking);
    else if (blocking >= 0) {
      // Exchange: make room by dropping the constraint with the smallest
      // multiplier before adding the blocker.
      active.erase(active.begin());
      active.push_back(blocking);
    }
  }
  return x;
}

/// Quantile (pinball-loss) regression via iteratively reweighted least
/// squares; tau close to 1 hugs the upper edge, mirrored for lower fits.
inline Eigen::VectorXd envelope_quantile(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                         EnvelopeSide side, double tau, int iterations = 60) {
  const double q = side == EnvelopeSide::upper ? tau : 1.0 - tau;
  Eigen::VectorXd x = (A.transpose() * A).ldlt().solve(A.transpose() * y);
  const double eps = 1e-6;
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd w(y.size());
    for (int i = 0; i < y.size(); ++i) {
      const double r = y[i] - A.row(i).dot(x);
      const double loss_w = r >= 0.0 ? q : 1.0 - q;
      w[i] = loss_w / std::max(std::abs(r), eps);
    }
    const Eigen::MatrixXd Aw = w.asDiagonal() * A;
    x = (A.transpose() * Aw).fullPivLu().solve(A.transpose() * (w.asDiagonal() * y));
  }
  return x;
}

inline Eigen::VectorXd envelope_fit(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                                    EnvelopeSide side, const EnvelopeOptions& opt = {}) {
  if (opt.method == EnvelopeMethod::quantile)
    return envelope_quantile(A, y, side, opt.quantile);
  return envelope_constrained_lsq(A, y, side, opt.max_iterations);
}

}  // namespace bushvac
