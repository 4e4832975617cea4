#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "bushvac/comfort.hpp"
#include "bushvac/errors.hpp"
#include "bushvac/rng.hpp"

namespace bushvac {

constexpr int kSurrogateHidden = 5;

/// Closed-form tanh network approximating the PMV as a function of cabin and
/// mean radiant temperature, fitted for one clothing level. Replaces the
/// iterative comfort model where a closed-form expression is required.
struct PmvSurrogate {
  int version = 1;
  double r_clo = 1.0;
  // Normalization: u = (x - mid) / halfrange, componentwise (t_cab, t_mr).
  std::array<double, 2> in_mid{};
  std::array<double, 2> in_halfrange{1.0, 1.0};
  // Parameters: psi = b2 + sum_i w2[i] * tanh(b1[i] + w1[i][0]*u0 + w1[i][1]*u1)
  std::array<std::array<double, 2>, kSurrogateHidden> w1{};
  std::array<double, kSurrogateHidden> b1{};
  std::array<double, kSurrogateHidden> w2{};
  double b2 = 0.0;
  // Fit metadata
  std::array<double, 2> box_lo{};  // training box [K]
  std::array<double, 2> box_hi{};
  double mae_heldout = 0.0;

  double eval(double t_cab_k, double t_mr_k) const {
    const double u0 = (t_cab_k - in_mid[0]) / in_halfrange[0];
    const double u1 = (t_mr_k - in_mid[1]) / in_halfrange[1];
    double acc = b2;
    for (int i = 0; i < kSurrogateHidden; ++i)
      acc += w2[i] * std::tanh(b1[i] + w1[i][0] * u0 + w1[i][1] * u1);
    return acc;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = version;
    j["architecture"] = {{"inputs", 2}, {"hidden", kSurrogateHidden}, {"activation", "tanh"}};
    j["r_clo"] = r_clo;
    j["normalization"] = {{"mid", in_mid}, {"halfrange", in_halfrange}};
    nlohmann::json w1j = nlohmann::json::array();
    for (const auto& row : w1) w1j.push_back(row);
    j["weights"] = {{"w1", w1j}, {"b1", b1}, {"w2", w2}, {"b2", b2}};
    j["training_box_k"] = {{"lo", box_lo}, {"hi", box_hi}};
    j["mae_heldout"] = mae_heldout;
    return j;
  }

  static PmvSurrogate from_json(const nlohmann::json& j) {
    PmvSurrogate s;
    s.version = j.at("version").get<int>();
    if (s.version != 1) throw ConfigError("unsupported surrogate document version");
    if (j.at("architecture").at("hidden").get<int>() != kSurrogateHidden ||
        j.at("architecture").at("activation").get<std::string>() != "tanh")
      throw ConfigError("surrogate document architecture mismatch");
    s.r_clo = j.at("r_clo").get<double>();
    j.at("normalization").at("mid").get_to(s.in_mid);
    j.at("normalization").at("halfrange").get_to(s.in_halfrange);
    const auto& w = j.at("weights");
    for (int i = 0; i < kSurrogateHidden; ++i) w.at("w1").at(i).get_to(s.w1[i]);
    w.at("b1").get_to(s.b1);
    w.at("w2").get_to(s.w2);
    s.b2 = w.at("b2").get<double>();
    j.at("training_box_k").at("lo").get_to(s.box_lo);
    j.at("training_box_k").at("hi").get_to(s.box_hi);
    s.mae_heldout = j.at("mae_heldout").get<double>();
    return s;
  }
};

struct SurrogateFitOptions {
  // Training box over (t_cab, t_mr) [K]; matches the range the steady-state
  // optimizer visits.
  std::array<double, 2> box_lo{celsius_to_kelvin(10.0), celsius_to_kelvin(10.0)};
  std::array<double, 2> box_hi{celsius_to_kelvin(35.0), celsius_to_kelvin(35.0)};
  int grid_n = 26;
  int restarts = 10;
  std::uint64_t seed = 1234;
  int max_lm_iterations = 300;
  double mae_threshold = 0.02;
};

namespace surrogate_detail {

constexpr int kParams = kSurrogateHidden * 4 + 1;  // w1 (2/unit), b1, w2, b2

inline void unpack(const Eigen::VectorXd& theta, PmvSurrogate& s) {
  int k = 0;
  for (int i = 0; i < kSurrogateHidden; ++i) {
    s.w1[i][0] = theta[k++];
    s.w1[i][1] = theta[k++];
  }
  for (int i = 0; i < kSurrogateHidden; ++i) s.b1[i] = theta[k++];
  for (int i = 0; i < kSurrogateHidden; ++i) s.w2[i] = theta[k++];
  s.b2 = theta[k++];
}

/// Residuals and analytic Jacobian of the network on normalized samples.
inline void residuals(const Eigen::VectorXd& theta, const Eigen::MatrixXd& u,
                      const Eigen::VectorXd& y, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
  const int n = static_cast<int>(u.rows());
  r.resize(n);
  if (jac) jac->resize(n, kParams);
  for (int k = 0; k < n; ++k) {
    const double u0 = u(k, 0), u1 = u(k, 1);
    double acc = theta[kParams - 1];
    std::array<double, kSurrogateHidden> th{};
    for (int i = 0; i < kSurrogateHidden; ++i) {
      const double z = theta[2 * kSurrogateHidden + i] + theta[2 * i] * u0 + theta[2 * i + 1] * u1;
      th[i] = std::tanh(z);
      acc += theta[3 * kSurrogateHidden + i] * th[i];
    }
    r[k] = acc - y[k];
    if (jac) {
      for (int i = 0; i < kSurrogateHidden; ++i) {
        const double w2i = theta[3 * kSurrogateHidden + i];
        const double dz = w2i * (1.0 - th[i] * th[i]);
        (*jac)(k, 2 * i) = dz * u0;
        (*jac)(k, 2 * i + 1) = dz * u1;
        (*jac)(k, 2 * kSurrogateHidden + i) = dz;
        (*jac)(k, 3 * kSurrogateHidden + i) = th[i];
      }
      (*jac)(k, kParams - 1) = 1.0;
    }
  }
}

}  // namespace surrogate_detail

/// Least-squares fit of the tanh network against the exact comfort model on
/// a regular grid, Levenberg-Marquardt with multi-start. Throws
/// NumericalError (reporting the achieved MAE) when the held-out MAE stays
/// above the threshold.
inline PmvSurrogate fit_pmv_surrogate(double r_clo, const ComfortContext& base,
                                      const SurrogateFitOptions& opt = {}) {
  using surrogate_detail::kParams;
  ComfortContext ctx = base;
  ctx.r_clo = r_clo;

  PmvSurrogate proto;
  proto.r_clo = r_clo;
  proto.box_lo = opt.box_lo;
  proto.box_hi = opt.box_hi;
  for (int a = 0; a < 2; ++a) {
    proto.in_mid[a] = 0.5 * (opt.box_lo[a] + opt.box_hi[a]);
    proto.in_halfrange[a] = 0.5 * (opt.box_hi[a] - opt.box_lo[a]);
  }

  auto build_grid = [&](int n, double shift, Eigen::MatrixXd& u, Eigen::VectorXd& y) {
    u.resize(n * n, 2);
    y.resize(n * n);
    int k = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j, ++k) {
        const double a0 = (i + shift) / (n - 1 + 2.0 * shift);
        const double a1 = (j + shift) / (n - 1 + 2.0 * shift);
        const double t_cab = opt.box_lo[0] + a0 * (opt.box_hi[0] - opt.box_lo[0]);
        const double t_mr = opt.box_lo[1] + a1 * (opt.box_hi[1] - opt.box_lo[1]);
        u(k, 0) = (t_cab - proto.in_mid[0]) / proto.in_halfrange[0];
        u(k, 1) = (t_mr - proto.in_mid[1]) / proto.in_halfrange[1];
        y[k] = pmv(t_cab, t_mr, ctx);
      }
    }
  };

  Eigen::MatrixXd u_train, u_test;
  Eigen::VectorXd y_train, y_test;
  build_grid(opt.grid_n, 0.0, u_train, y_train);
  build_grid(opt.grid_n - 1, 0.5, u_test, y_test);  // staggered held-out grid

  Rng rng(opt.seed);
  Eigen::VectorXd best_theta;
  double best_mse = std::numeric_limits<double>::infinity();

  for (int restart = 0; restart < opt.restarts; ++restart) {
    Rng r = rng.fork(restart + 1);
    Eigen::VectorXd theta(kParams);
    for (int i = 0; i < kSurrogateHidden; ++i) {
      theta[2 * i] = r.uniform(-1.5, 1.5);
      theta[2 * i + 1] = r.uniform(-1.5, 1.5);
      theta[2 * kSurrogateHidden + i] = r.uniform(-1.0, 1.0);
      theta[3 * kSurrogateHidden + i] = r.uniform(-1.0, 1.0);
    }
    theta[kParams - 1] = y_train.mean();

    Eigen::VectorXd res;
    Eigen::MatrixXd jac;
    surrogate_detail::residuals(theta, u_train, y_train, res, &jac);
    double mse = res.squaredNorm();
    double lambda = 1e-3;
    for (int it = 0; it < opt.max_lm_iterations; ++it) {
      Eigen::MatrixXd jtj = jac.transpose() * jac;
      Eigen::VectorXd jtr = jac.transpose() * res;
      jtj.diagonal().array() += lambda;
      Eigen::VectorXd step = jtj.ldlt().solve(-jtr);
      if (!step.allFinite() || step.norm() < 1e-13) break;
      Eigen::VectorXd theta_trial = theta + step;
      Eigen::VectorXd res_trial;
      surrogate_detail::residuals(theta_trial, u_train, y_train, res_trial, nullptr);
      const double mse_trial = res_trial.squaredNorm();
      if (mse_trial < mse) {
        theta = std::move(theta_trial);
        mse = mse_trial;
        lambda = std::max(lambda * 0.4, 1e-12);
        surrogate_detail::residuals(theta, u_train, y_train, res, &jac);
      } else {
        lambda *= 4.0;
        if (lambda > 1e10) break;
      }
    }
    if (mse < best_mse) {
      best_mse = mse;
      best_theta = theta;
    }
  }

  PmvSurrogate out = proto;
  surrogate_detail::unpack(best_theta, out);
  double mae = 0.0;
  for (int k = 0; k < y_test.size(); ++k) {
    const double t_cab = u_test(k, 0) * proto.in_halfrange[0] + proto.in_mid[0];
    const double t_mr = u_test(k, 1) * proto.in_halfrange[1] + proto.in_mid[1];
    mae += std::abs(out.eval(t_cab, t_mr) - y_test[k]);
  }
  mae /= static_cast<double>(y_test.size());
  out.mae_heldout = mae;
  if (mae > opt.mae_threshold)
    throw NumericalError("surrogate fit failed: held-out MAE " + std::to_string(mae) +
                         " above threshold " + std::to_string(opt.mae_threshold));
  return out;
}

}  // namespace bushvac
