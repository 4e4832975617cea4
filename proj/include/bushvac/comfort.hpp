#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "bushvac/constants.hpp"
#include "bushvac/errors.hpp"

namespace bushvac {

/// Fixed comfort-model conditions plus the (ambient-dependent) clothing
/// insulation for the sample under evaluation.
struct ComfortContext {
  double v_air = 0.1;          // [m/s]
  double rel_humidity = 0.40;  // [-]
  double met = 1.2;            // [met], 1 met = 58.15 W/m^2
  double r_clo = 1.0;          // [clo]

  void validate() const {
    if (!(v_air > 0.0)) throw ConfigError("comfort context: v_air must be > 0");
    if (!(rel_humidity > 0.0 && rel_humidity < 1.0))
      throw ConfigError("comfort context: rel_humidity must lie in (0,1)");
    if (!(met > 0.0)) throw ConfigError("comfort context: met must be > 0");
    if (!(r_clo >= 0.0)) throw ConfigError("comfort context: r_clo must be >= 0");
  }
};

/// Clothing insulation model: UTCI ensemble polynomial in the ambient
/// temperature, clamped to [0.4, 1.8] clo. A user-supplied lookup table
/// (piecewise-linear in ambient temperature) can replace the polynomial.
struct ClothingModel {
  double clamp_lo = 0.4;
  double clamp_hi = 1.8;
  // Optional override table: (t_amb [K], clo) pairs, ascending in t_amb.
  std::vector<std::pair<double, double>> table;

  double operator()(double t_amb_k) const {
    const double t_c = kelvin_to_celsius(t_amb_k);
    if (!(t_c >= -40.0 && t_c <= 50.0))
      throw ConfigError("clothing model: ambient temperature outside [-40, 50] degC");
    double clo;
    if (!table.empty()) {
      clo = interpolate(t_amb_k);
    } else {
      clo = 1.372 - 0.01866 * t_c - 0.0004849 * t_c * t_c - 9.333e-6 * t_c * t_c * t_c;
    }
    return std::clamp(clo, clamp_lo, clamp_hi);
  }

 private:
  double interpolate(double t) const {
    if (t <= table.front().first) return table.front().second;
    if (t >= table.back().first) return table.back().second;
    auto it = std::lower_bound(table.begin(), table.end(), t,
                               [](const auto& row, double v) { return row.first < v; });
    auto prev = it - 1;
    const double a = (t - prev->first) / (it->first - prev->first);
    return prev->second + a * (it->second - prev->second);
  }
};

inline double clothing_insulation(double t_amb_k) { return ClothingModel{}(t_amb_k); }

/// Predicted mean vote per the Fanger / ISO 7730 model. Inputs in kelvin;
/// the clothing-surface-temperature fixed point is iterated to 1e-10 so the
/// result is smooth enough for finite-difference Jacobians.
inline double pmv(double t_cab_k, double t_mr_k, const ComfortContext& ctx) {
  ctx.validate();
  for (double t : {t_cab_k, t_mr_k})
    if (!(t > kTempBandLow && t < kTempBandHigh))
      throw ConfigError("pmv: temperature outside the plausibility band");

  const double ta = kelvin_to_celsius(t_cab_k);
  const double tr = kelvin_to_celsius(t_mr_k);
  const double pa = ctx.rel_humidity * 100.0 * 10.0 * std::exp(16.6536 - 4030.183 / (ta + 235.0));
  const double icl = 0.155 * ctx.r_clo;  // [m^2 K / W]
  const double m = ctx.met * 58.15;      // [W/m^2]
  const double mw = m;                   // no external work
  const double fcl = icl <= 0.078 ? 1.0 + 1.29 * icl : 1.05 + 0.645 * icl;
  const double hcf = 12.1 * std::sqrt(ctx.v_air);
  const double taa = ta + 273.0;
  const double tra = tr + 273.0;

  const double p1 = icl * fcl;
  const double p2 = p1 * 3.96;
  const double p3 = p1 * 100.0;
  const double p4 = p1 * taa;
  const double p5 = 308.7 - 0.028 * mw + p2 * std::pow(tra / 100.0, 4);

  auto pow4 = [](double v) { return (v * v) * (v * v); };
  double xn = taa / 100.0 + (35.5 - ta) / (3.5 * icl + 0.1) / 100.0;
  double xf = xn * 2.0;  // forces at least one sweep
  double hc = hcf;
  int iter = 0;
  while (std::abs(xn - xf) > 1e-10) {
    xf = 0.5 * (xf + xn);
    const double hcn = 2.38 * std::sqrt(std::sqrt(std::abs(100.0 * xf - taa)));
    hc = std::max(hcf, hcn);
    xn = (p5 + p4 * hc - p2 * pow4(xf)) / (100.0 + p3 * hc);
    if (++iter > 200)
      throw NumericalError("pmv: clothing surface temperature iteration did not converge");
  }
  const double tcl = 100.0 * xn - 273.0;

  const double hl1 = 3.05e-3 * (5733.0 - 6.99 * mw - pa);          // skin diffusion
  const double hl2 = mw > 58.15 ? 0.42 * (mw - 58.15) : 0.0;       // sweating
  const double hl3 = 1.7e-5 * m * (5867.0 - pa);                   // latent respiration
  const double hl4 = 0.0014 * m * (34.0 - ta);                     // dry respiration
  const double hl5 = 3.96 * fcl * (pow4(xn) - pow4(tra / 100.0));
  const double hl6 = fcl * hc * (tcl - ta);

  const double ts = 0.303 * std::exp(-0.036 * m) + 0.028;
  return ts * (mw - hl1 - hl2 - hl3 - hl4 - hl5 - hl6);
}

}  // namespace bushvac
