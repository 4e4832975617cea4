#pragma once

#include <algorithm>
#include <cmath>

#include "bushvac/constants.hpp"
#include "bushvac/errors.hpp"

namespace bushvac {

/// Cabin temperature setpoint profiles over the ambient temperature:
/// a quadratic for heating and a continuous two-segment piecewise-linear
/// curve for cooling. Coefficients live in degC for readable exports;
/// evaluation is in kelvin.
struct SetpointProfile {
  // t_set_heat [degC] = heat_c0 + heat_c1*t + heat_c2*t^2, t = t_amb [degC]
  double heat_c0 = 21.0;
  double heat_c1 = 0.0;
  double heat_c2 = 0.0;
  // Cooling: value at the breakpoint plus one slope per side.
  double cool_break_c = 20.0;   // breakpoint ambient [degC]
  double cool_value_c = 24.0;   // setpoint at the breakpoint [degC]
  double cool_slope_lo = 0.0;   // [-] below the breakpoint
  double cool_slope_hi = 0.3;   // [-] above the breakpoint
  // Ambient validity range [K]; evaluation clamps into it.
  double valid_lo_k = celsius_to_kelvin(-15.0);
  double valid_hi_k = celsius_to_kelvin(40.0);

  double heating_setpoint(double t_amb_k) const {
    const double t = kelvin_to_celsius(clamp_range(t_amb_k));
    return celsius_to_kelvin(heat_c0 + t * (heat_c1 + t * heat_c2));
  }

  double cooling_setpoint(double t_amb_k) const {
    const double t = kelvin_to_celsius(clamp_range(t_amb_k));
    const double dt = t - cool_break_c;
    return celsius_to_kelvin(cool_value_c + (dt < 0.0 ? cool_slope_lo : cool_slope_hi) * dt);
  }

  /// Rejects crossing profiles (heating setpoint must stay strictly below
  /// cooling over the whole validity range).
  void validate() const {
    if (!(valid_lo_k < valid_hi_k)) throw ConfigError("setpoint profile: empty validity range");
    constexpr int kGrid = 200;
    for (int i = 0; i <= kGrid; ++i) {
      const double t = valid_lo_k + (valid_hi_k - valid_lo_k) * i / kGrid;
      if (!(heating_setpoint(t) < cooling_setpoint(t)))
        throw ConfigError("setpoint profile: heating curve crosses cooling curve at t_amb = " +
                          std::to_string(kelvin_to_celsius(t)) + " degC");
    }
  }

 private:
  double clamp_range(double t) const { return std::clamp(t, valid_lo_k, valid_hi_k); }
};

/// Air-curtain activation thresholds on the cabin-ambient temperature
/// difference, one per heat-flow direction.
struct CurtainThresholds {
  double theta_heat_k = 6.0;  // heating: curtains on when t_cab - t_amb exceeds this
  double theta_cool_k = 6.0;  // cooling: curtains on when t_amb - t_cab exceeds this
};

}  // namespace bushvac
