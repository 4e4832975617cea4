#pragma once

#include <cmath>
#include <string>

#include "bushvac/constants.hpp"
#include "bushvac/errors.hpp"
#include "bushvac/time.hpp"

namespace bushvac {


/// Temperatures of the five thermal reservoirs plus the lag-filtered HVAC
/// heat flow. This is the state vector of the dynamic model.
struct ThermalState {
  double t_rh = 293.15;        // radiant heater panels [K]
  double t_int = 293.15;       // interior (seats, rails) [K]
  double t_cab = 293.15;       // cabin air [K]
  double t_shell_in = 293.15;  // inside shell [K]
  double t_shell_out = 293.15; // outside shell [K]
  double q_hc_filtered = 0.0;  // first-order-filtered HVAC heat flow [W]

  bool plausible() const {
    auto ok = [](double t) { return std::isfinite(t) && t > kTempBandLow && t < kTempBandHigh; };
    return ok(t_rh) && ok(t_int) && ok(t_cab) && ok(t_shell_in) && ok(t_shell_out) &&
           std::isfinite(q_hc_filtered);
  }
};

enum class HcMode : int { cooling = -1, passive = 0, heating = 1 };

inline std::string to_string(HcMode m) {
  switch (m) {
    case HcMode::heating: return "heating";
    case HcMode::cooling: return "cooling";
    default: return "passive";
  }
}

/// HVAC actuator setting: the two electrical powers, the heating/cooling
/// mode, and the two on/off auxiliaries.
struct ControlInput {
  double p_hc = 0.0;   // [W] air heating/cooling unit electrical power, >= 0
  double p_rh = 0.0;   // [W] radiant heater electrical power, >= 0
  HcMode mode = HcMode::passive;
  bool aircurt_on = false;
  bool rh_on = false;

  void validate(const ModelConstants& c) const {
    if (!(p_hc >= 0.0)) throw ConfigError("control input: p_hc must be >= 0");
    if (!(p_rh >= 0.0)) throw ConfigError("control input: p_rh must be >= 0");
    if (!rh_on && p_rh != 0.0) throw ConfigError("control input: p_rh must be 0 when RH disabled");
    if (mode == HcMode::passive && p_hc != 0.0)
      throw ConfigError("control input: p_hc must be 0 in passive mode");
    const double limit = mode == HcMode::cooling ? c.p_hc_max_cool : c.p_hc_max_heat;
    if (mode != HcMode::passive && p_hc > limit * (1.0 + 1e-9))
      throw ConfigError("control input: p_hc exceeds the unit power limit");
  }
};

/// Ambient and operating conditions acting on the bus at one instant (or as
/// an hourly average).
struct Disturbance {
  double t_amb = 293.15;   // [K]
  double i_dni = 0.0;      // direct normal irradiance [W/m^2]
  double i_dhi = 0.0;      // diffuse horizontal irradiance [W/m^2]
  Timestamp when;
  double n_pass = 0.0;     // passengers (real-valued after averaging)
  double zeta_door = 0.0;  // fraction of door area open [0,1]
  double zeta_sh = 0.0;    // shadow fraction [0,1]

  void validate() const {
    if (!(std::isfinite(t_amb) && t_amb > kTempBandLow && t_amb < kTempBandHigh))
      throw ConfigError("disturbance: t_amb outside the plausibility band");
    if (!(i_dni >= 0.0 && i_dhi >= 0.0)) throw ConfigError("disturbance: irradiance must be >= 0");
    if (!(n_pass >= 0.0)) throw ConfigError("disturbance: n_pass must be >= 0");
    if (!(zeta_door >= 0.0 && zeta_door <= 1.0))
      throw ConfigError("disturbance: zeta_door must lie in [0,1]");
    if (!(zeta_sh >= 0.0 && zeta_sh <= 1.0))
      throw ConfigError("disturbance: zeta_sh must lie in [0,1]");
  }
};

/// One field per arrow of the thermal network diagram.
struct HeatFlows {
  // Convection / conduction
  double q_h_shell_in = 0.0;   // cabin air -> inside shell
  double q_h_int = 0.0;        // interior -> cabin air
  double q_h_shell_out = 0.0;  // outside shell -> ambient
  double q_h_rh = 0.0;         // RH panels -> cabin air
  double q_k = 0.0;            // inside shell -> outside shell
  // Radiation
  double q_r_shell_out = 0.0;  // outside shell -> sky/ambient
  double q_r_rh_shell = 0.0;   // RH panels -> inside shell
  double q_r_rh_int = 0.0;     // RH panels -> interior
  double q_r_int_shell = 0.0;  // interior -> inside shell
  // Doors
  double q_door = 0.0;         // cabin air -> ambient through open doors
  // Solar
  double q_sol_shell_out = 0.0;
  double q_sol_int = 0.0;
  double q_sol_shell_in = 0.0;
  // Sources
  double q_hc_ss = 0.0;        // steady-state HVAC heat flow (signed)
  double q_pass = 0.0;         // metabolic heat
  double q_other = 0.0;        // electric components, lights, screens
};

/// Newton's-law convective flows plus shell conduction.
inline void convective_and_conductive_flows(const ThermalState& s, const Disturbance& d,
                                            const ModelConstants& c, HeatFlows& f) {
  f.q_h_shell_in = c.h_conv_inside * c.area_shell * (s.t_cab - s.t_shell_in);
  f.q_h_int = c.h_conv_inside * c.area_interior * (s.t_int - s.t_cab);
  f.q_h_shell_out = c.h_conv_outside * c.area_shell * (s.t_shell_out - d.t_amb);
  f.q_h_rh = c.h_conv_rh * c.area_rh * (s.t_rh - s.t_cab);
  f.q_k = c.k_shell * c.area_shell * (s.t_shell_in - s.t_shell_out);
}

/// Fourth-power radiative exchange: shell to ambient and the in-cabin
/// enclosure (RH panels, interior, inside shell).
inline void radiative_flows(const ThermalState& s, const Disturbance& d, const ModelConstants& c,
                            HeatFlows& f) {
  auto p4 = [](double t) { return t * t * t * t; };
  f.q_r_shell_out = c.sigma_sb * c.area_shell * (p4(s.t_shell_out) - p4(d.t_amb));
  f.q_r_rh_shell = c.sigma_sb * c.area_rh * c.view_rh_to_shell * (p4(s.t_rh) - p4(s.t_shell_in));
  f.q_r_rh_int = c.sigma_sb * c.area_rh * c.view_rh_to_int * (p4(s.t_rh) - p4(s.t_int));
  f.q_r_int_shell =
      c.sigma_sb * c.area_interior * c.view_int_to_shell * (p4(s.t_int) - p4(s.t_shell_in));
}

/// Even smoothing of sqrt(|x|): ((x^2 + 0.01)^(1/4). Used in place of the
/// square root of the door model inside derivative-based solvers.
inline double smooth_sqrt(double x) { return std::pow(x * x + 0.01, 0.25); }

/// Buoyancy-driven door air exchange (Bernoulli + ideal gas). Positive when
/// the cabin loses heat. `smooth` swaps the square root for its smooth
/// approximation; the linear delta-T factor still zeroes the flow at
/// t_cab == t_amb in both variants.
inline double door_exchange(const ThermalState& s, const Disturbance& d, const ControlInput& u,
                            const ModelConstants& c, bool smooth) {
  const double dt = s.t_cab - d.t_amb;
  const double geom = c.rho_air * c.discharge_coeff *
                      std::sqrt(c.grav * c.door_height * c.door_height * c.door_height) *
                      c.door_width_total / 3.0;
  const double root = smooth ? smooth_sqrt(dt) / std::sqrt(d.t_amb)
                             : std::sqrt(std::abs(dt) / d.t_amb);
  double q = geom * root * dt * c.cp_air * d.zeta_door;
  if (u.aircurt_on && c.curtains_installed) q *= 1.0 - c.aircurt_reduction;
  return q;
}

/// Blower power of the door air curtains; zero when disabled, when doors are
/// closed, or when no curtains are installed.
inline double air_curtain_power(const Disturbance& d, const ControlInput& u,
                                const ModelConstants& c) {
  if (!u.aircurt_on || !c.curtains_installed) return 0.0;
  return d.zeta_door * c.p_aircurt0;
}

struct SolarIrradiance {
  double on_roof = 0.0;  // [W/m^2]
  double on_wall = 0.0;  // [W/m^2], averaged over driving directions
};

/// Mean irradiance on roof and walls from DNI/DHI and the solar altitude.
/// Below the horizon the direct-beam projections clamp to zero; diffuse
/// irradiance still applies.
inline SolarIrradiance mean_irradiance(const Disturbance& d, double sun_altitude_rad) {
  SolarIrradiance irr;
  const double sin_b = std::sin(sun_altitude_rad);
  const double cos_b = std::cos(sun_altitude_rad);
  const double direct_roof = sun_altitude_rad > 0.0 ? sin_b : 0.0;
  const double direct_wall = sun_altitude_rad > 0.0 ? cos_b / M_PI : 0.0;
  irr.on_roof = direct_roof * d.i_dni + d.i_dhi;
  irr.on_wall = direct_wall * d.i_dni + 0.5 * d.i_dhi;
  return irr;
}

/// Solar gains on the outside shell and, through the windows, on the
/// interior and inside shell.
inline void solar_gains(const Disturbance& d, double sun_altitude_rad, const ModelConstants& c,
                        HeatFlows& f) {
  const SolarIrradiance irr = mean_irradiance(d, sun_altitude_rad);
  const double exposure = 1.0 - d.zeta_sh;
  f.q_sol_shell_out =
      exposure * (c.area_roof * irr.on_roof * c.absorptivity_paint * (1.0 - c.frac_roof_covered) +
                  c.area_wall * irr.on_wall * (1.0 - c.frac_wall_windows) * c.absorptivity_paint);
  const double transmitted =
      exposure * c.area_wall * irr.on_wall * c.frac_wall_windows * c.win_transmissivity;
  f.q_sol_int = transmitted * c.frac_interior_absorb;
  f.q_sol_shell_in = transmitted * (1.0 - c.frac_interior_absorb);
}

/// COP of the air heating/cooling unit for the requested mode, evaluated at
/// the current cabin/ambient reservoir temperatures.
inline double hvac_cop(HcMode mode, double t_cab, double t_amb, const ModelConstants& c) {
  if (mode == HcMode::passive) return 0.0;
  if (mode == HcMode::heating) {
    if (c.heater_kind == HeaterKind::none)
      throw ConfigError("heating requested but no heater kind configured");
    if (c.heater_kind == HeaterKind::ptc) return 1.0;
    const double lift = t_cab - t_amb + c.cop.approach_dt;
    const double floor = c.cop.second_law_eff * t_cab / c.cop.cap;
    return c.cop.second_law_eff * t_cab / std::max(lift, floor);
  }
  // Cooling: heat pumped from the cabin to ambient.
  const double lift = t_amb - t_cab + c.cop.approach_dt;
  const double floor = c.cop.second_law_eff * t_cab / c.cop.cap;
  return c.cop.second_law_eff * t_cab / std::max(lift, floor);
}

/// Steady-state HVAC heat flow u_hc * gamma * P_hc and the COP used.
inline std::pair<double, double> hvac_heat_and_cop(const ControlInput& u, const ThermalState& s,
                                                   const Disturbance& d, const ModelConstants& c) {
  if (u.mode == HcMode::passive) return {0.0, 0.0};
  const double gamma = hvac_cop(u.mode, s.t_cab, d.t_amb, c);
  return {static_cast<int>(u.mode) * gamma * u.p_hc, gamma};
}

/// Metabolic and constant internal gains.
inline void internal_gains(const Disturbance& d, const ModelConstants& c, HeatFlows& f) {
  f.q_pass = d.n_pass * c.q_met_per_person;
  f.q_other = c.q_other;
}

/// All heat flows of the network at one instant. `smooth_door` selects the
/// smooth door-loss variant (used by the steady-state solver).
inline HeatFlows compute_heat_flows(const ThermalState& s, const ControlInput& u,
                                    const Disturbance& d, double sun_altitude_rad,
                                    const ModelConstants& c, bool smooth_door) {
  HeatFlows f;
  convective_and_conductive_flows(s, d, c, f);
  radiative_flows(s, d, c, f);
  f.q_door = door_exchange(s, d, u, c, smooth_door);
  solar_gains(d, sun_altitude_rad, c, f);
  internal_gains(d, c, f);
  f.q_hc_ss = hvac_heat_and_cop(u, s, d, c).first;
  return f;
}

/// Time derivative of ThermalState. The cabin balance uses the filtered
/// HVAC heat flow; the filter state relaxes toward the steady-state value
/// with the VCC time constant.
struct StateDerivative {
  double d_t_rh = 0.0;
  double d_t_int = 0.0;
  double d_t_cab = 0.0;
  double d_t_shell_in = 0.0;
  double d_t_shell_out = 0.0;
  double d_q_hc = 0.0;
};

inline StateDerivative reservoir_balances(const ThermalState& s, const ControlInput& u,
                                          const HeatFlows& f, const ModelConstants& c,
                                          double q_hc_effective) {
  StateDerivative dot;
  dot.d_t_rh = (u.p_rh - f.q_h_rh - f.q_r_rh_int - f.q_r_rh_shell) / c.cap_rh;
  dot.d_t_int = (f.q_sol_int + f.q_r_rh_int - f.q_h_int - f.q_r_int_shell) / c.cap_int;
  dot.d_t_cab = (f.q_pass + f.q_other + q_hc_effective + f.q_h_rh + f.q_h_int - f.q_h_shell_in -
                 f.q_door) /
                c.cap_cab;
  dot.d_t_shell_in =
      (f.q_h_shell_in + f.q_sol_shell_in + f.q_r_rh_shell + f.q_r_int_shell - f.q_k) /
      c.cap_shell_in;
  dot.d_t_shell_out =
      (f.q_k + f.q_sol_shell_out - f.q_h_shell_out - f.q_r_shell_out) / c.cap_shell_out;
  return dot;
}

inline StateDerivative ode_rhs(const ThermalState& s, const ControlInput& u, const Disturbance& d,
                               double sun_altitude_rad, const ModelConstants& c) {
  const HeatFlows f = compute_heat_flows(s, u, d, sun_altitude_rad, c, /*smooth_door=*/false);
  StateDerivative dot = reservoir_balances(s, u, f, c, s.q_hc_filtered);
  dot.d_q_hc = (f.q_hc_ss - s.q_hc_filtered) / c.tau_vcc;
  return dot;
}

/// Net heat crossing the system boundary (everything that is not an
/// internal reservoir-to-reservoir exchange), as it appears summed over the
/// five balances. Used by the dynamic energy audit.
inline double boundary_flow_sum(const ControlInput& u, const HeatFlows& f, double q_hc_effective) {
  return u.p_rh + f.q_sol_int + f.q_sol_shell_in + f.q_sol_shell_out + f.q_pass + f.q_other +
         q_hc_effective - f.q_door - f.q_h_shell_out - f.q_r_shell_out;
}

}  // namespace bushvac
