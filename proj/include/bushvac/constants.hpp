#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bushvac/errors.hpp"

namespace bushvac {

constexpr double kKelvinOffset = 273.15;
constexpr double kTempBandLow = 200.0;   // [K] plausibility band for all reservoirs
constexpr double kTempBandHigh = 400.0;

inline double celsius_to_kelvin(double c) { return c + kKelvinOffset; }
inline double kelvin_to_celsius(double k) { return k - kKelvinOffset; }

/// Air heating/cooling hardware for the heating direction.
enum class HeaterKind { none, ptc, hp };

inline std::string to_string(HeaterKind k) {
  switch (k) {
    case HeaterKind::ptc: return "ptc";
    case HeaterKind::hp: return "hp";
    default: return "none";
  }
}

/// Clamped second-law-efficiency COP model. COP decreases with the
/// reservoir temperature difference and saturates at `cap` for small lifts.
struct CopParams {
  double second_law_eff = 0.45;  // eta_II
  double approach_dt = 10.0;     // [K] added to the reservoir lift
  double cap = 5.0;              // upper bound on the COP
};

/// Physical and design constants of the bus thermal model. Defaults carry the
/// published values for the reference 18.7 m city bus; all fields can be
/// overridden from the run config, after which validate() re-checks the
/// geometric consistency relations.
struct ModelConstants {
  // Cabin geometry [m] / [m^2] / [m^3]
  double len_cab = 18.7;
  double wid_cab = 2.6;
  double hgt_cab = 2.4;
  double vol_cab = 116.7;
  double area_shell = 199.5;     // total hull surface
  double area_roof = 48.6;
  double area_wall = 102.2;
  double area_interior = 20.0;   // seats, rails, ...
  double area_rh = 4.0;          // 16 radiant ceiling panels in total
  int rh_panel_count = 16;
  double door_height = 1.95;
  double door_width_total = 4.42;

  // Heat capacities [J/K]
  double cap_cab = 146.6e3;
  double cap_int = 78.0e3;
  double cap_rh = 4800.0e3;
  double cap_shell_in = 856.1e3;
  double cap_shell_out = 856.1e3;

  // Convective / conductive transfer coefficients [W/(m^2 K)]
  double h_conv_inside = 8.01;
  double h_conv_outside = 20.67;
  double h_conv_rh = 2.1;
  double k_shell = 6.86;

  // View factors inside the cabin enclosure [-]
  double view_rh_to_int = 0.30;
  double view_rh_to_shell = 0.70;
  double view_int_to_shell = 0.94;

  // Solar / optical fractions [-]
  double absorptivity_paint = 0.30;
  double win_transmissivity = 0.46;
  double frac_roof_covered = 0.66;   // batteries etc. shading the roof
  double frac_wall_windows = 0.354;
  double frac_interior_absorb = 0.30;  // share of transmitted solar hitting the interior

  // Doors and air curtains
  double discharge_coeff = 0.6;
  double aircurt_reduction = 0.60;   // door-loss reduction when curtains run
  double p_aircurt0 = 1020.0;        // [W] blower power at fully open doors

  // Air properties and physical constants
  double rho_air = 1.25;             // [kg/m^3]
  double cp_air = 1005.0;            // [J/(kg K)]
  double sigma_sb = 5.67e-8;         // [W/(m^2 K^4)]
  double grav = 9.81;                // [m/s^2]

  // HVAC unit
  double tau_vcc = 20.0;             // [s] first-order VCC heat-flow lag
  double t_rh_target = 70.0 + 273.15;         // [K] radiant heater plate setpoint
  double q_met_per_person = 125.3;   // [W] seated metabolic rate
  double q_other = 500.0;            // [W] electronics, lights, screens (config-exposed)

  // Design variant switches
  HeaterKind heater_kind = HeaterKind::hp;
  bool rh_installed = false;
  bool curtains_installed = true;
  double p_hc_max_heat = 12.0e3;     // [W] electrical limit of the heating unit
  double p_hc_max_cool = 12.0e3;     // [W] electrical limit of the cooling unit
  CopParams cop;

  // Comfort-model constants
  double v_air_cab = 0.1;            // [m/s]
  double rel_humidity_cab = 0.40;    // [-]
  double met_rate = 1.2;             // [met]

  static ModelConstants defaults() { return ModelConstants{}; }

  /// Apply a named design variant string ("ptc" or "hp", plus "+rh" /
  /// "+curtains" suffixes, e.g. "hp,+curtains").
  void apply_design(const std::string& spec);

  /// Cross-checks the constants that are tied together geometrically.
  /// Throws ConfigError when an identity is violated by more than 0.1%.
  void validate() const;
};

namespace detail {
inline void check_identity(double actual, double expected, const char* what) {
  if (!(std::abs(actual - expected) <= 1e-3 * std::abs(expected)))
    throw ConfigError(std::string("model constants inconsistent: ") + what + " (have " +
                      std::to_string(actual) + ", geometry implies " + std::to_string(expected) +
                      ")");
}
}  // namespace detail

inline void ModelConstants::apply_design(const std::string& spec) {
  rh_installed = false;
  curtains_installed = false;
  heater_kind = HeaterKind::none;
  size_t pos = 0;
  while (pos < spec.size()) {
    size_t comma = spec.find(',', pos);
    std::string tok = spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? spec.size() : comma + 1;
    if (tok == "ptc") {
      heater_kind = HeaterKind::ptc;
      p_hc_max_heat = std::numeric_limits<double>::infinity();
    } else if (tok == "hp") {
      heater_kind = HeaterKind::hp;
      p_hc_max_heat = 12.0e3;
    } else if (tok == "+rh") {
      rh_installed = true;
    } else if (tok == "+curtains") {
      curtains_installed = true;
    } else if (!tok.empty()) {
      throw ConfigError("unknown design token '" + tok + "' (want ptc|hp[,+rh][,+curtains])");
    }
  }
  if (heater_kind == HeaterKind::none)
    throw ConfigError("design '" + spec + "' does not select a heater (ptc or hp)");
}

inline void ModelConstants::validate() const {
  using detail::check_identity;
  const double l = len_cab, w = wid_cab, h = hgt_cab;
  check_identity(area_shell, 2.0 * (l * w + l * h + w * h), "area_shell vs cabin box");
  check_identity(area_roof, l * w, "area_roof vs cabin footprint");
  check_identity(area_wall, 2.0 * (l + w) * h, "area_wall vs cabin perimeter");
  check_identity(vol_cab, l * w * h, "vol_cab vs cabin box");
  check_identity(cap_cab, rho_air * cp_air * vol_cab, "cap_cab vs air volume");
  check_identity(view_rh_to_int + view_rh_to_shell, 1.0, "RH view factors must sum to 1");
  check_identity(view_int_to_shell, 1.0 - area_rh * view_rh_to_int / area_interior,
                 "interior-to-shell view factor (reciprocity + summation)");

  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw ConfigError(std::string("model constant must be positive and finite: ") + what);
  };
  positive(cap_int, "cap_int");
  positive(cap_rh, "cap_rh");
  positive(cap_shell_in, "cap_shell_in");
  positive(cap_shell_out, "cap_shell_out");
  positive(h_conv_inside, "h_conv_inside");
  positive(h_conv_outside, "h_conv_outside");
  positive(h_conv_rh, "h_conv_rh");
  positive(k_shell, "k_shell");
  positive(tau_vcc, "tau_vcc");
  positive(q_met_per_person, "q_met_per_person");
  positive(p_hc_max_cool, "p_hc_max_cool");
  if (!(p_hc_max_heat > 0.0)) throw ConfigError("p_hc_max_heat must be positive");
  auto fraction = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0))
      throw ConfigError(std::string("model constant must lie in [0,1]: ") + what);
  };
  fraction(absorptivity_paint, "absorptivity_paint");
  fraction(win_transmissivity, "win_transmissivity");
  fraction(frac_roof_covered, "frac_roof_covered");
  fraction(frac_wall_windows, "frac_wall_windows");
  fraction(frac_interior_absorb, "frac_interior_absorb");
  fraction(aircurt_reduction, "aircurt_reduction");
  if (!(q_other >= 0.0)) throw ConfigError("q_other must be non-negative");
  if (!(rel_humidity_cab > 0.0 && rel_humidity_cab < 1.0))
    throw ConfigError("rel_humidity_cab must lie in (0,1)");
  positive(v_air_cab, "v_air_cab");
  positive(met_rate, "met_rate");
}

}  // namespace bushvac
