#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bushvac/annual.hpp"
#include "bushvac/csv.hpp"
#include "bushvac/dynamic.hpp"
#include "bushvac/mission.hpp"
#include "bushvac/setpoints.hpp"

namespace bushvac {

constexpr double kDoorShareFactor = 0.6;  // share of the four doors that open at a stop

/// Column-name mapping for externally produced mission files; defaults match
/// the schema of the bundled synthetic exporter.
struct MissionSchema {
  std::string timestamp = "timestamp[iso8601]";
  std::string passengers = "passenger_count[-]";
  std::string door_open = "door_open[flag]";
  std::string door_fraction = "door_fraction[-]";
  std::string shadow = "shadow_fraction[-]";
  std::string latitude = "latitude[deg]";
  std::string longitude = "longitude[deg]";
  std::string t_amb = "t_amb[degC]";
  std::string i_dni = "i_dni[W/m2]";
  std::string i_dhi = "i_dhi[W/m2]";
};

/// Loads a mission trace. Boolean door flags are scaled by the 60% door
/// share into zeta_door; a door_fraction column is taken as-is. Weather
/// columns are optional; when absent the trace must be joined with a
/// weather series before use.
inline MissionTrace load_mission(const std::string& path, const MissionSchema& schema = {}) {
  const CsvTable t = read_csv(path);
  const int c_time = t.require_column(schema.timestamp);
  const int c_pass = t.require_column(schema.passengers);
  const int c_flag = t.column(schema.door_open);
  const int c_frac = t.column(schema.door_fraction);
  if (c_flag < 0 && c_frac < 0)
    throw IoError(path + ": need either '" + schema.door_open + "' or '" + schema.door_fraction +
                  "'");
  const int c_shadow = t.column(schema.shadow);
  const int c_lat = t.column(schema.latitude);
  const int c_lon = t.column(schema.longitude);
  const int c_tamb = t.column(schema.t_amb);
  const int c_dni = t.column(schema.i_dni);
  const int c_dhi = t.column(schema.i_dhi);

  MissionTrace trace;
  trace.mission_id = path;
  trace.samples.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    Disturbance d;
    try {
      d.when = parse_timestamp(t.rows[r][c_time]);
    } catch (const IoError& e) {
      throw IoError(path + ":" + std::to_string(r + 2) + ": " + e.what());
    }
    d.n_pass = t.number(r, c_pass);
    if (c_frac >= 0) {
      d.zeta_door = t.number(r, c_frac);
    } else {
      const double flag = t.number(r, c_flag);
      if (flag != 0.0 && flag != 1.0)
        throw IoError(path + ":" + std::to_string(r + 2) + ": door_open flag must be 0 or 1");
      d.zeta_door = flag * kDoorShareFactor;
    }
    d.zeta_sh = c_shadow >= 0 ? t.number(r, c_shadow) : 0.0;
    d.t_amb = c_tamb >= 0 ? celsius_to_kelvin(t.number(r, c_tamb)) : celsius_to_kelvin(20.0);
    d.i_dni = c_dni >= 0 ? t.number(r, c_dni) : 0.0;
    d.i_dhi = c_dhi >= 0 ? t.number(r, c_dhi) : 0.0;
    if (r > 0 && d.when.epoch_s <= trace.samples.back().when.epoch_s)
      throw IoError(path + ":" + std::to_string(r + 2) + ": timestamps must increase strictly");
    try {
      d.validate();
    } catch (const ConfigError& e) {
      throw IoError(path + ":" + std::to_string(r + 2) + ": " + e.what());
    }
    if (r == 0 && c_lat >= 0 && c_lon >= 0)
      trace.coords = GeoPos{t.number(r, c_lat), t.number(r, c_lon)};
    trace.samples.push_back(d);
  }
  if (trace.samples.empty()) throw IoError(path + ": no data rows");
  return trace;
}

struct WeatherRecord {
  Timestamp when;
  double t_amb = 293.15;  // [K]
  double i_dni = 0.0;
  double i_dhi = 0.0;
};

inline std::vector<WeatherRecord> load_weather(const std::string& path,
                                               const MissionSchema& schema = {}) {
  const CsvTable t = read_csv(path);
  const int c_time = t.require_column(schema.timestamp);
  const int c_tamb = t.require_column(schema.t_amb);
  const int c_dni = t.require_column(schema.i_dni);
  const int c_dhi = t.require_column(schema.i_dhi);
  std::vector<WeatherRecord> out;
  out.reserve(t.rows.size());
  for (size_t r = 0; r < t.rows.size(); ++r) {
    WeatherRecord w;
    try {
      w.when = parse_timestamp(t.rows[r][c_time]);
    } catch (const IoError& e) {
      throw IoError(path + ":" + std::to_string(r + 2) + ": " + e.what());
    }
    w.t_amb = celsius_to_kelvin(t.number(r, c_tamb));
    w.i_dni = t.number(r, c_dni);
    w.i_dhi = t.number(r, c_dhi);
    if (w.i_dni < 0.0 || w.i_dhi < 0.0)
      throw IoError(path + ":" + std::to_string(r + 2) + ": irradiance must be >= 0");
    if (!out.empty() && w.when.epoch_s <= out.back().when.epoch_s)
      throw IoError(path + ":" + std::to_string(r + 2) + ": timestamps must increase strictly");
    out.push_back(w);
  }
  if (out.empty()) throw IoError(path + ": no data rows");
  return out;
}

/// Fills the weather fields of a mission trace: ambient temperature by
/// linear interpolation, irradiance by zero-order hold. The weather series
/// must cover the whole mission.
inline MissionTrace join_weather(MissionTrace trace, const std::vector<WeatherRecord>& weather) {
  if (weather.empty()) throw IoError("join_weather: weather series is empty");
  if (trace.samples.front().when.epoch_s < weather.front().when.epoch_s ||
      trace.samples.back().when.epoch_s > weather.back().when.epoch_s)
    throw IoError("join_weather: weather series does not cover the mission time range (" +
                  format_timestamp(trace.samples.front().when) + " .. " +
                  format_timestamp(trace.samples.back().when) + ")");
  size_t k = 0;
  for (auto& d : trace.samples) {
    while (k + 1 < weather.size() && weather[k + 1].when.epoch_s <= d.when.epoch_s) ++k;
    const WeatherRecord& a = weather[k];
    if (k + 1 < weather.size()) {
      const WeatherRecord& b = weather[k + 1];
      const double span = static_cast<double>(b.when.epoch_s - a.when.epoch_s);
      const double f = span > 0.0 ? (d.when.epoch_s - a.when.epoch_s) / span : 0.0;
      d.t_amb = a.t_amb + f * (b.t_amb - a.t_amb);
    } else {
      d.t_amb = a.t_amb;
    }
    d.i_dni = a.i_dni;  // zero-order hold
    d.i_dhi = a.i_dhi;
    d.validate();
  }
  return trace;
}

inline void export_mission(const MissionTrace& trace, const std::string& path) {
  CsvWriter w(path);
  w.header({"timestamp[iso8601]", "t_amb[degC]", "i_dni[W/m2]", "i_dhi[W/m2]",
            "passenger_count[-]", "door_fraction[-]", "shadow_fraction[-]", "latitude[deg]",
            "longitude[deg]"});
  for (const auto& d : trace.samples)
    w.line({format_timestamp(d.when), format_double(kelvin_to_celsius(d.t_amb)),
            format_double(d.i_dni), format_double(d.i_dhi), format_double(d.n_pass),
            format_double(d.zeta_door), format_double(d.zeta_sh),
            format_double(trace.coords.latitude_deg), format_double(trace.coords.longitude_deg)});
  w.close();
}

inline void export_solutions(const SampleSet& set, const std::vector<SteadyStateSolution>& sols,
                             const std::string& path, bool with_timing = false) {
  if (set.samples.size() != sols.size())
    throw ConfigError("export_solutions: solutions do not match the sample set");
  CsvWriter w(path);
  std::vector<std::string> cols = {
      "sample[-]",        "timestamp[iso8601]", "month[-]",        "weight[-]",
      "t_amb[degC]",      "i_dni[W/m2]",        "i_dhi[W/m2]",     "passengers[-]",
      "door_fraction[-]", "shadow_fraction[-]", "mode[-]",         "aircurt[flag]",
      "rh[flag]",         "p_hc[W]",            "p_rh[W]",         "p_aircurt[W]",
      "p_hvac[W]",        "q_heat[W]",          "q_cool[W]",       "cop[-]",
      "t_rh[degC]",       "t_int[degC]",        "t_cab[degC]",     "t_shell_in[degC]",
      "t_shell_out[degC]", "pmv[-]",            "feasible[flag]",  "residual[kW]",
      "iterations[-]",    "candidate[-]"};
  if (with_timing) cols.push_back("wall[ms]");
  w.header(cols);
  for (size_t i = 0; i < sols.size(); ++i) {
    const auto& s = set.samples[i];
    const auto& o = sols[i];
    std::vector<std::string> row = {
        std::to_string(i),
        format_timestamp(s.d.when),
        std::to_string(s.month),
        format_double(s.weight),
        format_double(kelvin_to_celsius(s.d.t_amb)),
        format_double(s.d.i_dni),
        format_double(s.d.i_dhi),
        format_double(s.d.n_pass),
        format_double(s.d.zeta_door),
        format_double(s.d.zeta_sh),
        to_string(o.inputs.mode),
        o.inputs.aircurt_on ? "1" : "0",
        o.inputs.rh_on ? "1" : "0",
        format_double(o.p_hc),
        format_double(o.p_rh),
        format_double(o.p_aircurt),
        format_double(o.p_hvac),
        format_double(o.q_heat),
        format_double(o.q_cool),
        format_double(o.gamma),
        format_double(kelvin_to_celsius(o.temperatures.t_rh)),
        format_double(kelvin_to_celsius(o.temperatures.t_int)),
        format_double(kelvin_to_celsius(o.temperatures.t_cab)),
        format_double(kelvin_to_celsius(o.temperatures.t_shell_in)),
        format_double(kelvin_to_celsius(o.temperatures.t_shell_out)),
        format_double(o.psi),
        o.feasible ? "1" : "0",
        format_double(o.residual_norm),
        std::to_string(o.iterations),
        o.candidate};
    if (with_timing) row.push_back(format_double(o.wall_ms));
    w.line(row);
  }
  w.close();
}

inline void export_trajectory(const Trajectory& traj, const std::string& path) {
  CsvWriter w(path);
  w.header({"time[s]",          "timestamp[iso8601]",  "t_amb[degC]",      "t_rh[degC]",
            "t_int[degC]",      "t_cab[degC]",         "t_shell_in[degC]", "t_shell_out[degC]",
            "q_hc_filtered[W]", "setpoint[degC]",      "mode[-]",          "aircurt[flag]",
            "rh[flag]",         "p_hc[W]",             "p_rh[W]",          "p_aircurt[W]",
            "p_hvac[W]",        "pmv[-]",              "passengers[-]",    "door_fraction[-]",
            "q_door[W]",        "q_h_shell_out[W]",    "q_r_shell_out[W]", "q_sol_shell_out[W]",
            "q_sol_int[W]",     "q_sol_shell_in[W]",   "q_pass[W]",        "q_other[W]",
            "q_h_rh[W]",        "q_h_int[W]",          "q_h_shell_in[W]",  "q_k[W]",
            "q_r_rh_shell[W]",  "q_r_rh_int[W]",       "q_r_int_shell[W]", "q_hc_ss[W]"});
  for (size_t i = 0; i < traj.size(); ++i) {
    const ThermalState& s = traj.state[i];
    const HeatFlows& f = traj.flows[i];
    const ControlInput& u = traj.input[i];
    const Timestamp ts = traj.start.plus_seconds(static_cast<std::int64_t>(traj.time_s[i]));
    const double set = traj.setpoint_k[i];
    w.line({format_double(traj.time_s[i]), format_timestamp(ts),
            format_double(kelvin_to_celsius(traj.t_amb[i])),
            format_double(kelvin_to_celsius(s.t_rh)), format_double(kelvin_to_celsius(s.t_int)),
            format_double(kelvin_to_celsius(s.t_cab)),
            format_double(kelvin_to_celsius(s.t_shell_in)),
            format_double(kelvin_to_celsius(s.t_shell_out)), format_double(s.q_hc_filtered),
            std::isfinite(set) ? format_double(kelvin_to_celsius(set)) : "",
            to_string(u.mode), u.aircurt_on ? "1" : "0", u.rh_on ? "1" : "0",
            format_double(u.p_hc), format_double(u.p_rh), format_double(traj.p_aircurt[i]),
            format_double(traj.p_hvac[i]), format_double(traj.psi[i]),
            format_double(traj.n_pass[i]), format_double(traj.zeta_door[i]),
            format_double(f.q_door), format_double(f.q_h_shell_out),
            format_double(f.q_r_shell_out), format_double(f.q_sol_shell_out),
            format_double(f.q_sol_int), format_double(f.q_sol_shell_in), format_double(f.q_pass),
            format_double(f.q_other), format_double(f.q_h_rh), format_double(f.q_h_int),
            format_double(f.q_h_shell_in), format_double(f.q_k), format_double(f.q_r_rh_shell),
            format_double(f.q_r_rh_int), format_double(f.q_r_int_shell),
            format_double(f.q_hc_ss)});
  }
  w.close();
}

inline nlohmann::json setpoint_profile_json(const SetpointProfile& p) {
  return nlohmann::json{
      {"heating", {{"c0_degC", p.heat_c0}, {"c1", p.heat_c1}, {"c2_per_degC", p.heat_c2}}},
      {"cooling",
       {{"break_degC", p.cool_break_c},
        {"value_degC", p.cool_value_c},
        {"slope_below", p.cool_slope_lo},
        {"slope_above", p.cool_slope_hi}}},
      {"valid_t_amb_degC",
       {kelvin_to_celsius(p.valid_lo_k), kelvin_to_celsius(p.valid_hi_k)}}};
}

inline SetpointProfile setpoint_profile_from_json(const nlohmann::json& j) {
  SetpointProfile p;
  p.heat_c0 = j.at("heating").at("c0_degC").get<double>();
  p.heat_c1 = j.at("heating").at("c1").get<double>();
  p.heat_c2 = j.at("heating").at("c2_per_degC").get<double>();
  p.cool_break_c = j.at("cooling").at("break_degC").get<double>();
  p.cool_value_c = j.at("cooling").at("value_degC").get<double>();
  p.cool_slope_lo = j.at("cooling").at("slope_below").get<double>();
  p.cool_slope_hi = j.at("cooling").at("slope_above").get<double>();
  p.valid_lo_k = celsius_to_kelvin(j.at("valid_t_amb_degC").at(0).get<double>());
  p.valid_hi_k = celsius_to_kelvin(j.at("valid_t_amb_degC").at(1).get<double>());
  p.validate();
  return p;
}

}  // namespace bushvac
