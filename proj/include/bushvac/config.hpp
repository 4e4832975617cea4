#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bushvac/annual.hpp"
#include "bushvac/comfort.hpp"
#include "bushvac/constants.hpp"
#include "bushvac/dynamic.hpp"
#include "bushvac/errors.hpp"
#include "bushvac/io.hpp"
#include "bushvac/steady.hpp"
#include "bushvac/version.hpp"

namespace bushvac {

/// Everything one run needs: model constants (with overrides applied),
/// design variant, comfort requirements, controller/evaluator selection,
/// seeds and paths. Unknown keys in the file are rejected.
struct RunConfig {
  ModelConstants constants;
  std::string design = "hp,+curtains";
  std::vector<ComfortRequirement> comfort = {{-1.0, 1.0}, {-0.7, 0.7}, {-0.5, 0.5}};
  PsiPath psi_path = PsiPath::exact;
  std::string controller = "replay";  // simulate: replay | causal
  std::uint64_t seed = 42;
  int passenger_count = kDefaultPassengerCount;
  unsigned threads = 0;  // 0 = hardware concurrency
  GeoPos geo;
  std::string out_dir = "out";
  std::optional<std::string> mission_path;
  std::optional<std::string> weather_path;
  std::optional<std::string> synthetic;  // winter-day | summer-day | year-round
  ClothingModel clothing;
  SurrogateFitOptions surrogate;
  EnvelopeOptions envelope;
  std::optional<SetpointProfile> setpoints;  // causal controller inputs
  std::optional<CurtainThresholds> thresholds;
  std::array<int, 12> month_days{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  double rh_track_tau_s = 600.0;
  double p_rh_max_w = 10.0e3;
  bool timing = false;  // include wall-time columns (breaks byte-identical reruns)
  MissionSchema mission_schema;

  void finalize() {
    constants.apply_design(design);
    constants.validate();
    for (const auto& r : comfort) r.validate();
    if (setpoints) setpoints->validate();
  }

  nlohmann::json effective_json() const;
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
};

namespace config_detail {

inline const std::map<std::string, double ModelConstants::*>& numeric_constant_fields() {
  static const std::map<std::string, double ModelConstants::*> m = {
      {"len_cab_m", &ModelConstants::len_cab},
      {"wid_cab_m", &ModelConstants::wid_cab},
      {"hgt_cab_m", &ModelConstants::hgt_cab},
      {"vol_cab_m3", &ModelConstants::vol_cab},
      {"area_shell_m2", &ModelConstants::area_shell},
      {"area_roof_m2", &ModelConstants::area_roof},
      {"area_wall_m2", &ModelConstants::area_wall},
      {"area_interior_m2", &ModelConstants::area_interior},
      {"area_rh_m2", &ModelConstants::area_rh},
      {"door_height_m", &ModelConstants::door_height},
      {"door_width_total_m", &ModelConstants::door_width_total},
      {"cap_cab_j_per_k", &ModelConstants::cap_cab},
      {"cap_int_j_per_k", &ModelConstants::cap_int},
      {"cap_rh_j_per_k", &ModelConstants::cap_rh},
      {"cap_shell_in_j_per_k", &ModelConstants::cap_shell_in},
      {"cap_shell_out_j_per_k", &ModelConstants::cap_shell_out},
      {"h_conv_inside_w_m2k", &ModelConstants::h_conv_inside},
      {"h_conv_outside_w_m2k", &ModelConstants::h_conv_outside},
      {"h_conv_rh_w_m2k", &ModelConstants::h_conv_rh},
      {"k_shell_w_m2k", &ModelConstants::k_shell},
      {"view_rh_to_int", &ModelConstants::view_rh_to_int},
      {"view_rh_to_shell", &ModelConstants::view_rh_to_shell},
      {"view_int_to_shell", &ModelConstants::view_int_to_shell},
      {"absorptivity_paint", &ModelConstants::absorptivity_paint},
      {"win_transmissivity", &ModelConstants::win_transmissivity},
      {"frac_roof_covered", &ModelConstants::frac_roof_covered},
      {"frac_wall_windows", &ModelConstants::frac_wall_windows},
      {"frac_interior_absorb", &ModelConstants::frac_interior_absorb},
      {"discharge_coeff", &ModelConstants::discharge_coeff},
      {"aircurt_reduction", &ModelConstants::aircurt_reduction},
      {"p_aircurt0_w", &ModelConstants::p_aircurt0},
      {"rho_air_kg_m3", &ModelConstants::rho_air},
      {"cp_air_j_kgk", &ModelConstants::cp_air},
      {"sigma_sb_w_m2k4", &ModelConstants::sigma_sb},
      {"grav_m_s2", &ModelConstants::grav},
      {"tau_vcc_s", &ModelConstants::tau_vcc},
      {"t_rh_target_k", &ModelConstants::t_rh_target},
      {"q_met_per_person_w", &ModelConstants::q_met_per_person},
      {"q_other_w", &ModelConstants::q_other},
      {"p_hc_max_heat_w", &ModelConstants::p_hc_max_heat},
      {"p_hc_max_cool_w", &ModelConstants::p_hc_max_cool},
      {"v_air_cab_m_s", &ModelConstants::v_air_cab},
      {"rel_humidity_cab", &ModelConstants::rel_humidity_cab},
      {"met_rate", &ModelConstants::met_rate},
  };
  return m;
}

inline void reject_unknown_keys(const nlohmann::json& j, const std::vector<std::string>& known,
                                const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (std::find(known.begin(), known.end(), it.key()) == known.end())
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

}  // namespace config_detail

inline RunConfig RunConfig::from_json(const nlohmann::json& j) {
  using config_detail::numeric_constant_fields;
  using config_detail::reject_unknown_keys;
  RunConfig cfg;
  reject_unknown_keys(
      j,
      {"constants", "design", "comfort", "psi_path", "controller", "seed", "passenger_count",
       "threads", "geo", "out_dir", "mission", "weather", "synthetic", "clothing_table",
       "surrogate", "envelope_method", "envelope_quantile", "setpoints", "thresholds",
       "month_days", "rh_track_tau_s", "p_rh_max_w", "timing", "cop"},
      "config root");

  if (j.contains("constants")) {
    const auto& jc = j.at("constants");
    std::vector<std::string> known;
    for (const auto& [name, ptr] : numeric_constant_fields()) known.push_back(name);
    reject_unknown_keys(jc, known, "constants");
    for (const auto& [name, ptr] : numeric_constant_fields())
      if (jc.contains(name)) cfg.constants.*ptr = jc.at(name).get<double>();
  }
  if (j.contains("cop")) {
    const auto& jc = j.at("cop");
    reject_unknown_keys(jc, {"second_law_eff", "approach_dt_k", "cap"}, "cop");
    if (jc.contains("second_law_eff"))
      cfg.constants.cop.second_law_eff = jc.at("second_law_eff").get<double>();
    if (jc.contains("approach_dt_k"))
      cfg.constants.cop.approach_dt = jc.at("approach_dt_k").get<double>();
    if (jc.contains("cap")) cfg.constants.cop.cap = jc.at("cap").get<double>();
  }
  if (j.contains("design")) cfg.design = j.at("design").get<std::string>();
  if (j.contains("comfort")) {
    cfg.comfort.clear();
    for (const auto& pair : j.at("comfort"))
      cfg.comfort.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    if (cfg.comfort.empty()) throw ConfigError("comfort list must not be empty");
  }
  if (j.contains("psi_path")) {
    const std::string p = j.at("psi_path").get<std::string>();
    if (p == "exact") cfg.psi_path = PsiPath::exact;
    else if (p == "surrogate") cfg.psi_path = PsiPath::surrogate;
    else throw ConfigError("psi_path must be 'exact' or 'surrogate'");
  }
  if (j.contains("controller")) {
    cfg.controller = j.at("controller").get<std::string>();
    if (cfg.controller != "replay" && cfg.controller != "causal")
      throw ConfigError("controller must be 'replay' or 'causal'");
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("passenger_count")) cfg.passenger_count = j.at("passenger_count").get<int>();
  if (j.contains("threads")) cfg.threads = j.at("threads").get<unsigned>();
  if (j.contains("geo")) {
    reject_unknown_keys(j.at("geo"), {"latitude_deg", "longitude_deg"}, "geo");
    cfg.geo.latitude_deg = j.at("geo").at("latitude_deg").get<double>();
    cfg.geo.longitude_deg = j.at("geo").at("longitude_deg").get<double>();
  }
  if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("mission")) cfg.mission_path = j.at("mission").get<std::string>();
  if (j.contains("weather")) cfg.weather_path = j.at("weather").get<std::string>();
  if (j.contains("synthetic")) cfg.synthetic = j.at("synthetic").get<std::string>();
  if (j.contains("clothing_table")) {
    for (const auto& row : j.at("clothing_table"))
      cfg.clothing.table.emplace_back(celsius_to_kelvin(row.at(0).get<double>()),
                                      row.at(1).get<double>());
    if (cfg.clothing.table.size() < 2)
      throw ConfigError("clothing_table needs at least two rows");
  }
  if (j.contains("surrogate")) {
    const auto& js = j.at("surrogate");
    reject_unknown_keys(js, {"box_lo_degc", "box_hi_degc", "grid_n", "restarts", "mae_threshold"},
                        "surrogate");
    if (js.contains("box_lo_degc"))
      for (int a = 0; a < 2; ++a)
        cfg.surrogate.box_lo[a] = celsius_to_kelvin(js.at("box_lo_degc").at(a).get<double>());
    if (js.contains("box_hi_degc"))
      for (int a = 0; a < 2; ++a)
        cfg.surrogate.box_hi[a] = celsius_to_kelvin(js.at("box_hi_degc").at(a).get<double>());
    if (js.contains("grid_n")) cfg.surrogate.grid_n = js.at("grid_n").get<int>();
    if (js.contains("restarts")) cfg.surrogate.restarts = js.at("restarts").get<int>();
    if (js.contains("mae_threshold"))
      cfg.surrogate.mae_threshold = js.at("mae_threshold").get<double>();
  }
  if (j.contains("envelope_method")) {
    const std::string m = j.at("envelope_method").get<std::string>();
    if (m == "constrained_lsq") cfg.envelope.method = EnvelopeMethod::constrained_lsq;
    else if (m == "quantile") cfg.envelope.method = EnvelopeMethod::quantile;
    else throw ConfigError("envelope_method must be 'constrained_lsq' or 'quantile'");
  }
  if (j.contains("envelope_quantile"))
    cfg.envelope.quantile = j.at("envelope_quantile").get<double>();
  if (j.contains("setpoints")) cfg.setpoints = setpoint_profile_from_json(j.at("setpoints"));
  if (j.contains("thresholds")) {
    reject_unknown_keys(j.at("thresholds"), {"theta_heat_k", "theta_cool_k"}, "thresholds");
    CurtainThresholds th;
    th.theta_heat_k = j.at("thresholds").at("theta_heat_k").get<double>();
    th.theta_cool_k = j.at("thresholds").at("theta_cool_k").get<double>();
    cfg.thresholds = th;
  }
  if (j.contains("month_days")) {
    const auto& md = j.at("month_days");
    if (md.size() != 12) throw ConfigError("month_days must have 12 entries");
    for (int m = 0; m < 12; ++m) cfg.month_days[m] = md.at(m).get<int>();
  }
  if (j.contains("rh_track_tau_s")) cfg.rh_track_tau_s = j.at("rh_track_tau_s").get<double>();
  if (j.contains("p_rh_max_w")) cfg.p_rh_max_w = j.at("p_rh_max_w").get<double>();
  if (j.contains("timing")) cfg.timing = j.at("timing").get<bool>();
  cfg.finalize();
  return cfg;
}

inline RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

inline nlohmann::json RunConfig::effective_json() const {
  nlohmann::json j;
  nlohmann::json jc;
  for (const auto& [name, ptr] : config_detail::numeric_constant_fields())
    jc[name] = constants.*ptr;
  j["constants"] = jc;
  j["cop"] = {{"second_law_eff", constants.cop.second_law_eff},
              {"approach_dt_k", constants.cop.approach_dt},
              {"cap", constants.cop.cap}};
  j["design"] = design;
  nlohmann::json jcomf = nlohmann::json::array();
  for (const auto& r : comfort) jcomf.push_back({r.psi_min, r.psi_max});
  j["comfort"] = jcomf;
  j["psi_path"] = psi_path == PsiPath::exact ? "exact" : "surrogate";
  j["controller"] = controller;
  j["seed"] = seed;
  j["passenger_count"] = passenger_count;
  j["threads"] = threads;
  j["geo"] = {{"latitude_deg", geo.latitude_deg}, {"longitude_deg", geo.longitude_deg}};
  j["out_dir"] = out_dir;
  if (mission_path) j["mission"] = *mission_path;
  if (weather_path) j["weather"] = *weather_path;
  if (synthetic) j["synthetic"] = *synthetic;
  if (setpoints) j["setpoints"] = setpoint_profile_json(*setpoints);
  if (thresholds)
    j["thresholds"] = {{"theta_heat_k", thresholds->theta_heat_k},
                       {"theta_cool_k", thresholds->theta_cool_k}};
  j["month_days"] = month_days;
  j["rh_track_tau_s"] = rh_track_tau_s;
  j["p_rh_max_w"] = p_rh_max_w;
  j["timing"] = timing;
  j["tool"] = std::string(kToolName) + " " + kToolVersion;
  return j;
}

/// FNV-1a 64-bit over the canonical (key-sorted) dump of the effective
/// config; stamped into every output for reproducibility checks.
inline std::string config_hash(const nlohmann::json& j) {
  const std::string dump = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bushvac
