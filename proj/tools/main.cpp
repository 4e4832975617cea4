// bushvac: steady-state energy/comfort optimization for electric city-bus
// HVAC systems, with a dynamic closed-loop validation path.
//
// Subcommands:
//   optimize          steady-state optimum for every hourly sample
//   simulate          closed-loop dynamic simulation of one mission
//   sweep             Pareto table over designs x comfort requirements
//   extract-setpoints fit setpoint profiles + curtain thresholds
//   validate          steady-vs-dynamic comparison (paired metric table)

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bushvac/annual.hpp"
#include "bushvac/config.hpp"
#include "bushvac/dynamic.hpp"
#include "bushvac/io.hpp"
#include "bushvac/synth.hpp"
#include "bushvac/version.hpp"

namespace fs = std::filesystem;
using namespace bushvac;

namespace {

struct CliOverrides {
  std::string config_path;
  std::string mission, weather, design, comfort, synthetic, out, setpoints_path;
  std::string controller;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool timing = false;
};

void add_common_flags(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path, "JSON run configuration");
  cmd->add_option("--mission", o.mission, "mission trace CSV");
  cmd->add_option("--weather", o.weather, "weather series CSV");
  cmd->add_option("--design", o.design, "HVAC design: ptc|hp[,+rh][,+curtains]");
  cmd->add_option("--comfort", o.comfort, "PMV boxes, e.g. -1:1,-0.5:0.5");
  cmd->add_option("--seed", o.seed, "random seed")->each([&o](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--synthetic", o.synthetic,
                  "synthetic profile: winter-day|summer-day|year-round");
  cmd->add_flag("--timing", o.timing, "include wall-time columns (breaks byte-identical reruns)");
}

std::vector<ComfortRequirement> parse_comfort(const std::string& spec) {
  std::vector<ComfortRequirement> out;
  size_t pos = 0;
  while (pos < spec.size()) {
    const size_t comma = spec.find(',', pos);
    const std::string tok =
        spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? spec.size() : comma + 1;
    const size_t colon = tok.find(':');
    if (colon == std::string::npos)
      throw ConfigError("comfort box '" + tok + "' is not of the form min:max");
    ComfortRequirement r{std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))};
    r.validate();
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError("empty comfort list");
  return out;
}

RunConfig build_config(const CliOverrides& o) {
  RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
  if (!o.mission.empty()) cfg.mission_path = o.mission;
  if (!o.weather.empty()) cfg.weather_path = o.weather;
  if (!o.design.empty()) cfg.design = o.design;
  if (!o.comfort.empty()) cfg.comfort = parse_comfort(o.comfort);
  if (o.seed_set) cfg.seed = o.seed;
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.synthetic.empty()) cfg.synthetic = o.synthetic;
  if (!o.controller.empty()) cfg.controller = o.controller;
  if (o.timing) cfg.timing = true;
  cfg.finalize();
  return cfg;
}

MissionTrace resolve_mission(const RunConfig& cfg) {
  if (cfg.synthetic) return synth_mission(synth_profile_from_string(*cfg.synthetic), cfg.seed);
  if (!cfg.mission_path) throw ConfigError("need --mission <csv> or --synthetic <profile>");
  MissionTrace trace = load_mission(*cfg.mission_path, cfg.mission_schema);
  if (cfg.weather_path) trace = join_weather(std::move(trace), load_weather(*cfg.weather_path));
  trace.coords = cfg.geo;
  trace.validate();
  return trace;
}

ComfortEvaluator make_evaluator(const RunConfig& cfg) {
  return ComfortEvaluator(cfg.constants, cfg.psi_path, cfg.passenger_count, cfg.seed,
                          cfg.clothing, {}, cfg.surrogate);
}

SteadyOptions steady_options(const RunConfig& cfg) {
  SteadyOptions opt;
  opt.geo = cfg.geo;
  return opt;
}

SimulateOptions simulate_options(const RunConfig& cfg) {
  SimulateOptions opt;
  opt.geo = cfg.geo;
  opt.rh_track_tau = cfg.rh_track_tau_s;
  opt.p_rh_max = cfg.p_rh_max_w;
  return opt;
}

void write_summary(const RunConfig& cfg, const std::string& command,
                   const nlohmann::json& payload, const std::vector<std::string>& files) {
  nlohmann::json j;
  const nlohmann::json effective = cfg.effective_json();
  j["tool"] = std::string(kToolName) + " " + kToolVersion;
  j["command"] = command;
  j["config_hash"] = config_hash(effective);
  j["config"] = effective;
  j["outputs"] = files;
  j["results"] = payload;
  std::ofstream out(fs::path(cfg.out_dir) / "run_summary.json");
  out << j.dump(2) << "\n";
}

std::vector<SteadyStateSolution> optimize_all(const SampleSet& set, const ComfortRequirement& req,
                                              const ModelConstants& c,
                                              const ComfortEvaluator& eval,
                                              const SteadyOptions& opt, unsigned threads) {
  std::vector<SteadyStateSolution> sols(set.samples.size());
  parallel_for(
      set.samples.size(),
      [&](size_t i) { sols[i] = optimize_sample(set.samples[i].d, req, c, eval, opt); }, threads);
  return sols;
}

SampleSet sample_set_for(const RunConfig& cfg) {
  SampleSet set = segment_and_average(resolve_mission(cfg));
  sample_weights(set, cfg.month_days);
  return set;
}

ReplayController build_replay(const SampleSet& set, const std::vector<SteadyStateSolution>& sols) {
  ReplayController rc;
  for (size_t i = 0; i < set.samples.size(); ++i)
    rc.segments.push_back({set.samples[i].segment_start, 3600, sols[i]});
  return rc;
}

// ---------------------------------------------------------------------------

int cmd_optimize(const CliOverrides& o) {
  const RunConfig cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  const ComfortEvaluator eval = make_evaluator(cfg);
  const SteadyOptions sopt = steady_options(cfg);
  SampleSet set = sample_set_for(cfg);

  nlohmann::json results;
  std::vector<std::string> files;
  for (const auto& req : cfg.comfort) {
    const auto sols = optimize_all(set, req, cfg.constants, eval, sopt, cfg.threads);
    const std::string name = "steady_solutions_" + req.label() + ".csv";
    export_solutions(set, sols, (fs::path(cfg.out_dir) / name).string(), cfg.timing);
    files.push_back(name);
    std::vector<double> p, w;
    int infeasible = 0;
    for (size_t i = 0; i < sols.size(); ++i) {
      p.push_back(sols[i].p_hvac);
      w.push_back(set.samples[i].weight);
      infeasible += sols[i].feasible ? 0 : 1;
    }
    results[req.label()] = {{"annual_mean_w", annual_mean(p, w)},
                            {"samples", set.samples.size()},
                            {"infeasible", infeasible}};
  }
  write_summary(cfg, "optimize", results, files);
  std::cout << "optimize: " << set.samples.size() << " samples x " << cfg.comfort.size()
            << " comfort boxes -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_simulate(const CliOverrides& o) {
  RunConfig cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  const ComfortEvaluator eval = make_evaluator(cfg);
  const MissionTrace trace = resolve_mission(cfg);
  const SimulateOptions dopt = simulate_options(cfg);

  ControllerConfig ctrl;
  if (cfg.controller == "replay") {
    SampleSet set = segment_and_average(trace);
    sample_weights(set, cfg.month_days);
    const auto sols =
        optimize_all(set, cfg.comfort.front(), cfg.constants, eval, steady_options(cfg),
                     cfg.threads);
    ctrl = ControllerConfig::make_replay(build_replay(set, sols));
  } else {
    CausalController causal;
    if (!o.setpoints_path.empty()) {
      std::ifstream in(o.setpoints_path);
      if (!in) throw IoError("cannot open setpoints file '" + o.setpoints_path + "'");
      nlohmann::json j;
      in >> j;
      causal.profiles = setpoint_profile_from_json(j.at("profile"));
      causal.thresholds.theta_heat_k = j.at("thresholds").at("theta_heat_k").get<double>();
      causal.thresholds.theta_cool_k = j.at("thresholds").at("theta_cool_k").get<double>();
    } else if (cfg.setpoints) {
      causal.profiles = *cfg.setpoints;
      if (cfg.thresholds) causal.thresholds = *cfg.thresholds;
    } else {
      throw ConfigError(
          "causal controller needs setpoints: pass --setpoints <json> (from extract-setpoints) "
          "or a 'setpoints' config block");
    }
    ctrl = ControllerConfig::make_causal(causal);
  }

  const Trajectory traj = simulate_mission(trace, ctrl, cfg.constants, eval, dopt);
  export_trajectory(traj, (fs::path(cfg.out_dir) / "trajectory.csv").string());

  const auto metric = comfort_metric(traj);
  nlohmann::json results = {
      {"mean_power_w", mean_power(traj)},
      {"comfort_metric", metric ? nlohmann::json(*metric) : nlohmann::json()},
      {"duration_s", trace.duration_s()},
      {"boundary_heat_j", traj.boundary_heat_j}};
  write_summary(cfg, "simulate", results, {"trajectory.csv"});
  std::cout << "simulate: " << trace.duration_s() << " s, mean power " << mean_power(traj)
            << " W -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_sweep(const CliOverrides& o, const std::vector<std::string>& design_list) {
  RunConfig cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  const ComfortEvaluator eval = make_evaluator(cfg);
  SampleSet set = sample_set_for(cfg);

  std::vector<std::string> names = design_list;
  if (names.empty()) {
    if (!o.design.empty())
      names = {o.design};
    else
      names = {"ptc", "ptc,+rh", "hp", "hp,+curtains"};
  }
  std::vector<DesignVariant> designs;
  for (const auto& n : names) designs.push_back(DesignVariant::from_spec(n, cfg.constants));

  const SweepResult sweep =
      pareto_sweep(set, cfg.comfort, designs, eval, steady_options(cfg), cfg.threads);

  CsvWriter pareto((fs::path(cfg.out_dir) / "pareto.csv").string());
  pareto.header({"design[-]", "psi_min[-]", "psi_max[-]", "annual_mean[W]",
                 "frac_lower_active[-]", "frac_upper_active[-]", "frac_passive[-]",
                 "infeasible[-]"});
  CsvWriter pmv((fs::path(cfg.out_dir) / "pmv_values.csv").string());
  pmv.header({"design[-]", "psi_min[-]", "psi_max[-]", "sample[-]", "pmv[-]", "mode[-]"});
  for (const auto& cell : sweep.cells) {
    pareto.line({cell.row.design, format_double(cell.row.requirement.psi_min),
                 format_double(cell.row.requirement.psi_max),
                 format_double(cell.row.annual_mean_w),
                 format_double(cell.row.frac_lower_active),
                 format_double(cell.row.frac_upper_active), format_double(cell.row.frac_passive),
                 std::to_string(cell.row.infeasible_count)});
    for (size_t i = 0; i < cell.solutions.size(); ++i)
      pmv.line({cell.row.design, format_double(cell.row.requirement.psi_min),
                format_double(cell.row.requirement.psi_max), std::to_string(i),
                format_double(cell.solutions[i].psi), to_string(cell.solutions[i].inputs.mode)});
  }
  pareto.close();
  pmv.close();

  nlohmann::json results = nlohmann::json::array();
  for (const auto& cell : sweep.cells)
    results.push_back({{"design", cell.row.design},
                       {"psi_min", cell.row.requirement.psi_min},
                       {"psi_max", cell.row.requirement.psi_max},
                       {"annual_mean_w", cell.row.annual_mean_w},
                       {"infeasible", cell.row.infeasible_count}});
  write_summary(cfg, "sweep", results, {"pareto.csv", "pmv_values.csv"});
  std::cout << "sweep: " << designs.size() << " designs x " << cfg.comfort.size()
            << " boxes over " << set.samples.size() << " samples -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_extract(const CliOverrides& o) {
  RunConfig cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  const ComfortEvaluator eval = make_evaluator(cfg);
  SampleSet set = sample_set_for(cfg);
  const SteadyOptions sopt = steady_options(cfg);

  CsvWriter points((fs::path(cfg.out_dir) / "setpoint_points.csv").string());
  points.header({"psi_min[-]", "psi_max[-]", "t_amb[degC]", "t_cab[degC]", "mode[-]",
                 "aircurt[flag]", "dT[K]"});
  nlohmann::json per_req = nlohmann::json::array();
  std::optional<SetpointFitResult> first_fit;
  std::optional<ThresholdFitResult> first_thr;
  std::vector<double> theta_heats, theta_cools;
  for (const auto& req : cfg.comfort) {
    const auto sols = optimize_all(set, req, cfg.constants, eval, sopt, cfg.threads);
    for (size_t i = 0; i < sols.size(); ++i) {
      if (!sols[i].feasible || sols[i].inputs.mode == HcMode::passive) continue;
      points.line({format_double(req.psi_min), format_double(req.psi_max),
                   format_double(kelvin_to_celsius(set.samples[i].d.t_amb)),
                   format_double(kelvin_to_celsius(sols[i].temperatures.t_cab)),
                   to_string(sols[i].inputs.mode), sols[i].inputs.aircurt_on ? "1" : "0",
                   format_double(sols[i].temperatures.t_cab - set.samples[i].d.t_amb)});
    }
    const SetpointFitResult fit = fit_setpoint_profiles(set, sols, cfg.envelope);
    const ThresholdFitResult thr = fit_curtain_thresholds(set, sols);
    if (!first_fit) first_fit = fit;
    if (!first_thr) first_thr = thr;
    if (!thr.heat_degenerate) theta_heats.push_back(thr.thresholds.theta_heat_k);
    if (!thr.cool_degenerate) theta_cools.push_back(thr.thresholds.theta_cool_k);
    nlohmann::json jr;
    jr["psi_box"] = {req.psi_min, req.psi_max};
    jr["heating_fitted"] = fit.heating_fitted;
    jr["cooling_fitted"] = fit.cooling_fitted;
    if (!fit.heating_fitted) jr["heating_message"] = fit.heating_message;
    if (!fit.cooling_fitted) jr["cooling_message"] = fit.cooling_message;
    if (fit.heating_fitted && fit.cooling_fitted) jr["profile"] = setpoint_profile_json(fit.profile);
    jr["thresholds"] = {{"theta_heat_k", thr.thresholds.theta_heat_k},
                        {"theta_cool_k", thr.thresholds.theta_cool_k},
                        {"misclass_heat", thr.misclass_heat},
                        {"misclass_cool", thr.misclass_cool}};
    per_req.push_back(jr);
  }
  points.close();

  if (!first_fit || !(first_fit->heating_fitted && first_fit->cooling_fitted))
    throw NumericalError("setpoint extraction failed: " + first_fit->heating_message + " / " +
                         first_fit->cooling_message);
  first_fit->profile.validate();

  auto spread = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };

  nlohmann::json setpoints;
  setpoints["profile"] = setpoint_profile_json(first_fit->profile);
  setpoints["thresholds"] = {{"theta_heat_k", first_thr->thresholds.theta_heat_k},
                             {"theta_cool_k", first_thr->thresholds.theta_cool_k}};
  setpoints["per_requirement"] = per_req;
  setpoints["threshold_spread_k"] = {{"heat", spread(theta_heats)}, {"cool", spread(theta_cools)}};
  {
    std::ofstream out(fs::path(cfg.out_dir) / "setpoints.json");
    out << setpoints.dump(2) << "\n";
  }
  write_summary(cfg, "extract-setpoints", setpoints,
                {"setpoints.json", "setpoint_points.csv"});
  std::cout << "extract-setpoints: profiles + thresholds from " << set.samples.size()
            << " samples -> " << cfg.out_dir << "\n";
  return 0;
}

int cmd_validate(const CliOverrides& o) {
  RunConfig cfg = build_config(o);
  fs::create_directories(cfg.out_dir);
  const ComfortEvaluator eval = make_evaluator(cfg);
  const MissionTrace trace = resolve_mission(cfg);
  SampleSet set = segment_and_average(trace);
  sample_weights(set, cfg.month_days);
  const SteadyOptions sopt = steady_options(cfg);
  const SimulateOptions dopt = simulate_options(cfg);

  CsvWriter table((fs::path(cfg.out_dir) / "validate_metrics.csv").string());
  table.header({"psi_min[-]", "psi_max[-]", "p_mean_steady[W]", "p_mean_dynamic[W]",
                "rel_gap[-]", "comfort_metric_dynamic[-]", "box_half_width[-]"});
  nlohmann::json results = nlohmann::json::array();
  for (const auto& req : cfg.comfort) {
    const auto sols = optimize_all(set, req, cfg.constants, eval, sopt, cfg.threads);
    // Steady prediction: duration-weighted mean over the mission's segments.
    double p_steady = 0.0, dur = 0.0;
    for (size_t i = 0; i < sols.size(); ++i) {
      p_steady += sols[i].p_hvac * set.samples[i].segment_duration_s;
      dur += set.samples[i].segment_duration_s;
    }
    p_steady /= dur;
    ControllerConfig ctrl = ControllerConfig::make_replay(build_replay(set, sols));
    const Trajectory traj = simulate_mission(trace, ctrl, cfg.constants, eval, dopt);
    const double p_dyn = mean_power(traj);
    const auto metric = comfort_metric(traj);
    const double gap = std::abs(p_dyn - p_steady) / std::max(p_dyn, 1.0);
    table.line({format_double(req.psi_min), format_double(req.psi_max),
                format_double(p_steady), format_double(p_dyn), format_double(gap),
                metric ? format_double(*metric) : "", format_double(req.half_width())});
    results.push_back({{"psi_box", {req.psi_min, req.psi_max}},
                       {"p_mean_steady_w", p_steady},
                       {"p_mean_dynamic_w", p_dyn},
                       {"rel_gap", gap},
                       {"comfort_metric_dynamic",
                        metric ? nlohmann::json(*metric) : nlohmann::json()}});
    std::cout << "validate " << req.label() << ": steady " << p_steady << " W, dynamic "
              << p_dyn << " W, gap " << gap * 100.0 << "%, comfort metric "
              << (metric ? std::to_string(*metric) : std::string("n/a")) << "\n";
  }
  table.close();
  write_summary(cfg, "validate", results, {"validate_metrics.csv"});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kToolName) + " " + kToolVersion +
               " - steady-state energy/comfort optimization for city-bus HVAC"};
  app.require_subcommand(1);

  CliOverrides o;
  std::vector<std::string> sweep_designs;

  CLI::App* c_opt = app.add_subcommand("optimize", "steady-state optima for hourly samples");
  add_common_flags(c_opt, o);
  CLI::App* c_sim = app.add_subcommand("simulate", "closed-loop dynamic simulation");
  add_common_flags(c_sim, o);
  c_sim->add_option("--controller", o.controller, "replay|causal");
  c_sim->add_option("--setpoints", o.setpoints_path, "setpoints.json from extract-setpoints");
  CLI::App* c_sweep = app.add_subcommand("sweep", "Pareto sweep over designs and comfort boxes");
  add_common_flags(c_sweep, o);
  c_sweep->add_option("--designs", sweep_designs, "design list (repeatable)");
  CLI::App* c_ext = app.add_subcommand("extract-setpoints",
                                       "fit setpoint profiles and curtain thresholds");
  add_common_flags(c_ext, o);
  CLI::App* c_val = app.add_subcommand("validate", "steady-vs-dynamic metric pairs");
  add_common_flags(c_val, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(c_opt)) return cmd_optimize(o);
    if (app.got_subcommand(c_sim)) return cmd_simulate(o);
    if (app.got_subcommand(c_sweep)) return cmd_sweep(o, sweep_designs);
    if (app.got_subcommand(c_ext)) return cmd_extract(o);
    if (app.got_subcommand(c_val)) return cmd_validate(o);
  } catch (const std::exception& e) {
    nlohmann::json err = {{"error", true},
                          {"type", typeid(e).name()},
                          {"message", e.what()},
                          {"tool", std::string(kToolName) + " " + kToolVersion}};
    std::cerr << err.dump(2) << "\n";
    return 1;
  }
  return 2;
}
