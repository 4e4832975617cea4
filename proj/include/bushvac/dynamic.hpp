#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bushvac/constants.hpp"
#include "bushvac/mission.hpp"
#include "bushvac/model.hpp"
#include "bushvac/setpoints.hpp"
#include "bushvac/solar.hpp"
#include "bushvac/steady.hpp"

namespace bushvac {

/// Initial reservoir temperatures when the bus leaves the depot: linear in
/// the ambient temperature, anchored at 20 degC.
inline ThermalState depot_init(double t_amb_k) {
  const double t = (t_amb_k - celsius_to_kelvin(20.0)) * 0.5 + celsius_to_kelvin(20.0);
  ThermalState s;
  s.t_rh = s.t_int = s.t_cab = s.t_shell_in = s.t_shell_out = t;
  s.q_hc_filtered = 0.0;
  return s;
}

/// PI cabin-temperature controller with output clamping and conditional
/// integration (the integrator freezes while the output is saturated).
struct PiController {
  double kp = 2000.0;   // [W/K]
  double ti = 100.0;    // [s]
  double out_min = -12.0e3;
  double out_max = 12.0e3;
  double integral = 0.0;  // integral of the error [K s]

  void reset() { integral = 0.0; }

  double step(double setpoint, double measured, double dt) {
    if (!(dt > 0.0)) throw ConfigError("pi controller: dt must be > 0");
    const double err = setpoint - measured;
    const double out = kp * err + kp / ti * integral;
    if (out > out_max) return out_max;  // integrator frozen while clamped
    if (out < out_min) return out_min;
    integral += err * dt;
    return out;
  }
};

/// Hysteresis state machine for the air heating/cooling operating mode.
/// Passive is the hub: heating and cooling never hand over directly.
inline HcMode mode_fsm_step(HcMode mode, double t_cab, double t_amb,
                            const SetpointProfile& profiles, double hysteresis_k = 1.0) {
  const double heat_set = profiles.heating_setpoint(t_amb);
  const double cool_set = profiles.cooling_setpoint(t_amb);
  switch (mode) {
    case HcMode::passive:
      if (t_cab < heat_set - hysteresis_k) return HcMode::heating;
      if (t_cab > cool_set + hysteresis_k) return HcMode::cooling;
      return HcMode::passive;
    case HcMode::heating:
      return t_cab > heat_set + hysteresis_k ? HcMode::passive : HcMode::heating;
    case HcMode::cooling:
      return t_cab < cool_set - hysteresis_k ? HcMode::passive : HcMode::cooling;
  }
  return HcMode::passive;
}

/// Curtain activation rule: on when the cabin-ambient temperature difference
/// (in the direction the unit is working against) exceeds the fitted
/// threshold; always off in passive mode or with the doors closed.
inline bool curtain_rule(HcMode mode, double t_cab, double t_amb,
                         const CurtainThresholds& thresholds, double zeta_door) {
  if (zeta_door <= 0.0) return false;
  switch (mode) {
    case HcMode::heating: return (t_cab - t_amb) > thresholds.theta_heat_k;
    case HcMode::cooling: return (t_amb - t_cab) > thresholds.theta_cool_k;
    default: return false;
  }
}

/// One steady-state solution per mission segment, replayed feed-forward
/// while the PI controller tracks the segment's equilibrium cabin
/// temperature.
struct SegmentSolution {
  Timestamp start;
  std::int64_t duration_s = 3600;
  SteadyStateSolution solution;
};

struct ReplayController {
  std::vector<SegmentSolution> segments;

  void validate() const {
    if (segments.empty()) throw ConfigError("replay controller has no segments");
    for (size_t i = 1; i < segments.size(); ++i) {
      const auto& prev = segments[i - 1];
      if (segments[i].start.epoch_s != prev.start.epoch_s + prev.duration_s)
        throw ConfigError("replay controller: segment solutions are not contiguous (missing "
                          "segment before " +
                          format_timestamp(segments[i].start) + ")");
    }
  }

  const SteadyStateSolution& at(std::int64_t epoch_s) const {
    auto it = std::upper_bound(segments.begin(), segments.end(), epoch_s,
                               [](std::int64_t t, const SegmentSolution& s) {
                                 return t < s.start.epoch_s;
                               });
    if (it != segments.begin()) {
      const SegmentSolution& seg = *(it - 1);
      if (epoch_s < seg.start.epoch_s + seg.duration_s) return seg.solution;
    }
    throw ConfigError("replay controller: mission time not covered by a segment solution");
  }
};

/// Causal online controller: setpoint profiles, mode state machine and
/// curtain thresholds; needs no predictive information.
struct CausalController {
  SetpointProfile profiles;
  CurtainThresholds thresholds;
  double hysteresis_k = 1.0;
  bool rh_when_heating = true;  // enable RHs in heating mode when installed
};

struct ControllerConfig {
  enum class Kind { replay, causal };
  Kind kind = Kind::causal;
  ReplayController replay;
  CausalController causal;

  static ControllerConfig make_replay(ReplayController r) {
    ControllerConfig cfg;
    cfg.kind = Kind::replay;
    cfg.replay = std::move(r);
    cfg.replay.validate();
    return cfg;
  }
  static ControllerConfig make_causal(CausalController c) {
    c.profiles.validate();
    ControllerConfig cfg;
    cfg.kind = Kind::causal;
    cfg.causal = std::move(c);
    return cfg;
  }
};

/// Second-by-second record of a closed-loop simulation (struct of arrays).
struct Trajectory {
  Timestamp start;
  double dt_record = 1.0;  // [s] spacing between rows
  std::vector<double> time_s;
  std::vector<ThermalState> state;
  std::vector<HeatFlows> flows;
  std::vector<ControlInput> input;
  std::vector<double> setpoint_k;  // NaN while passive
  std::vector<double> psi;
  std::vector<double> p_hvac;
  std::vector<double> p_aircurt;
  std::vector<double> t_amb;
  std::vector<double> n_pass;
  std::vector<double> zeta_door;
  // Energy bookkeeping, integrated alongside the state by the same RK4
  // stages: net boundary heat [J] and gross |boundary| throughput [J].
  double boundary_heat_j = 0.0;
  double gross_boundary_j = 0.0;
  ThermalState initial_state;
  ThermalState final_state;

  size_t size() const { return time_s.size(); }
};

struct SimulateOptions {
  double dt = 1.0;            // [s] integrator step; must divide the 1 s control period
  GeoPos geo;
  double rh_track_tau = 600.0;   // [s] first-order RH temperature tracking
  double p_rh_max = 10.0e3;      // [W] RH power clamp in dynamic runs
  int record_every = 1;          // keep every n-th row (memory control on long runs)
  bool record_psi = true;        // comfort evaluation per recorded row (NaN when off)
};

namespace dyn_detail {

struct Augmented {
  ThermalState s;
  double e_boundary = 0.0;
  double e_gross = 0.0;
};

inline Augmented derivative(const Augmented& a, const ControlInput& u, const Disturbance& d,
                            double beta, const ModelConstants& c) {
  const HeatFlows f = compute_heat_flows(a.s, u, d, beta, c, /*smooth_door=*/false);
  StateDerivative dot = reservoir_balances(a.s, u, f, c, a.s.q_hc_filtered);
  dot.d_q_hc = (f.q_hc_ss - a.s.q_hc_filtered) / c.tau_vcc;
  Augmented da;
  da.s.t_rh = dot.d_t_rh;
  da.s.t_int = dot.d_t_int;
  da.s.t_cab = dot.d_t_cab;
  da.s.t_shell_in = dot.d_t_shell_in;
  da.s.t_shell_out = dot.d_t_shell_out;
  da.s.q_hc_filtered = dot.d_q_hc;
  da.e_boundary = boundary_flow_sum(u, f, a.s.q_hc_filtered);
  da.e_gross = u.p_rh + f.q_sol_int + f.q_sol_shell_in + f.q_sol_shell_out + f.q_pass +
               f.q_other + std::abs(a.s.q_hc_filtered) + std::abs(f.q_door) +
               std::abs(f.q_h_shell_out) + std::abs(f.q_r_shell_out);
  return da;
}

inline Augmented axpy(const Augmented& a, double h, const Augmented& d) {
  Augmented r = a;
  r.s.t_rh += h * d.s.t_rh;
  r.s.t_int += h * d.s.t_int;
  r.s.t_cab += h * d.s.t_cab;
  r.s.t_shell_in += h * d.s.t_shell_in;
  r.s.t_shell_out += h * d.s.t_shell_out;
  r.s.q_hc_filtered += h * d.s.q_hc_filtered;
  r.e_boundary += h * d.e_boundary;
  r.e_gross += h * d.e_gross;
  return r;
}

inline Augmented rk4_step(const Augmented& a, double h, const ControlInput& u,
                          const Disturbance& d, double beta, const ModelConstants& c) {
  const Augmented k1 = derivative(a, u, d, beta, c);
  const Augmented k2 = derivative(axpy(a, h / 2, k1), u, d, beta, c);
  const Augmented k3 = derivative(axpy(a, h / 2, k2), u, d, beta, c);
  const Augmented k4 = derivative(axpy(a, h, k3), u, d, beta, c);
  Augmented out = a;
  auto comb = [h](double v1, double v2, double v3, double v4) {
    return h / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4);
  };
  out.s.t_rh += comb(k1.s.t_rh, k2.s.t_rh, k3.s.t_rh, k4.s.t_rh);
  out.s.t_int += comb(k1.s.t_int, k2.s.t_int, k3.s.t_int, k4.s.t_int);
  out.s.t_cab += comb(k1.s.t_cab, k2.s.t_cab, k3.s.t_cab, k4.s.t_cab);
  out.s.t_shell_in += comb(k1.s.t_shell_in, k2.s.t_shell_in, k3.s.t_shell_in, k4.s.t_shell_in);
  out.s.t_shell_out +=
      comb(k1.s.t_shell_out, k2.s.t_shell_out, k3.s.t_shell_out, k4.s.t_shell_out);
  out.s.q_hc_filtered +=
      comb(k1.s.q_hc_filtered, k2.s.q_hc_filtered, k3.s.q_hc_filtered, k4.s.q_hc_filtered);
  out.e_boundary += comb(k1.e_boundary, k2.e_boundary, k3.e_boundary, k4.e_boundary);
  out.e_gross += comb(k1.e_gross, k2.e_gross, k3.e_gross, k4.e_gross);
  return out;
}

/// First-order tracking of the RH plate temperature toward its target;
/// feed-forward of the radiative/convective losses plus a relaxation term.
inline double rh_tracking_power(const ThermalState& s, const Disturbance& d,
                                const ModelConstants& c, const SimulateOptions& opt) {
  HeatFlows f;
  convective_and_conductive_flows(s, d, c, f);
  radiative_flows(s, d, c, f);
  const double losses = f.q_h_rh + f.q_r_rh_int + f.q_r_rh_shell;
  const double relax = c.cap_rh * (c.t_rh_target - s.t_rh) / opt.rh_track_tau;
  return std::clamp(losses + relax, 0.0, opt.p_rh_max);
}

}  // namespace dyn_detail

/// Closed-loop simulation of the full dynamic model: fixed-step RK4 over the
/// thermal network and the VCC filter, controller updates at 1 Hz,
/// disturbances piecewise-constant between trace samples.
inline Trajectory simulate_mission(const MissionTrace& trace, const ControllerConfig& ctrl,
                                   const ModelConstants& c, const ComfortEvaluator& eval,
                                   const SimulateOptions& opt = {}) {
  trace.validate();
  const int sub_steps = std::max(1, static_cast<int>(std::lround(1.0 / opt.dt)));
  const double h = 1.0 / sub_steps;

  const std::int64_t t0 = trace.samples.front().when.epoch_s;
  const std::int64_t duration = trace.duration_s();

  Trajectory traj;
  traj.start = trace.samples.front().when;
  traj.dt_record = static_cast<double>(opt.record_every);
  const size_t n_rows = static_cast<size_t>(duration / opt.record_every);
  traj.time_s.reserve(n_rows);
  traj.state.reserve(n_rows);
  traj.flows.reserve(n_rows);
  traj.input.reserve(n_rows);

  dyn_detail::Augmented aug;
  aug.s = depot_init(trace.samples.front().t_amb);
  traj.initial_state = aug.s;

  PiController pi;
  pi.kp = 2000.0;
  pi.ti = 100.0;
  HcMode fsm_mode = HcMode::passive;

  size_t sample_idx = 0;
  for (std::int64_t k = 0; k < duration; ++k) {
    const std::int64_t now = t0 + k;
    while (sample_idx + 1 < trace.samples.size() &&
           trace.samples[sample_idx + 1].when.epoch_s <= now)
      ++sample_idx;
    const Disturbance& d = trace.samples[sample_idx];
    const double beta = solar_altitude(Timestamp{now, trace.samples.front().when.tz_offset_min},
                                       trace.coords);

    // Controller update (1 Hz).
    ControlInput u;
    double setpoint = std::numeric_limits<double>::quiet_NaN();
    if (ctrl.kind == ControllerConfig::Kind::replay) {
      const SteadyStateSolution& seg = ctrl.replay.at(now);
      u.mode = seg.inputs.mode;
      u.aircurt_on = seg.inputs.aircurt_on && c.curtains_installed;
      u.rh_on = seg.inputs.rh_on && c.rh_installed;
      if (u.mode != HcMode::passive) setpoint = seg.temperatures.t_cab;
    } else {
      fsm_mode = mode_fsm_step(fsm_mode, aug.s.t_cab, d.t_amb, ctrl.causal.profiles,
                               ctrl.causal.hysteresis_k);
      u.mode = fsm_mode;
      u.aircurt_on = c.curtains_installed &&
                     curtain_rule(fsm_mode, aug.s.t_cab, d.t_amb, ctrl.causal.thresholds,
                                  d.zeta_door);
      u.rh_on = c.rh_installed && ctrl.causal.rh_when_heating && fsm_mode == HcMode::heating;
      if (fsm_mode == HcMode::heating) setpoint = ctrl.causal.profiles.heating_setpoint(d.t_amb);
      if (fsm_mode == HcMode::cooling) setpoint = ctrl.causal.profiles.cooling_setpoint(d.t_amb);
    }

    if (u.mode == HcMode::passive) {
      pi.reset();
      u.p_hc = 0.0;
    } else {
      if (u.mode == HcMode::heating) {
        pi.out_min = 0.0;
        pi.out_max = std::min(c.p_hc_max_heat, 1.0e9);
      } else {
        pi.out_min = -c.p_hc_max_cool;
        pi.out_max = 0.0;
      }
      u.p_hc = std::abs(pi.step(setpoint, aug.s.t_cab, 1.0));
    }
    u.p_rh = u.rh_on ? dyn_detail::rh_tracking_power(aug.s, d, c, opt) : 0.0;

    // Record the row (state at the start of the second, inputs held over it).
    if (k % opt.record_every == 0) {
      HeatFlows f = compute_heat_flows(aug.s, u, d, beta, c, false);
      traj.time_s.push_back(static_cast<double>(k));
      traj.state.push_back(aug.s);
      traj.flows.push_back(f);
      traj.input.push_back(u);
      traj.setpoint_k.push_back(setpoint);
      traj.psi.push_back(opt.record_psi ? eval.psi(aug.s, d.t_amb)
                                        : std::numeric_limits<double>::quiet_NaN());
      traj.p_aircurt.push_back(air_curtain_power(d, u, c));
      traj.p_hvac.push_back(u.p_hc + u.p_rh + traj.p_aircurt.back());
      traj.t_amb.push_back(d.t_amb);
      traj.n_pass.push_back(d.n_pass);
      traj.zeta_door.push_back(d.zeta_door);
    }

    for (int sub = 0; sub < sub_steps; ++sub)
      aug = dyn_detail::rk4_step(aug, h, u, d, beta, c);
    if (!aug.s.plausible())
      throw NumericalError("simulation state left the plausibility band at t+" +
                           std::to_string(k + 1) + " s (t_cab = " +
                           std::to_string(aug.s.t_cab) + " K)");
  }

  traj.final_state = aug.s;
  traj.boundary_heat_j = aug.e_boundary;
  traj.gross_boundary_j = aug.e_gross;
  return traj;
}

/// Trapezoidal mean of the HVAC electrical power over the trajectory.
inline double mean_power(const Trajectory& traj) {
  if (traj.size() < 2) throw ConfigError("mean_power: trajectory too short");
  double acc = 0.0;
  for (size_t i = 1; i < traj.size(); ++i)
    acc += 0.5 * (traj.p_hvac[i - 1] + traj.p_hvac[i]) * (traj.time_s[i] - traj.time_s[i - 1]);
  return acc / (traj.time_s.back() - traj.time_s.front());
}

/// Maximum absolute value of the 15-min moving-average PMV over occupied
/// instants. The centered window shrinks at the trajectory edges. Returns
/// nullopt when no instant has a passenger on board.
inline std::optional<double> comfort_metric(const std::vector<double>& time_s,
                                            const std::vector<double>& psi,
                                            const std::vector<double>& n_pass,
                                            double window_s = 900.0) {
  if (psi.size() != time_s.size() || n_pass.size() != time_s.size())
    throw ConfigError("comfort_metric: column lengths differ");
  const size_t n = time_s.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + psi[i];
  std::optional<double> metric;
  size_t lo = 0, hi = 0;
  for (size_t i = 0; i < n; ++i) {
    if (n_pass[i] < 1.0) continue;
    while (lo < n && time_s[lo] < time_s[i] - window_s / 2) ++lo;
    if (hi < i) hi = i;
    while (hi + 1 < n && time_s[hi + 1] <= time_s[i] + window_s / 2) ++hi;
    const size_t lo_i = std::min(lo, i);
    const double mean = (prefix[hi + 1] - prefix[lo_i]) / static_cast<double>(hi + 1 - lo_i);
    const double v = std::abs(mean);
    if (!metric || v > *metric) metric = v;
  }
  return metric;
}

inline std::optional<double> comfort_metric(const Trajectory& traj, double window_s = 900.0) {
  return comfort_metric(traj.time_s, traj.psi, traj.n_pass, window_s);
}

}  // namespace bushvac
