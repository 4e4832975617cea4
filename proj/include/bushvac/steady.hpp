#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bushvac/comfort.hpp"
#include "bushvac/constants.hpp"
#include "bushvac/model.hpp"
#include "bushvac/newton.hpp"
#include "bushvac/occupants.hpp"
#include "bushvac/solar.hpp"
#include "bushvac/surrogate.hpp"

namespace bushvac {

/// Box constraint on the PMV.
struct ComfortRequirement {
  double psi_min = -1.0;
  double psi_max = 1.0;

  void validate() const {
    if (!(psi_min < psi_max)) throw ConfigError("comfort requirement: psi_min must be < psi_max");
    if (!(psi_min >= -3.0 && psi_max <= 3.0))
      throw ConfigError("comfort requirement: bounds must lie in [-3, 3]");
  }
  double half_width() const { return 0.5 * (psi_max - psi_min); }
  bool contains(double psi, double tol = 1e-9) const {
    return psi >= psi_min - tol && psi <= psi_max + tol;
  }
  std::string label() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "[%g,%g]", psi_min, psi_max);
    return buf;
  }
};

/// How the optimizer evaluates the PMV: the exact iterative model, or the
/// fitted tanh network (quantized to tabulated clothing levels).
enum class PsiPath { exact, surrogate };

/// Bundles the seeded passenger geometry, the clothing model and the chosen
/// PMV evaluation path. Immutable after construction, so one instance can be
/// shared by any number of worker threads.
class ComfortEvaluator {
 public:
  explicit ComfortEvaluator(const ModelConstants& c, PsiPath path = PsiPath::exact,
                            int passenger_count = kDefaultPassengerCount,
                            std::uint64_t placement_seed = kDefaultPlacementSeed,
                            ClothingModel clothing = {},
                            std::vector<double> surrogate_levels = {},
                            SurrogateFitOptions fit_options = {})
      : constants_(c),
        path_(path),
        clothing_(std::move(clothing)),
        passengers_(sample_passengers(c, passenger_count, placement_seed)) {
    base_ctx_.v_air = c.v_air_cab;
    base_ctx_.rel_humidity = c.rel_humidity_cab;
    base_ctx_.met = c.met_rate;
    if (path_ == PsiPath::surrogate) {
      if (surrogate_levels.empty())
        for (double lvl = clothing_.clamp_lo; lvl <= clothing_.clamp_hi + 1e-9; lvl += 0.2)
          surrogate_levels.push_back(lvl);
      for (double lvl : surrogate_levels)
        surrogates_.emplace_back(fit_pmv_surrogate(lvl, base_ctx_, fit_options));
    }
  }

  const std::vector<PassengerGeometry>& passengers() const { return passengers_; }
  const ModelConstants& constants() const { return constants_; }
  PsiPath path() const { return path_; }

  double r_clo_for(double t_amb_k) const {
    const double exact = clothing_(t_amb_k);
    return path_ == PsiPath::exact ? exact : nearest_surrogate(exact).r_clo;
  }

  ComfortContext context_for(double t_amb_k) const {
    ComfortContext ctx = base_ctx_;
    ctx.r_clo = r_clo_for(t_amb_k);
    return ctx;
  }

  /// Cabin PMV averaged over the passenger set, via the configured path.
  double psi(const ThermalState& s, double t_amb_k) const {
    if (path_ == PsiPath::exact) return mean_pmv(s, passengers_, context_for(t_amb_k));
    const PmvSurrogate& net = nearest_surrogate(clothing_(t_amb_k));
    double acc = 0.0;
    for (const auto& p : passengers_) acc += net.eval(s.t_cab, mean_radiant_temperature(s, p));
    return acc / static_cast<double>(passengers_.size());
  }

  /// Exact-model PMV at the same (possibly quantized) clothing level the
  /// configured path uses; for surrogate-vs-exact agreement checks.
  double psi_exact_same_level(const ThermalState& s, double t_amb_k) const {
    ComfortContext ctx = base_ctx_;
    ctx.r_clo = r_clo_for(t_amb_k);
    return mean_pmv(s, passengers_, ctx);
  }

  const std::vector<PmvSurrogate>& surrogates() const { return surrogates_; }

 private:
  const PmvSurrogate& nearest_surrogate(double r_clo) const {
    if (surrogates_.empty()) throw ConfigError("surrogate path requested but no levels fitted");
    size_t best = 0;
    double best_d = std::abs(surrogates_[0].r_clo - r_clo);
    for (size_t i = 1; i < surrogates_.size(); ++i) {
      const double dist = std::abs(surrogates_[i].r_clo - r_clo);
      if (dist < best_d) {
        best_d = dist;
        best = i;
      }
    }
    return surrogates_[best];
  }

  ModelConstants constants_;
  PsiPath path_;
  ClothingModel clothing_;
  ComfortContext base_ctx_;
  std::vector<PassengerGeometry> passengers_;
  std::vector<PmvSurrogate> surrogates_;
};

/// One discrete candidate of the enumeration.
struct CandidateSpec {
  HcMode mode = HcMode::passive;
  bool aircurt = false;
  bool rh_on = false;

  int aux_count() const { return (aircurt ? 1 : 0) + (rh_on ? 1 : 0); }
  std::string label() const {
    std::string s = to_string(mode);
    if (aircurt) s += "+curtain";
    if (rh_on) s += "+rh";
    return s;
  }
};

struct SteadyStateSolution {
  ControlInput inputs;
  ThermalState temperatures;     // equilibrium; q_hc_filtered carries the HVAC heat flow
  double q_heat = 0.0;           // [W] >= 0
  double q_cool = 0.0;           // [W] <= 0
  double gamma = 0.0;            // COP used in the power conversion
  double p_hc = 0.0;             // [W]
  double p_rh = 0.0;
  double p_aircurt = 0.0;
  double p_hvac = 0.0;           // p_hc + p_rh + p_aircurt
  double psi = 0.0;
  bool feasible = false;
  double residual_norm = 0.0;    // scaled (kW) max-norm
  int iterations = 0;
  double wall_ms = 0.0;
  std::string candidate;         // winning candidate label
};

struct SteadyOptions {
  GeoPos geo;
  NewtonOptions newton;
  double accept_residual = 1e-6;  // scaled; 1e-6 == 1 mW
  double power_ref = 1000.0;      // [W] residual scaling
};

namespace steady_detail {

struct Layout {
  bool active;  // heating or cooling (psi pinned); passive otherwise
  bool rh_on;   // x[0] is p_rh (t_rh pinned) when set, t_rh otherwise
  int size() const { return active ? 6 : 5; }
};

inline ThermalState state_from(const Eigen::VectorXd& x, const Layout& lay,
                               const ModelConstants& c) {
  ThermalState s;
  s.t_rh = lay.rh_on ? c.t_rh_target : x[0];
  s.t_int = x[1];
  s.t_cab = x[2];
  s.t_shell_in = x[3];
  s.t_shell_out = x[4];
  s.q_hc_filtered = lay.active ? x[5] : 0.0;
  return s;
}

inline ControlInput input_from(const Eigen::VectorXd& x, const Layout& lay,
                               const CandidateSpec& spec) {
  ControlInput u;
  u.mode = spec.mode;
  u.aircurt_on = spec.aircurt;
  u.rh_on = spec.rh_on;
  u.p_rh = lay.rh_on ? x[0] : 0.0;
  return u;
}

/// Memoizes the passenger-averaged PMV on recent temperature tuples. During
/// a finite-difference Jacobian sweep the columns for the outside shell, the
/// RH power and the HVAC heat flow leave the tuple unchanged, so the
/// expensive comfort evaluation is skipped for them.
struct PsiCache {
  const ComfortEvaluator* eval = nullptr;
  double t_amb = 0.0;

  double operator()(const ThermalState& s) {
    const std::array<double, 4> key{s.t_rh, s.t_int, s.t_cab, s.t_shell_in};
    for (int i = 0; i < filled_; ++i)
      if (entries_[i].first == key) return entries_[i].second;
    const double value = eval->psi(s, t_amb);
    entries_[next_] = {key, value};
    next_ = (next_ + 1) % kSlots;
    if (filled_ < kSlots) ++filled_;
    return value;
  }

 private:
  static constexpr int kSlots = 4;
  std::array<std::pair<std::array<double, 4>, double>, kSlots> entries_{};
  int next_ = 0;
  int filled_ = 0;
};

}  // namespace steady_detail

/// Residual vector of the steady-state system for one candidate: the five
/// reservoir balances (scaled to kW) with the door model smoothed, plus --
/// for actively heated/cooled candidates -- the pinned-PMV constraint.
/// Unknown layout: x = [t_rh | p_rh, t_int, t_cab, t_shell_in, t_shell_out
/// (, q_hc)], with t_rh pinned to its target when the RHs are on.
inline Eigen::VectorXd steady_residuals(const Eigen::VectorXd& x, const CandidateSpec& spec,
                                        const Disturbance& d, const ModelConstants& c,
                                        const ComfortEvaluator& eval, double sun_altitude_rad,
                                        std::optional<double> psi_target, double power_ref = 1000.0,
                                        steady_detail::PsiCache* shared_cache = nullptr) {
  steady_detail::Layout lay{spec.mode != HcMode::passive, spec.rh_on};
  steady_detail::PsiCache local_cache;
  steady_detail::PsiCache& cache = shared_cache ? *shared_cache : local_cache;
  cache.eval = &eval;
  cache.t_amb = d.t_amb;
  const ThermalState s = steady_detail::state_from(x, lay, c);
  const ControlInput u = steady_detail::input_from(x, lay, spec);
  HeatFlows f = compute_heat_flows(s, u, d, sun_altitude_rad, c, /*smooth_door=*/true);
  f.q_hc_ss = s.q_hc_filtered;  // q_hc is the unknown here, not u_hc*gamma*p_hc
  const StateDerivative dot = reservoir_balances(s, u, f, c, s.q_hc_filtered);

  Eigen::VectorXd r(lay.size());
  r[0] = dot.d_t_rh * c.cap_rh / power_ref;
  r[1] = dot.d_t_int * c.cap_int / power_ref;
  r[2] = dot.d_t_cab * c.cap_cab / power_ref;
  r[3] = dot.d_t_shell_in * c.cap_shell_in / power_ref;
  r[4] = dot.d_t_shell_out * c.cap_shell_out / power_ref;
  if (lay.active) {
    if (!psi_target) throw ConfigError("steady_residuals: active candidate needs a psi target");
    r[5] = cache(s) - *psi_target;
  }
  return r;
}

namespace steady_detail {

/// Cabin temperature at which the passenger-averaged PMV of an isothermal
/// cabin hits `target` (bisection; used for initial guesses only).
inline double isothermal_cab_for_psi(double target, double t_amb, const ComfortEvaluator& eval) {
  double lo = celsius_to_kelvin(5.0), hi = celsius_to_kelvin(45.0);
  auto psi_at = [&](double t) {
    ThermalState s;
    s.t_rh = s.t_int = s.t_cab = s.t_shell_in = s.t_shell_out = t;
    return eval.psi(s, t_amb);
  };
  if (psi_at(lo) >= target) return lo;
  if (psi_at(hi) <= target) return hi;
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (psi_at(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline Eigen::VectorXd initial_guess(const CandidateSpec& spec, const Disturbance& d,
                                     const ModelConstants& c, const ComfortEvaluator& eval,
                                     double sun_altitude_rad, std::optional<double> psi_target) {
  Layout lay{spec.mode != HcMode::passive, spec.rh_on};
  HeatFlows sol;
  solar_gains(d, sun_altitude_rad, c, sol);

  double t_cab;
  if (lay.active) {
    t_cab = isothermal_cab_for_psi(*psi_target, d.t_amb, eval);
  } else {
    const double ua_rough = 650.0;  // effective cabin-to-ambient conductance [W/K]
    const double gains = d.n_pass * c.q_met_per_person + c.q_other + sol.q_sol_int;
    t_cab = d.t_amb + std::clamp(gains / ua_rough, 0.0, 15.0);
  }
  const double rad_lin = 4.0 * c.sigma_sb * c.area_shell * std::pow(d.t_amb, 3);
  const double t_so = d.t_amb + sol.q_sol_shell_out / (c.h_conv_outside * c.area_shell + rad_lin) +
                      0.05 * (t_cab - d.t_amb);
  const double t_si =
      (c.h_conv_inside * t_cab + c.k_shell * t_so) / (c.h_conv_inside + c.k_shell);
  const double t_int = t_cab + sol.q_sol_int / (c.h_conv_inside * c.area_interior);

  Eigen::VectorXd x(lay.size());
  x[1] = t_int;
  x[2] = t_cab;
  x[3] = t_si;
  x[4] = t_so;
  ThermalState s;
  s.t_rh = spec.rh_on ? c.t_rh_target : t_cab;
  s.t_int = t_int;
  s.t_cab = t_cab;
  s.t_shell_in = t_si;
  s.t_shell_out = t_so;
  ControlInput u;
  u.mode = spec.mode;
  u.aircurt_on = spec.aircurt;
  u.rh_on = spec.rh_on;
  HeatFlows f = compute_heat_flows(s, u, d, sun_altitude_rad, c, true);
  if (spec.rh_on) {
    x[0] = std::max(0.0, f.q_h_rh + f.q_r_rh_int + f.q_r_rh_shell);
  } else {
    x[0] = t_cab;
  }
  if (lay.active) {
    // Heat flow that would zero the cabin balance at the guess.
    x[5] = -(f.q_pass + f.q_other + f.q_h_rh + f.q_h_int - f.q_h_shell_in - f.q_door);
  }
  return x;
}

}  // namespace steady_detail

/// Solves one candidate by damped Newton on steady_residuals. Returns the
/// solution only when it is consistent with the candidate's discrete
/// choices: heat-flow sign matches the mode, the unit power limit holds,
/// the RH power is non-negative, and a passive candidate lies in the box.
inline std::optional<SteadyStateSolution> solve_candidate(const CandidateSpec& spec,
                                                          const Disturbance& d,
                                                          const ModelConstants& c,
                                                          const ComfortEvaluator& eval,
                                                          const ComfortRequirement& req,
                                                          const SteadyOptions& opt = {}) {
  steady_detail::Layout lay{spec.mode != HcMode::passive, spec.rh_on};
  const double beta = solar_altitude(d.when, opt.geo);
  std::optional<double> psi_target;
  if (spec.mode == HcMode::heating) psi_target = req.psi_min;
  if (spec.mode == HcMode::cooling) psi_target = req.psi_max;

  steady_detail::PsiCache cache;
  auto residual = [&](const Eigen::VectorXd& x) {
    return steady_residuals(x, spec, d, c, eval, beta, psi_target, opt.power_ref, &cache);
  };
  Eigen::VectorXd x0 = steady_detail::initial_guess(spec, d, c, eval, beta, psi_target);
  NewtonResult nr = newton_solve(residual, x0, opt.newton);
  if (!nr.converged && nr.residual_norm > opt.accept_residual) return std::nullopt;

  const ThermalState s = steady_detail::state_from(nr.x, lay, c);
  if (!s.plausible()) return std::nullopt;
  ControlInput u = steady_detail::input_from(nr.x, lay, spec);

  SteadyStateSolution sol;
  sol.temperatures = s;
  sol.residual_norm = nr.residual_norm;
  sol.iterations = nr.iterations;
  sol.candidate = spec.label();

  const double q_hc = lay.active ? nr.x[5] : 0.0;
  if (spec.mode == HcMode::heating) {
    if (q_hc < -1e-3) return std::nullopt;  // sign-inconsistent: mode says heat
    sol.q_heat = std::max(q_hc, 0.0);
  } else if (spec.mode == HcMode::cooling) {
    if (q_hc > 1e-3) return std::nullopt;
    sol.q_cool = std::min(q_hc, 0.0);
  }
  if (u.p_rh < 0.0) {
    if (u.p_rh < -1e-6) return std::nullopt;  // RHs cannot cool
    u.p_rh = 0.0;
  }

  sol.gamma = hvac_cop(spec.mode, s.t_cab, d.t_amb, c);
  sol.p_hc = sol.q_heat / (spec.mode == HcMode::heating ? sol.gamma : 1.0) -
             sol.q_cool / (spec.mode == HcMode::cooling ? sol.gamma : 1.0);
  const double p_limit = spec.mode == HcMode::cooling ? c.p_hc_max_cool : c.p_hc_max_heat;
  if (lay.active && sol.p_hc > p_limit * (1.0 + 1e-9)) return std::nullopt;

  sol.p_rh = u.p_rh;
  sol.p_aircurt = air_curtain_power(d, u, c);
  sol.p_hvac = sol.p_hc + sol.p_rh + sol.p_aircurt;
  sol.psi = lay.active ? *psi_target : eval.psi(s, d.t_amb);
  if (!lay.active && !req.contains(sol.psi)) return std::nullopt;

  u.p_hc = sol.p_hc;
  u.validate(c);
  sol.inputs = u;
  sol.feasible = true;
  return sol;
}

namespace steady_detail {

/// All-candidates-infeasible fallback: pin the unit at its power limit in
/// the direction the passive solution misses the box, report the achieved
/// PMV and mark the sample infeasible.
inline SteadyStateSolution fallback_solution(const Disturbance& d, const ModelConstants& c,
                                             const ComfortEvaluator& eval,
                                             const ComfortRequirement& req,
                                             const SteadyOptions& opt) {
  const double beta = solar_altitude(d.when, opt.geo);

  // Direction: where does an unforced cabin end up relative to the box?
  HcMode dir = HcMode::heating;
  {
    CandidateSpec plain{HcMode::passive, false, false};
    auto residual = [&](const Eigen::VectorXd& x) {
      return steady_residuals(x, plain, d, c, eval, beta, std::nullopt, opt.power_ref);
    };
    NewtonResult nr =
        newton_solve(residual, initial_guess(plain, d, c, eval, beta, std::nullopt), opt.newton);
    if (nr.converged || nr.residual_norm < 1e-3) {
      const ThermalState s = state_from(nr.x, Layout{false, false}, c);
      dir = eval.psi(s, d.t_amb) < req.psi_min ? HcMode::heating : HcMode::cooling;
    } else {
      dir = d.t_amb < celsius_to_kelvin(15.0) ? HcMode::heating : HcMode::cooling;
    }
  }

  double p_limit = dir == HcMode::cooling ? c.p_hc_max_cool : c.p_hc_max_heat;
  if (!std::isfinite(p_limit)) p_limit = 40.0e3;  // pragmatic peg for unlimited heaters

  SteadyStateSolution best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (bool ac : {false, true}) {
    if (ac && !c.curtains_installed) continue;
    for (bool rh : {false, true}) {
      if (rh && !c.rh_installed) continue;
      if (rh && dir == HcMode::cooling) continue;  // heaters cannot help here
      CandidateSpec spec{dir, ac, rh};
      Layout lay{false, rh};  // q_hc is forced, so the system stays 5-dimensional
      auto residual = [&](const Eigen::VectorXd& x) {
        const ThermalState s = state_from(x, lay, c);
        ControlInput u = input_from(x, lay, spec);
        u.mode = dir;
        u.p_hc = p_limit;
        HeatFlows f = compute_heat_flows(s, u, d, beta, c, true);
        const StateDerivative dot = reservoir_balances(s, u, f, c, f.q_hc_ss);
        Eigen::VectorXd r(5);
        r[0] = dot.d_t_rh * c.cap_rh / opt.power_ref;
        r[1] = dot.d_t_int * c.cap_int / opt.power_ref;
        r[2] = dot.d_t_cab * c.cap_cab / opt.power_ref;
        r[3] = dot.d_t_shell_in * c.cap_shell_in / opt.power_ref;
        r[4] = dot.d_t_shell_out * c.cap_shell_out / opt.power_ref;
        return r;
      };
      CandidateSpec passive_like{HcMode::passive, ac, rh};
      NewtonResult nr = newton_solve(
          residual, initial_guess(passive_like, d, c, eval, beta, std::nullopt), opt.newton);
      if (!nr.converged && nr.residual_norm > opt.accept_residual) continue;
      const ThermalState s = state_from(nr.x, lay, c);
      if (!s.plausible()) continue;
      ControlInput u = input_from(nr.x, lay, spec);
      if (u.p_rh < 0.0) continue;
      u.p_hc = p_limit;
      ThermalState s_full = s;
      const auto [q_hc, gamma] = hvac_heat_and_cop(u, s, d, c);
      s_full.q_hc_filtered = q_hc;
      const double psi = eval.psi(s_full, d.t_amb);
      const double dist = psi < req.psi_min ? req.psi_min - psi
                          : psi > req.psi_max ? psi - req.psi_max
                                              : 0.0;
      if (dist < best_dist) {
        best_dist = dist;
        best.inputs = u;
        best.temperatures = s_full;
        best.q_heat = std::max(q_hc, 0.0);
        best.q_cool = std::min(q_hc, 0.0);
        best.gamma = gamma;
        best.p_hc = p_limit;
        best.p_rh = u.p_rh;
        best.p_aircurt = air_curtain_power(d, u, c);
        best.p_hvac = best.p_hc + best.p_rh + best.p_aircurt;
        best.psi = psi;
        best.residual_norm = nr.residual_norm;
        best.iterations = nr.iterations;
        best.candidate = spec.label() + "+fallback";
        best.feasible = false;
      }
    }
  }
  if (!std::isfinite(best_dist))
    throw NumericalError("steady optimization: no candidate converged, not even the fallback");
  return best;
}

}  // namespace steady_detail

/// Minimizes the HVAC power for one averaged sample by enumerating the
/// admissible (mode x curtain x RH) candidates and root-finding each
/// continuous subproblem. Deterministic tie-break: fewer active auxiliaries,
/// then passive before heating before cooling.
inline SteadyStateSolution optimize_sample(const Disturbance& d, const ComfortRequirement& req,
                                           const ModelConstants& c, const ComfortEvaluator& eval,
                                           const SteadyOptions& opt = {}) {
  const auto t_start = std::chrono::steady_clock::now();
  d.validate();
  req.validate();

  std::vector<CandidateSpec> specs;
  for (HcMode mode : {HcMode::passive, HcMode::heating, HcMode::cooling}) {
    if (mode == HcMode::heating && c.heater_kind == HeaterKind::none)
      throw ConfigError("optimize_sample: no heater configured");
    for (bool ac : {false, true}) {
      if (ac && !c.curtains_installed) continue;
      if (ac && d.zeta_door <= 0.0) continue;  // duplicates the curtain-off candidate
      for (bool rh : {false, true}) {
        if (rh && !c.rh_installed) continue;
        specs.push_back({mode, ac, rh});
      }
    }
  }

  std::optional<SteadyStateSolution> best;
  auto better = [](const SteadyStateSolution& a, const SteadyStateSolution& b,
                   const CandidateSpec& sa, const CandidateSpec& sb) {
    if (std::abs(a.p_hvac - b.p_hvac) > 1e-6 * std::max(1.0, std::abs(b.p_hvac)))
      return a.p_hvac < b.p_hvac;
    if (sa.aux_count() != sb.aux_count()) return sa.aux_count() < sb.aux_count();
    auto rank = [](HcMode m) { return m == HcMode::passive ? 0 : m == HcMode::heating ? 1 : 2; };
    return rank(sa.mode) < rank(sb.mode);
  };
  std::optional<CandidateSpec> best_spec;
  for (const CandidateSpec& spec : specs) {
    auto sol = solve_candidate(spec, d, c, eval, req, opt);
    if (!sol) continue;
    if (!best || better(*sol, *best, spec, *best_spec)) {
      best = std::move(sol);
      best_spec = spec;
    }
  }

  SteadyStateSolution out =
      best ? std::move(*best) : steady_detail::fallback_solution(d, c, eval, req, opt);
  // Lifting consistency: accepted solutions never heat and cool at once.
  if (out.q_heat * out.q_cool != 0.0)
    throw NumericalError("optimize_sample produced simultaneous heating and cooling");
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t_start)
                    .count();
  return out;
}

}  // namespace bushvac
