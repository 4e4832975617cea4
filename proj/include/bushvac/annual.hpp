#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "bushvac/envelope.hpp"
#include "bushvac/log.hpp"
#include "bushvac/mission.hpp"
#include "bushvac/parallel.hpp"
#include "bushvac/setpoints.hpp"
#include "bushvac/steady.hpp"

namespace bushvac {

/// One hourly-averaged operating point plus its provenance.
struct WeightedSample {
  Disturbance d;              // averaged fields; timestamp = segment midpoint
  Timestamp segment_start;    // wall-clock hour boundary
  double segment_duration_s = 3600.0;
  int month = 1;              // local calendar month, 1..12
  double weight = 0.0;        // filled by sample_weights
  std::string source_id;
};

struct SampleSet {
  std::vector<WeightedSample> samples;
  std::string provenance;

  void validate_weights() const {
    double sum = 0.0;
    for (const auto& s : samples) {
      if (!(s.weight > 0.0)) throw ConfigError("sample set: weights must be positive");
      sum += s.weight;
    }
    std::array<bool, 12> seen{};
    for (const auto& s : samples) seen[s.month - 1] = true;
    if (std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }) &&
        std::abs(sum - 1.0) > 1e-9)
      throw ConfigError("sample set: weights of a full year must sum to 1");
  }
};

/// Splits a mission into wall-clock-aligned segments (local time) and
/// arithmetically averages every disturbance field per segment. Segments
/// shorter than 5 minutes are dropped with a warning.
inline SampleSet segment_and_average(const MissionTrace& trace, std::int64_t segment_s = 3600,
                                     std::int64_t min_segment_s = 300) {
  trace.validate();
  if (segment_s <= 0) throw ConfigError("segment_and_average: segment length must be positive");
  SampleSet out;
  out.provenance = trace.mission_id;

  const int tz = trace.samples.front().when.tz_offset_min;
  auto segment_index = [&](std::int64_t epoch) {
    const std::int64_t local = epoch + static_cast<std::int64_t>(tz) * 60;
    std::int64_t idx = local / segment_s;
    if (local < 0 && local % segment_s != 0) --idx;
    return idx;
  };

  // Median sample spacing, used to credit each sample with a duration.
  double nominal_dt = 1.0;
  if (trace.samples.size() > 1) {
    std::vector<double> gaps;
    gaps.reserve(trace.samples.size() - 1);
    for (size_t i = 1; i < trace.samples.size(); ++i)
      gaps.push_back(static_cast<double>(trace.samples[i].when.epoch_s -
                                         trace.samples[i - 1].when.epoch_s));
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    nominal_dt = gaps[gaps.size() / 2];
  }

  size_t i = 0;
  while (i < trace.samples.size()) {
    const std::int64_t seg = segment_index(trace.samples[i].when.epoch_s);
    size_t j = i;
    Disturbance acc = trace.samples[i];
    acc.t_amb = 0.0;
    acc.i_dni = acc.i_dhi = acc.n_pass = acc.zeta_door = acc.zeta_sh = 0.0;
    while (j < trace.samples.size() && segment_index(trace.samples[j].when.epoch_s) == seg) {
      const Disturbance& d = trace.samples[j];
      acc.t_amb += d.t_amb;
      acc.i_dni += d.i_dni;
      acc.i_dhi += d.i_dhi;
      acc.n_pass += d.n_pass;
      acc.zeta_door += d.zeta_door;
      acc.zeta_sh += d.zeta_sh;
      ++j;
    }
    const double n = static_cast<double>(j - i);
    const double covered_s = n * nominal_dt;
    if (covered_s >= static_cast<double>(min_segment_s)) {
      WeightedSample ws;
      ws.d = acc;
      ws.d.t_amb = acc.t_amb / n;
      ws.d.i_dni = acc.i_dni / n;
      ws.d.i_dhi = acc.i_dhi / n;
      ws.d.n_pass = acc.n_pass / n;
      ws.d.zeta_door = acc.zeta_door / n;
      ws.d.zeta_sh = acc.zeta_sh / n;
      const std::int64_t seg_start_epoch = seg * segment_s - static_cast<std::int64_t>(tz) * 60;
      ws.segment_start = Timestamp{seg_start_epoch, tz};
      ws.segment_duration_s = covered_s;
      ws.d.when = Timestamp{trace.samples[i].when.epoch_s +
                                static_cast<std::int64_t>(covered_s / 2.0),
                            tz};
      ws.month = local_month(ws.d.when);
      ws.source_id = trace.mission_id;
      out.samples.push_back(std::move(ws));
    } else {
      log::warn("dropping segment of " + std::to_string(covered_s) + " s (< " +
                std::to_string(min_segment_s) + " s) starting at " +
                format_timestamp(trace.samples[i].when));
    }
    i = j;
  }
  if (out.samples.empty()) throw IoError("segment_and_average produced no usable segments");
  return out;
}

/// Month-frequency weights: w_i = (1 / n_samples_in_month) *
/// (days_in_month / days_in_year). Defaults to the non-leap calendar.
inline std::vector<double> sample_weights(SampleSet& set,
                                          const std::array<int, 12>& month_days = {
                                              31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31}) {
  double year_days = 0.0;
  for (int d : month_days) year_days += d;
  std::array<int, 12> counts{};
  for (const auto& s : set.samples) {
    if (s.month < 1 || s.month > 12) throw ConfigError("sample_weights: month tag out of range");
    counts[s.month - 1]++;
  }
  for (int m = 0; m < 12; ++m)
    if (counts[m] == 0)
      log::warn("sample_weights: no samples in month " + std::to_string(m + 1) +
                "; that month contributes nothing");
  std::vector<double> w;
  w.reserve(set.samples.size());
  for (auto& s : set.samples) {
    s.weight = (1.0 / counts[s.month - 1]) * (month_days[s.month - 1] / year_days);
    w.push_back(s.weight);
  }
  return w;
}

/// Weighted annual mean of per-sample HVAC powers.
inline double annual_mean(const std::vector<double>& p_hvac, const std::vector<double>& weights) {
  if (p_hvac.size() != weights.size())
    throw ConfigError("annual_mean: powers and weights differ in length");
  double acc = 0.0;
  for (size_t i = 0; i < p_hvac.size(); ++i) acc += weights[i] * p_hvac[i];
  return acc;
}

struct DesignVariant {
  std::string name;  // e.g. "hp,+curtains"
  ModelConstants constants;

  static DesignVariant from_spec(const std::string& spec, ModelConstants base) {
    base.apply_design(spec);
    base.validate();
    return {spec, std::move(base)};
  }
};

struct ParetoRow {
  std::string design;
  ComfortRequirement requirement;
  double annual_mean_w = 0.0;
  double frac_lower_active = 0.0;  // |psi - psi_min| <= tol among feasible samples
  double frac_upper_active = 0.0;
  double frac_passive = 0.0;
  int infeasible_count = 0;
  double median_wall_ms = 0.0;
};

struct SweepCell {
  ParetoRow row;
  std::vector<SteadyStateSolution> solutions;  // one per sample, sample order
};

struct SweepResult {
  std::vector<SweepCell> cells;  // designs x requirements, row-major in requirement
};

constexpr double kBoundActiveTol = 0.01;

/// Optimizes every sample for every (design, comfort requirement) pair and
/// reduces to annual means and PMV-bound statistics. Samples fan out over
/// worker threads; per-sample infeasibility is counted, not fatal.
inline SweepResult pareto_sweep(const SampleSet& set,
                                const std::vector<ComfortRequirement>& requirements,
                                const std::vector<DesignVariant>& designs,
                                const ComfortEvaluator& eval, const SteadyOptions& opt = {},
                                unsigned threads = 0) {
  if (requirements.size() < 2)
    log::warn("pareto_sweep: fewer than 2 comfort requirements; the front is a single point");
  SweepResult result;
  for (const auto& design : designs) {
    for (const auto& req : requirements) {
      SweepCell cell;
      cell.row.design = design.name;
      cell.row.requirement = req;
      cell.solutions.resize(set.samples.size());
      parallel_for(
          set.samples.size(),
          [&](size_t i) {
            cell.solutions[i] = optimize_sample(set.samples[i].d, req, design.constants, eval, opt);
          },
          threads);

      std::vector<double> powers(set.samples.size()), weights(set.samples.size());
      std::vector<double> wall(set.samples.size());
      int lower = 0, upper = 0, passive = 0, infeasible = 0;
      for (size_t i = 0; i < set.samples.size(); ++i) {
        const auto& sol = cell.solutions[i];
        powers[i] = sol.p_hvac;
        weights[i] = set.samples[i].weight;
        wall[i] = sol.wall_ms;
        if (!sol.feasible) {
          ++infeasible;
        } else if (std::abs(sol.psi - req.psi_min) <= kBoundActiveTol) {
          ++lower;
        } else if (std::abs(sol.psi - req.psi_max) <= kBoundActiveTol) {
          ++upper;
        } else {
          ++passive;
        }
      }
      cell.row.annual_mean_w = annual_mean(powers, weights);
      const double n = static_cast<double>(set.samples.size());
      cell.row.frac_lower_active = lower / n;
      cell.row.frac_upper_active = upper / n;
      cell.row.frac_passive = passive / n;
      cell.row.infeasible_count = infeasible;
      std::nth_element(wall.begin(), wall.begin() + wall.size() / 2, wall.end());
      cell.row.median_wall_ms = wall[wall.size() / 2];
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

struct SetpointFitResult {
  SetpointProfile profile;
  bool heating_fitted = false;
  bool cooling_fitted = false;
  std::string heating_message;
  std::string cooling_message;
  int heating_points = 0;
  int cooling_points = 0;
};

constexpr int kMinEnvelopePoints = 10;

/// Extracts conservative cabin-setpoint profiles from per-sample optimal
/// solutions: an upper-envelope quadratic through the heating points and a
/// lower-envelope two-segment piecewise-linear curve through the cooling
/// points (free breakpoint found by scan). A mode with fewer than 10 points
/// is refused.
inline SetpointFitResult fit_setpoint_profiles(const SampleSet& set,
                                               const std::vector<SteadyStateSolution>& solutions,
                                               const EnvelopeOptions& opt = {}) {
  if (solutions.size() != set.samples.size())
    throw ConfigError("fit_setpoint_profiles: solutions do not match the sample set");
  std::vector<std::pair<double, double>> heat_pts, cool_pts;  // (t_amb degC, t_cab degC)
  for (size_t i = 0; i < solutions.size(); ++i) {
    if (!solutions[i].feasible) continue;
    const double ta = kelvin_to_celsius(set.samples[i].d.t_amb);
    const double tc = kelvin_to_celsius(solutions[i].temperatures.t_cab);
    if (solutions[i].inputs.mode == HcMode::heating) heat_pts.emplace_back(ta, tc);
    if (solutions[i].inputs.mode == HcMode::cooling) cool_pts.emplace_back(ta, tc);
  }

  SetpointFitResult res;
  res.heating_points = static_cast<int>(heat_pts.size());
  res.cooling_points = static_cast<int>(cool_pts.size());

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : set.samples) {
    lo = std::min(lo, kelvin_to_celsius(s.d.t_amb));
    hi = std::max(hi, kelvin_to_celsius(s.d.t_amb));
  }
  res.profile.valid_lo_k = celsius_to_kelvin(lo);
  res.profile.valid_hi_k = celsius_to_kelvin(hi);

  if (heat_pts.size() < kMinEnvelopePoints) {
    res.heating_message = "fit refused: only " + std::to_string(heat_pts.size()) +
                          " heating points (need " + std::to_string(kMinEnvelopePoints) + ")";
  } else {
    Eigen::MatrixXd A(heat_pts.size(), 3);
    Eigen::VectorXd y(heat_pts.size());
    for (size_t i = 0; i < heat_pts.size(); ++i) {
      A(i, 0) = 1.0;
      A(i, 1) = heat_pts[i].first;
      A(i, 2) = heat_pts[i].first * heat_pts[i].first;
      y[i] = heat_pts[i].second;
    }
    const Eigen::VectorXd x = envelope_fit(A, y, EnvelopeSide::upper, opt);
    res.profile.heat_c0 = x[0];
    res.profile.heat_c1 = x[1];
    res.profile.heat_c2 = x[2];
    res.heating_fitted = true;
  }

  if (cool_pts.size() < kMinEnvelopePoints) {
    res.cooling_message = "fit refused: only " + std::to_string(cool_pts.size()) +
                          " cooling points (need " + std::to_string(kMinEnvelopePoints) + ")";
  } else {
    std::vector<double> ts;
    ts.reserve(cool_pts.size());
    for (const auto& pt : cool_pts) ts.push_back(pt.first);
    std::sort(ts.begin(), ts.end());
    double best_obj = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_x;
    double best_break = ts[ts.size() / 2];
    constexpr int kBreakScan = 25;
    for (int k = 0; k < kBreakScan; ++k) {
      const double qf = 0.1 + 0.8 * k / (kBreakScan - 1);
      const double tb = ts[static_cast<size_t>(qf * (ts.size() - 1))];
      Eigen::MatrixXd A(cool_pts.size(), 3);
      Eigen::VectorXd y(cool_pts.size());
      for (size_t i = 0; i < cool_pts.size(); ++i) {
        const double dt = cool_pts[i].first - tb;
        A(i, 0) = 1.0;
        A(i, 1) = std::min(dt, 0.0);
        A(i, 2) = std::max(dt, 0.0);
        y[i] = cool_pts[i].second;
      }
      const Eigen::VectorXd x = envelope_fit(A, y, EnvelopeSide::lower, opt);
      const double obj = (A * x - y).squaredNorm();
      if (obj < best_obj) {
        best_obj = obj;
        best_x = x;
        best_break = tb;
      }
    }
    res.profile.cool_break_c = best_break;
    res.profile.cool_value_c = best_x[0];
    res.profile.cool_slope_lo = best_x[1];
    res.profile.cool_slope_hi = best_x[2];
    res.cooling_fitted = true;
  }
  return res;
}

struct ThresholdFitResult {
  CurtainThresholds thresholds;
  double misclass_heat = 0.0;  // misclassified fraction under the fitted rule
  double misclass_cool = 0.0;
  bool heat_degenerate = false;  // single-class data
  bool cool_degenerate = false;
  int heat_points = 0;
  int cool_points = 0;
};

namespace annual_detail {

struct ThresholdScan {
  double threshold = 0.0;
  double misclass = 0.0;
  bool degenerate = false;
};

/// 1-D threshold minimizing misclassification of "on iff x > theta"; among
/// optimal candidates the midpoint of the optimal span is returned.
inline ThresholdScan scan_threshold(std::vector<std::pair<double, bool>> data) {
  ThresholdScan out;
  if (data.empty()) {
    out.degenerate = true;
    return out;
  }
  std::sort(data.begin(), data.end());
  const bool any_on = std::any_of(data.begin(), data.end(), [](auto& p) { return p.second; });
  const bool any_off = std::any_of(data.begin(), data.end(), [](auto& p) { return !p.second; });
  if (!any_on || !any_off) {
    out.degenerate = true;
    out.threshold = any_on ? data.front().first - 0.5 : data.back().first + 0.5;
    return out;
  }
  std::vector<double> candidates;
  candidates.push_back(data.front().first - 0.5);
  for (size_t i = 1; i < data.size(); ++i)
    if (data[i].first > data[i - 1].first)
      candidates.push_back(0.5 * (data[i - 1].first + data[i].first));
  candidates.push_back(data.back().first + 0.5);

  // Prefix counts of "on" labels make each candidate O(log n).
  std::vector<int> on_prefix(data.size() + 1, 0);
  for (size_t i = 0; i < data.size(); ++i)
    on_prefix[i + 1] = on_prefix[i] + (data[i].second ? 1 : 0);
  const int total_on = on_prefix.back();

  int best_err = static_cast<int>(data.size()) + 1;
  double span_lo = 0.0, span_hi = 0.0;
  for (double cand : candidates) {
    const auto it = std::upper_bound(data.begin(), data.end(), std::make_pair(cand, true));
    const int below = static_cast<int>(it - data.begin());
    const int on_below = on_prefix[below];
    const int off_above = (static_cast<int>(data.size()) - below) - (total_on - on_below);
    const int err = on_below + off_above;
    if (err < best_err) {
      best_err = err;
      span_lo = span_hi = cand;
    } else if (err == best_err) {
      span_hi = cand;
    }
  }
  out.threshold = 0.5 * (span_lo + span_hi);
  out.misclass = static_cast<double>(best_err) / static_cast<double>(data.size());
  return out;
}

}  // namespace annual_detail

/// Fits the per-mode curtain activation thresholds that minimize
/// misclassification of the optimizer's curtain decisions. Only samples with
/// open doors carry a meaningful decision and enter the fit.
inline ThresholdFitResult fit_curtain_thresholds(const SampleSet& set,
                                                 const std::vector<SteadyStateSolution>& solutions) {
  if (solutions.size() != set.samples.size())
    throw ConfigError("fit_curtain_thresholds: solutions do not match the sample set");
  std::vector<std::pair<double, bool>> heat, cool;
  for (size_t i = 0; i < solutions.size(); ++i) {
    const auto& sol = solutions[i];
    if (!sol.feasible || set.samples[i].d.zeta_door <= 0.0) continue;
    const double dt = sol.temperatures.t_cab - set.samples[i].d.t_amb;
    if (sol.inputs.mode == HcMode::heating) heat.emplace_back(dt, sol.inputs.aircurt_on);
    if (sol.inputs.mode == HcMode::cooling) cool.emplace_back(-dt, sol.inputs.aircurt_on);
  }
  ThresholdFitResult res;
  res.heat_points = static_cast<int>(heat.size());
  res.cool_points = static_cast<int>(cool.size());
  auto hs = annual_detail::scan_threshold(std::move(heat));
  auto cs = annual_detail::scan_threshold(std::move(cool));
  res.thresholds.theta_heat_k = hs.threshold;
  res.thresholds.theta_cool_k = cs.threshold;
  res.misclass_heat = hs.misclass;
  res.misclass_cool = cs.misclass;
  res.heat_degenerate = hs.degenerate;
  res.cool_degenerate = cs.degenerate;
  if (hs.degenerate)
    log::warn("curtain threshold fit: heating data is single-class; threshold at range boundary");
  if (cs.degenerate)
    log::warn("curtain threshold fit: cooling data is single-class; threshold at range boundary");
  return res;
}

}  // namespace bushvac
