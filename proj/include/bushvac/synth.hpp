#pragma once

#include <cmath>
#include <string>

#include "bushvac/constants.hpp"
#include "bushvac/mission.hpp"
#include "bushvac/rng.hpp"
#include "bushvac/solar.hpp"

namespace bushvac {

/// Deterministic synthetic data for desk-scale runs without the proprietary
/// datasets: two single-day missions at 1 Hz and an hourly year-round set.
enum class SynthProfile { winter_day, summer_day, year_round };

inline SynthProfile synth_profile_from_string(const std::string& s) {
  if (s == "winter-day") return SynthProfile::winter_day;
  if (s == "summer-day") return SynthProfile::summer_day;
  if (s == "year-round") return SynthProfile::year_round;
  throw ConfigError("unknown synthetic profile '" + s +
                    "' (want winter-day|summer-day|year-round)");
}

namespace synth_detail {

/// Clear-sky direct normal irradiance with a simple air-mass attenuation.
inline double clear_sky_dni(double sun_altitude_rad, double i0) {
  const double s = std::sin(sun_altitude_rad);
  if (s <= 0.0) return 0.0;
  return i0 * std::exp(-0.30 / std::max(s, 0.08));
}

inline double clear_sky_dhi(double sun_altitude_rad, double i0) {
  const double s = std::sin(sun_altitude_rad);
  if (s <= 0.0) return 0.0;
  return 0.14 * i0 * std::sqrt(s);
}

/// Smoothly varying cloud factor in (0.25, 1]: a seeded random walk sampled
/// every 10 minutes, linearly interpolated.
struct CloudTrack {
  std::vector<double> knots;
  double knot_dt;

  CloudTrack(Rng& rng, double duration_s, double clearness, double dt = 600.0) : knot_dt(dt) {
    const int n = static_cast<int>(duration_s / dt) + 2;
    double level = clearness;
    for (int i = 0; i < n; ++i) {
      level += rng.uniform(-0.12, 0.12);
      level = std::clamp(level, 0.25, 1.0);
      knots.push_back(level);
    }
  }

  double at(double t_s) const {
    const double pos = t_s / knot_dt;
    const size_t i = std::min(static_cast<size_t>(pos), knots.size() - 2);
    const double f = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return knots[i] + f * (knots[i + 1] - knots[i]);
  }
};

/// Diurnal ambient temperature: minimum near 05:00, maximum near 15:00.
inline double diurnal_t_amb(double mean_c, double ampl_c, double local_hour) {
  return celsius_to_kelvin(mean_c - ampl_c * std::cos(2.0 * M_PI * (local_hour - 3.0) / 24.0));
}

/// Passenger target level over the day: commuter peaks at 08:00 and 17:30.
inline double passenger_target(double local_hour, double scale) {
  auto bump = [](double h, double center, double width) {
    const double z = (h - center) / width;
    return std::exp(-0.5 * z * z);
  };
  return scale * (0.25 + 0.9 * bump(local_hour, 8.0, 1.6) + 0.8 * bump(local_hour, 17.5, 1.8));
}

inline MissionTrace synth_day(int year, int month, int day, int tz_offset_min, double mean_c,
                              double ampl_c, double i0, double clearness, double pass_scale,
                              std::uint64_t seed, const std::string& id) {
  MissionTrace trace;
  trace.mission_id = id;
  trace.coords = GeoPos{};
  Rng rng(seed);
  Rng rng_doors = rng.fork(1);
  Rng rng_pass = rng.fork(2);
  Rng rng_shade = rng.fork(3);

  const Timestamp start = make_timestamp(year, month, day, 5, 0, 0, tz_offset_min);
  const std::int64_t duration = 14 * 3600;
  CloudTrack clouds(rng, static_cast<double>(duration), clearness);

  // Stop pattern: door-open dwell windows separated by driving legs.
  std::vector<std::pair<std::int64_t, std::int64_t>> dwells;
  std::int64_t t = 1500 + static_cast<std::int64_t>(rng_doors.uniform(0, 120));
  while (t < duration) {
    const std::int64_t dwell = 15 + static_cast<std::int64_t>(rng_doors.uniform(0, 20));
    dwells.emplace_back(t, std::min(t + dwell, duration));
    t += dwell + 180 + static_cast<std::int64_t>(rng_doors.uniform(0, 240));
  }

  // Shade blocks of five minutes each.
  std::vector<double> shade_blocks;
  for (std::int64_t b = 0; b <= duration / 300; ++b)
    shade_blocks.push_back(rng_shade.uniform() < 0.55 ? 0.0 : rng_shade.uniform(0.1, 0.5));

  trace.samples.reserve(static_cast<size_t>(duration));
  size_t dwell_idx = 0;
  double n_pass = 0.0;
  for (std::int64_t k = 0; k < duration; ++k) {
    Disturbance d;
    d.when = start.plus_seconds(k);
    const double local_hour = 5.0 + static_cast<double>(k) / 3600.0;
    d.t_amb = diurnal_t_amb(mean_c, ampl_c, local_hour);
    const double beta = solar_altitude(d.when, trace.coords);
    const double cf = clouds.at(static_cast<double>(k));
    d.i_dni = clear_sky_dni(beta, i0) * cf;
    d.i_dhi = clear_sky_dhi(beta, i0) * (1.2 - 0.5 * cf);
    d.zeta_sh = shade_blocks[static_cast<size_t>(k / 300)];

    while (dwell_idx < dwells.size() && k >= dwells[dwell_idx].second) ++dwell_idx;
    const bool doors_open =
        dwell_idx < dwells.size() && k >= dwells[dwell_idx].first && k < dwells[dwell_idx].second;
    d.zeta_door = doors_open ? 0.6 : 0.0;

    // Passenger count changes only while the doors are open.
    if (doors_open && k == dwells[dwell_idx].first) {
      const double target = passenger_target(local_hour, pass_scale);
      const double pull = 0.45 * (target - n_pass);
      n_pass = std::clamp(n_pass + pull + rng_pass.uniform(-3.0, 3.0), 0.0, 60.0);
      n_pass = std::floor(n_pass + 0.5);
    }
    d.n_pass = k < 1500 ? 0.0 : n_pass;  // depot leg runs empty
    trace.samples.push_back(d);
  }
  return trace;
}

}  // namespace synth_detail

inline MissionTrace synth_mission(SynthProfile profile, std::uint64_t seed) {
  using namespace synth_detail;
  switch (profile) {
    case SynthProfile::winter_day:
      return synth_day(2022, 12, 10, 60, 0.5, 3.0, 650.0, 0.55, 38.0, seed ^ 0x5157,
                       "synthetic-winter-day");
    case SynthProfile::summer_day:
      return synth_day(2019, 7, 24, 120, 25.0, 5.0, 920.0, 0.85, 34.0, seed ^ 0x51AB,
                       "synthetic-summer-day");
    case SynthProfile::year_round: {
      MissionTrace trace;
      trace.mission_id = "synthetic-year-round";
      trace.coords = GeoPos{};
      Rng rng(seed ^ 0x5EA5);
      double day_offset = 0.0;
      for (int k = 0; k < 75; ++k) {
        const int doy = 3 + static_cast<int>(k * 4.87);
        const Timestamp day0 = Timestamp{make_timestamp(2019, 1, 1, 0, 0, 0, 60).epoch_s +
                                             static_cast<std::int64_t>(doy - 1) * 86400,
                                         60};
        day_offset = std::clamp(day_offset + rng.uniform(-2.5, 2.5), -5.0, 5.0);
        const double season = 9.0 - 9.5 * std::cos(2.0 * M_PI * (doy - 15.0) / 365.0);
        const double clearness = rng.uniform(0.35, 0.95);
        Rng rng_day = rng.fork(100 + k);
        for (int h = 6; h < 20; ++h) {
          Disturbance d;
          d.when = day0.plus_seconds(h * 3600 + 1800);  // segment midpoint
          d.t_amb = diurnal_t_amb(season + day_offset, 4.0, h + 0.5);
          const double beta = solar_altitude(d.when, trace.coords);
          const double i0 = 750.0 + 250.0 * std::sin(M_PI * std::min(doy, 364) / 365.0);
          d.i_dni = clear_sky_dni(beta, i0) * clearness;
          d.i_dhi = clear_sky_dhi(beta, i0) * (1.2 - 0.5 * clearness);
          d.n_pass = std::floor(passenger_target(h + 0.5, 36.0) + rng_day.uniform(0.0, 4.0));
          d.zeta_door = 0.6 * rng_day.uniform(0.04, 0.13);
          d.zeta_sh = rng_day.uniform(0.0, 0.4);
          trace.samples.push_back(d);
        }
      }
      return trace;
    }
  }
  throw ConfigError("unreachable synthetic profile");
}

}  // namespace bushvac
