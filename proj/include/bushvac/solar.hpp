#pragma once

#include <cmath>

#include "bushvac/time.hpp"

namespace bushvac {

/// Geographic position used for solar geometry.
struct GeoPos {
  double latitude_deg = 47.3769;  // Zurich by default
  double longitude_deg = 8.5417;
};

namespace detail {
constexpr double kDeg2Rad = M_PI / 180.0;

inline double julian_day(std::int64_t epoch_s) {
  // Unix epoch is JD 2440587.5.
  return 2440587.5 + static_cast<double>(epoch_s) / 86400.0;
}
}  // namespace detail

/// Solar altitude angle above the horizon [rad], NOAA/Meeus low-precision
/// ephemeris (no atmospheric refraction). Accurate to well under 0.1 deg for
/// the years of interest.
inline double solar_altitude(const Timestamp& t, const GeoPos& pos) {
  using detail::kDeg2Rad;
  const double jd = detail::julian_day(t.epoch_s);
  const double T = (jd - 2451545.0) / 36525.0;

  double geo_mean_long = std::fmod(280.46646 + T * (36000.76983 + 0.0003032 * T), 360.0);
  if (geo_mean_long < 0.0) geo_mean_long += 360.0;
  const double mean_anom = 357.52911 + T * (35999.05029 - 0.0001537 * T);
  const double ecc = 0.016708634 - T * (0.000042037 + 0.0000001267 * T);
  const double mr = mean_anom * kDeg2Rad;
  const double eq_center = std::sin(mr) * (1.914602 - T * (0.004817 + 0.000014 * T)) +
                           std::sin(2 * mr) * (0.019993 - 0.000101 * T) +
                           std::sin(3 * mr) * 0.000289;
  const double true_long = geo_mean_long + eq_center;
  const double omega = (125.04 - 1934.136 * T) * kDeg2Rad;
  const double app_long = (true_long - 0.00569 - 0.00478 * std::sin(omega)) * kDeg2Rad;
  const double mean_obliq =
      23.0 + (26.0 + (21.448 - T * (46.815 + T * (0.00059 - T * 0.001813))) / 60.0) / 60.0;
  const double obliq = (mean_obliq + 0.00256 * std::cos(omega)) * kDeg2Rad;
  const double decl = std::asin(std::sin(obliq) * std::sin(app_long));

  const double y = std::tan(obliq / 2.0) * std::tan(obliq / 2.0);
  const double l0r = geo_mean_long * kDeg2Rad;
  const double eot_min =
      4.0 / kDeg2Rad *
      (y * std::sin(2 * l0r) - 2.0 * ecc * std::sin(mr) +
       4.0 * ecc * y * std::sin(mr) * std::cos(2 * l0r) - 0.5 * y * y * std::sin(4 * l0r) -
       1.25 * ecc * ecc * std::sin(2 * mr));

  double frac_day = std::fmod(jd - 0.5, 1.0);
  if (frac_day < 0.0) frac_day += 1.0;
  double true_solar_min = std::fmod(frac_day * 1440.0 + eot_min + 4.0 * pos.longitude_deg, 1440.0);
  if (true_solar_min < 0.0) true_solar_min += 1440.0;
  const double hour_angle = (true_solar_min / 4.0 - 180.0) * kDeg2Rad;

  const double lat = pos.latitude_deg * kDeg2Rad;
  double cos_zenith = std::sin(lat) * std::sin(decl) + std::cos(lat) * std::cos(decl) * std::cos(hour_angle);
  cos_zenith = std::max(-1.0, std::min(1.0, cos_zenith));
  return M_PI / 2.0 - std::acos(cos_zenith);
}

}  // namespace bushvac
