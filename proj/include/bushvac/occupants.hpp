#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "bushvac/comfort.hpp"
#include "bushvac/constants.hpp"
#include "bushvac/errors.hpp"
#include "bushvac/model.hpp"
#include "bushvac/rng.hpp"
#include "bushvac/view_factor.hpp"

namespace bushvac {

constexpr double kPassengerFoot = 0.25;    // [m] footprint edge
constexpr double kPassengerHeight = 1.7;   // [m]
constexpr double kPlacementInset = 0.3;    // [m] keep-out strip along the walls
constexpr int kDefaultPassengerCount = 20;
constexpr std::uint64_t kDefaultPlacementSeed = 42;
constexpr double kViewToInterior = 0.30;   // fixed per passenger surface

/// Radiant-heater ceiling panels: a 2 x 8 grid of 0.5 m x 0.5 m panels
/// centered on the ceiling, facing down.
inline std::vector<Rect> rh_panel_layout(const ModelConstants& c) {
  const int cols = c.rh_panel_count / 2;
  const double panel = std::sqrt(c.area_rh / c.rh_panel_count);
  const double pitch_x = 2.0;  // [m] along the cabin
  const double row_offset = 0.35;  // [m] row centers at wid/2 +- offset
  std::vector<Rect> panels;
  panels.reserve(c.rh_panel_count);
  for (int r = 0; r < 2; ++r) {
    const double cy = c.wid_cab / 2.0 + (r == 0 ? -row_offset : row_offset);
    for (int i = 0; i < cols; ++i) {
      const double cx = c.len_cab / 2.0 + (i - (cols - 1) / 2.0) * pitch_x;
      Rect p;
      p.axis = 2;
      p.plane = c.hgt_cab;
      p.normal_sign = -1;
      p.lo = {cx - panel / 2.0, cy - panel / 2.0};
      p.hi = {cx + panel / 2.0, cy + panel / 2.0};
      if (p.lo[0] < 0.0 || p.hi[0] > c.len_cab || p.lo[1] < 0.0 || p.hi[1] > c.wid_cab)
        throw ConfigError("RH panel layout does not fit the configured ceiling");
      panels.push_back(p);
    }
  }
  return panels;
}

/// A passenger as an upright cuboid sensor: per-surface areas and the three
/// aggregate view-factor weights entering the mean-radiant-temperature mix.
struct PassengerGeometry {
  double x = 0.0;  // cuboid center on the cabin floor [m]
  double y = 0.0;
  // Surface list: -x, +x, -y, +y sides, then the top face.
  std::array<double, 5> area{};
  std::array<double, 5> f_rh{};
  std::array<double, 5> f_int{};
  std::array<double, 5> f_shell{};
  // Area-weighted means over the five surfaces.
  double w_rh = 0.0;
  double w_int = 0.0;
  double w_shell = 0.0;
};

inline std::array<Rect, 5> passenger_surfaces(double x, double y) {
  const double h = kPassengerFoot / 2.0;
  std::array<Rect, 5> s;
  s[0] = {0, x - h, -1, {y - h, 0.0}, {y + h, kPassengerHeight}};
  s[1] = {0, x + h, +1, {y - h, 0.0}, {y + h, kPassengerHeight}};
  s[2] = {1, y - h, -1, {x - h, 0.0}, {x + h, kPassengerHeight}};
  s[3] = {1, y + h, +1, {x - h, 0.0}, {x + h, kPassengerHeight}};
  s[4] = {2, kPassengerHeight, +1, {x - h, y - h}, {x + h, y + h}};
  return s;
}

inline PassengerGeometry make_passenger(double x, double y, const ModelConstants& c,
                                        const std::vector<Rect>& panels) {
  const double h = kPassengerFoot / 2.0;
  if (x - h < 0.0 || x + h > c.len_cab || y - h < 0.0 || y + h > c.wid_cab)
    throw ConfigError("passenger placed outside the cabin floor");
  PassengerGeometry p;
  p.x = x;
  p.y = y;
  const auto surfaces = passenger_surfaces(x, y);
  double area_sum = 0.0, rh_acc = 0.0;
  for (int i = 0; i < 5; ++i) {
    p.area[i] = surfaces[i].area();
    double f = 0.0;
    for (const Rect& panel : panels) f += rect_view_factor(surfaces[i], panel);
    p.f_rh[i] = f;
    p.f_int[i] = kViewToInterior;
    p.f_shell[i] = 1.0 - p.f_int[i] - p.f_rh[i];
    if (p.f_shell[i] < 0.0)
      throw NumericalError("passenger view factors exceed 1; check panel layout");
    area_sum += p.area[i];
    rh_acc += p.area[i] * p.f_rh[i];
  }
  p.w_rh = rh_acc / area_sum;
  p.w_int = kViewToInterior;
  p.w_shell = 1.0 - p.w_rh - p.w_int;
  return p;
}

/// Seeded uniform placement over the inset cabin floor. Identical seed and
/// count reproduce identical geometry.
inline std::vector<PassengerGeometry> sample_passengers(const ModelConstants& c,
                                                        int count = kDefaultPassengerCount,
                                                        std::uint64_t seed = kDefaultPlacementSeed) {
  const auto panels = rh_panel_layout(c);
  Rng rng(seed);
  std::vector<PassengerGeometry> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = rng.uniform(kPlacementInset, c.len_cab - kPlacementInset);
    const double y = rng.uniform(kPlacementInset, c.wid_cab - kPlacementInset);
    out.push_back(make_passenger(x, y, c, panels));
  }
  return out;
}

/// Mean radiant temperature of one passenger: the area-and-view-factor
/// weighted mix of the fourth powers of the RH, inside-shell and interior
/// temperatures.
inline double mean_radiant_temperature(const ThermalState& s, const PassengerGeometry& p) {
  auto p4 = [](double t) { return t * t * t * t; };
  const double mix = p.w_rh * p4(s.t_rh) + p.w_shell * p4(s.t_shell_in) + p.w_int * p4(s.t_int);
  return std::sqrt(std::sqrt(mix));
}

/// Cabin-level PMV: the mean over the randomized passenger set.
inline double mean_pmv(const ThermalState& s, const std::vector<PassengerGeometry>& passengers,
                       const ComfortContext& ctx) {
  if (passengers.empty()) throw ConfigError("mean_pmv: passenger set is empty");
  double acc = 0.0;
  for (const auto& p : passengers) acc += pmv(s.t_cab, mean_radiant_temperature(s, p), ctx);
  return acc / static_cast<double>(passengers.size());
}

}  // namespace bushvac
