#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "bushvac/errors.hpp"

namespace bushvac {

/// Axis-aligned rectangle in 3-D: lies in the plane {coord[axis] == plane},
/// spans [lo, hi] along the two remaining axes (in ascending axis order),
/// and radiates toward normal_sign * axis.
struct Rect {
  int axis = 2;          // 0=x, 1=y, 2=z (axis the plane is normal to)
  double plane = 0.0;
  int normal_sign = 1;   // +1 or -1
  std::array<double, 2> lo{0.0, 0.0};
  std::array<double, 2> hi{1.0, 1.0};

  std::array<int, 2> tangent_axes() const {
    switch (axis) {
      case 0: return {1, 2};
      case 1: return {0, 2};
      default: return {0, 1};
    }
  }
  double area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }
};

namespace vf_detail {

/// Gauss-Legendre nodes/weights on [-1, 1], computed once per order.
inline const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int n) {
  static thread_local int cached_n = 0;
  static thread_local std::pair<std::vector<double>, std::vector<double>> cache;
  if (cached_n == n) return cache;
  std::vector<double> x(n), w(n);
  for (int i = 0; i < n; ++i) {
    // Newton iteration from the Chebyshev estimate.
    double xi = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = xi;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
      double step = p1 / dp;
      xi -= step;
      if (std::abs(step) < 1e-15) break;
    }
    double p0 = 1.0, p1 = xi;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2 * k - 1) * xi * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (xi * p1 - p0) / (xi * xi - 1.0);
    x[i] = xi;
    w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
  }
  cache = {std::move(x), std::move(w)};
  cached_n = n;
  return cache;
}

/// View factor from a differential element (at the origin, normal +z) to the
/// corner-aligned rectangle [0,a] x [0,b] in the parallel plane z = c.
inline double point_corner_parallel(double a, double b, double c) {
  const double A = std::hypot(a, c);
  const double B = std::hypot(b, c);
  return (a / A * std::atan(b / A) + b / B * std::atan(a / B)) / (2.0 * M_PI);
}

/// Element at origin, normal +z; target rectangle spans [u1,u2] x [v1,v2]
/// in the plane at perpendicular distance c, by corner superposition.
inline double point_to_parallel_rect(double u1, double u2, double v1, double v2, double c) {
  auto g = [c](double u, double v) {
    double s = (u >= 0 ? 1.0 : -1.0) * (v >= 0 ? 1.0 : -1.0);
    return s * point_corner_parallel(std::abs(u), std::abs(v), c);
  };
  return g(u2, v2) - g(u1, v2) - g(u2, v1) + g(u1, v1);
}

/// Element at origin, normal +z; target rectangle in the perpendicular plane
/// y = yp (yp > 0) spanning x in [x1,x2] and z in [z1,z2], z1 >= 0.
inline double point_to_perp_rect(double x1, double x2, double z1, double z2, double yp) {
  const double q1 = std::hypot(yp, z1);
  const double q2 = std::hypot(yp, z2);
  auto h = [&](double x) { return std::atan(x / q1) / q1 - std::atan(x / q2) / q2; };
  return yp / (2.0 * M_PI) * (h(x2) - h(x1));
}

}  // namespace vf_detail

/// View factor from a differential element at `point` with unit normal along
/// axis `n_axis` (direction `n_sign`) to rectangle `b`. Parts of `b` behind
/// the element's horizon or behind its own face contribute nothing.
inline double point_rect_view_factor(const std::array<double, 3>& point, int n_axis, int n_sign,
                                     const Rect& b) {
  using namespace vf_detail;
  if (b.axis == n_axis) {
    const double c = n_sign * (b.plane - point[n_axis]);
    if (c <= 0.0) return 0.0;                                   // behind the element
    if (n_sign * b.normal_sign > 0) return 0.0;                 // target faces away
    auto tb = b.tangent_axes();
    return point_to_parallel_rect(b.lo[0] - point[tb[0]], b.hi[0] - point[tb[0]],
                                  b.lo[1] - point[tb[1]], b.hi[1] - point[tb[1]], c);
  }
  // Perpendicular planes. Shared axis = the one that is neither normal.
  int shared = 3 - n_axis - b.axis;
  const double yp_signed = b.plane - point[b.axis];
  if (yp_signed * b.normal_sign > 0) return 0.0;  // target faces away from the element
  const double yp = std::abs(yp_signed);
  if (yp == 0.0) return 0.0;
  auto tb = b.tangent_axes();
  double x1 = 0, x2 = 0, z1 = 0, z2 = 0;
  for (int k = 0; k < 2; ++k) {
    if (tb[k] == shared) {
      x1 = b.lo[k] - point[shared];
      x2 = b.hi[k] - point[shared];
    } else {  // extent along the element's normal axis
      z1 = n_sign * (b.lo[k] - point[n_axis]);
      z2 = n_sign * (b.hi[k] - point[n_axis]);
    }
  }
  if (z2 < z1) std::swap(z1, z2);
  z1 = std::max(z1, 0.0);  // clip everything below the element's horizon
  if (z2 <= z1) return 0.0;
  return vf_detail::point_to_perp_rect(x1, x2, z1, z2, yp);
}

/// Area-averaged view factor F_{A->B} for axis-aligned rectangles whose
/// planes are parallel or perpendicular. The closed-form element solution is
/// integrated over A with a fixed-order Gauss-Legendre rule.
inline double rect_view_factor(const Rect& a, const Rect& b, int quad_order = 20) {
  if (a.axis < 0 || a.axis > 2 || b.axis < 0 || b.axis > 2)
    throw ConfigError("rect_view_factor: invalid axis");
  if (a.axis == b.axis && a.plane == b.plane)
    throw ConfigError("rect_view_factor: rectangles are coplanar");
  if (std::abs(a.normal_sign) != 1 || std::abs(b.normal_sign) != 1)
    throw ConfigError("rect_view_factor: normal sign must be +1 or -1");
  const auto& [nodes, weights] = vf_detail::gauss_legendre(quad_order);
  auto ta = a.tangent_axes();
  const double cu = 0.5 * (a.lo[0] + a.hi[0]), hu = 0.5 * (a.hi[0] - a.lo[0]);
  const double cv = 0.5 * (a.lo[1] + a.hi[1]), hv = 0.5 * (a.hi[1] - a.lo[1]);
  double acc = 0.0;
  for (int i = 0; i < quad_order; ++i) {
    for (int j = 0; j < quad_order; ++j) {
      std::array<double, 3> p{};
      p[a.axis] = a.plane;
      p[ta[0]] = cu + hu * nodes[i];
      p[ta[1]] = cv + hv * nodes[j];
      acc += weights[i] * weights[j] * point_rect_view_factor(p, a.axis, a.normal_sign, b);
    }
  }
  // The weight product integrates over [-1,1]^2 (measure 4); the average
  // over A is acc / 4.
  double f = acc / 4.0;
  if (f < 0.0) f = 0.0;
  if (f > 1.0) f = 1.0;
  return f;
}

}  // namespace bushvac
