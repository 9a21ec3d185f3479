// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mmadoa {

inline constexpr double kPi = std::numbers::pi;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

// Wraps an angle to [-pi, pi).
inline double wrap_pi(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  return w >= kPi ? w - 2.0 * kPi : w;
}

// Central angle between two directions given as (co-elevation, azimuth).
inline double great_circle_angle(double theta1, double phi1, double theta2, double phi2) {
  double c = std::cos(theta1) * std::cos(theta2) +
             std::sin(theta1) * std::sin(theta2) * std::cos(phi1 - phi2);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace mmadoa
