#pragma once

#include <cmath>
#include <numbers>

namespace ttmpc {

inline constexpr double kPi = std::numbers::pi;

/// Wraps an angle to the interval (-pi, pi].
inline double wrap_to_pi(double angle) {
  double wrapped = std::remainder(angle, 2.0 * kPi);
  if (wrapped <= -kPi) {
    wrapped += 2.0 * kPi;
  }
  return wrapped;
}

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace ttmpc
