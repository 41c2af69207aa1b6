#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace crowdnav {

using Vec2 = Eigen::Vector2d;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

}  // namespace crowdnav
