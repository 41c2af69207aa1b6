#pragma once

#include <utility>

namespace crowdnav::cost {

inline constexpr double kDefaultRelaxMu = 0.05;

// One-sided Huber hinge: C^1 smoothing of max(x, 0).
//   0              x <= 0
//   x^2 / (2 mu)   0 < x <= mu
//   x - mu / 2     x > mu
// Returns (value, derivative).
inline std::pair<double, double> l1_relax(double x, double mu = kDefaultRelaxMu) {
  if (x <= 0.0) return {0.0, 0.0};
  if (x <= mu) return {x * x / (2.0 * mu), x / mu};
  return {x - 0.5 * mu, 1.0};
}

}  // namespace crowdnav::cost
