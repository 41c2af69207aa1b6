#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crowdnav::verify {

struct CheckOutcome {
  std::string name;
  int checked = 0;    // instances or parameters compared
  int excluded = 0;   // instances skipped near ties / grid lines
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// J_u of the unit rest-to-rest instance (analytic 720) from the closed form
// and from dense Simpson quadrature of the squared jerk.
CheckOutcome minjerk_oracle();

// backprop_params vs central differences on waypoints and tau (rel 1e-5).
CheckOutcome traj_gradcheck(int instances = 20, std::uint64_t seed = 11);

// Each cost term and the weighted total vs central differences in
// coefficient/duration space, plus the total through the decision vector
// (rel 1e-4, h = 1e-6).
std::vector<CheckOutcome> cost_gradchecks(int instances = 20, std::uint64_t seed = 23);

// Policy network backward vs central differences on sampled parameters,
// including conv and attention weights (rel 1e-3).
CheckOutcome policy_gradcheck(int params = 24, std::uint64_t seed = 5);

// Everything above.
std::vector<CheckOutcome> run_all();

}  // namespace crowdnav::verify
