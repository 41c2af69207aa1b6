#pragma once

#include <span>

#include <Eigen/Dense>

namespace crowdnav::rl {

struct GaeResult {
  Eigen::VectorXd advantages;
  Eigen::VectorXd returns;  // advantages + values
};

// values has rewards.size() + 1 entries; the last one bootstraps a trailing
// unfinished episode and is ignored when the final step is done. Advantages
// are returned unnormalized.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const bool> dones, double gamma, double lambda);

// Zero mean, unit (population) variance; left centered if the spread is ~0.
Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& adv);

}  // namespace crowdnav::rl
