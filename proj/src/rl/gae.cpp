#include "crowdnav/rl/gae.hpp"

#include <cmath>
#include <stdexcept>

namespace crowdnav::rl {

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const bool> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw std::invalid_argument("compute_gae: size mismatch");
  }
  GaeResult out;
  out.advantages.resize(static_cast<Eigen::Index>(n));
  out.returns.resize(static_cast<Eigen::Index>(n));
  double running = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = dones[k] ? 0.0 : values[k + 1];
    if (dones[k]) running = 0.0;
    const double delta = rewards[k] + gamma * next_value - values[k];
    running = delta + gamma * lambda * running;
    out.advantages(static_cast<Eigen::Index>(k)) = running;
    out.returns(static_cast<Eigen::Index>(k)) = running + values[k];
  }
  return out;
}

Eigen::VectorXd normalize_advantages(const Eigen::VectorXd& adv) {
  if (adv.size() == 0) return adv;
  const double mean = adv.mean();
  Eigen::VectorXd c = adv.array() - mean;
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(adv.size()));
  if (sd > 1e-8) c /= sd;
  return c;
}

}  // namespace crowdnav::rl
