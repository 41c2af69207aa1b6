#include "crowdnav/policy/action.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace crowdnav::policy {

cost::CostWeights weights_from_raw(const ActionVec& raw) {
  const auto w = [&](int i) { return std::exp(std::clamp(raw(i), kRawMin, kRawMax)); };
  return {w(0), w(1), w(2), w(3), w(4)};
}

double gaussian_log_prob(const ActionVec& raw, const ActionVec& mean, double std) {
  const double z2 = ((raw - mean) / std).squaredNorm();
  return -0.5 * z2 - kActionDim * (std::log(std) + 0.5 * std::log(2.0 * std::numbers::pi));
}

ActionSample sample_action(const ActionVec& mean, double std, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  ActionSample a;
  for (int i = 0; i < kActionDim; ++i) a.raw(i) = mean(i) + std * n01(rng);
  a.weights = weights_from_raw(a.raw);
  a.log_prob = gaussian_log_prob(a.raw, mean, std);
  return a;
}

ActionSample mean_action(const ActionVec& mean, double std) {
  ActionSample a;
  a.raw = mean;
  a.weights = weights_from_raw(mean);
  a.log_prob = gaussian_log_prob(mean, mean, std);
  return a;
}

double std_schedule(std::int64_t episode) {
  return std::max(0.1, 0.6 - 0.05 * static_cast<double>(episode / 200));
}

}  // namespace crowdnav::policy
