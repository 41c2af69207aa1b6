#include "crowdnav/rl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "crowdnav/common/errors.hpp"
#include "crowdnav/policy/action.hpp"
#include "crowdnav/rl/gae.hpp"

namespace crowdnav::rl {

double clip_grad_norm(Eigen::VectorXd& grad, double max_norm) {
  const double norm = grad.norm();
  if (norm > max_norm && norm > 0.0) grad *= max_norm / norm;
  return norm;
}

UpdateStats ppo_update(policy::PolicyNet& net, policy::Adam& adam, std::span<const StepRecord> steps,
                       const PpoConfig& cfg, std::mt19937_64& rng) {
  UpdateStats stats;
  const std::size_t n = steps.size();
  if (n == 0) return stats;

  std::vector<double> rewards(n), values(n + 1, 0.0);
  const std::unique_ptr<bool[]> dones(new bool[n]);
  for (std::size_t i = 0; i < n; ++i) {
    rewards[i] = cfg.value_scale * steps[i].reward;
    values[i] = steps[i].value;
    dones[i] = steps[i].done;
  }
  const GaeResult gae = compute_gae(rewards, values, std::span<const bool>(dones.get(), n),
                                    cfg.gamma, cfg.lambda);
  const Eigen::VectorXd adv = normalize_advantages(gae.advantages);

  const Eigen::VectorXd saved_params = net.params();
  const Eigen::VectorXd saved_bn = net.bn_stats();
  const policy::Adam saved_adam = adam;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t mb = static_cast<std::size_t>(std::max(cfg.minibatch, 1));
  Eigen::VectorXd grad(net.num_params());
  policy::PolicyNet::Cache cache;
  std::size_t clipped = 0, seen = 0, post_in = 0, post_seen = 0;
  bool first_pass = true;

  try {
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t lo = 0; lo < n; lo += mb) {
        const std::size_t hi = std::min(n, lo + mb);
        const double bsz = static_cast<double>(hi - lo);
        grad.setZero();
        double actor_loss = 0.0, critic_loss = 0.0;
        for (std::size_t q = lo; q < hi; ++q) {
          const std::size_t i = order[q];
          const StepRecord& s = steps[i];
          const auto out = net.forward(s.obs, &cache);
          const double logp = policy::gaussian_log_prob(s.raw, out.mean, s.std);
          const double ratio = std::exp(logp - s.log_prob);
          if (first_pass) {
            stats.first_pass_max_ratio_dev = std::max(stats.first_pass_max_ratio_dev, std::abs(ratio - 1.0));
          }
          const double a = adv(static_cast<Eigen::Index>(i));
          const double clipped_ratio = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
          const bool clip_active = (a >= 0.0 && ratio > 1.0 + cfg.clip_eps) ||
                                   (a < 0.0 && ratio < 1.0 - cfg.clip_eps);
          actor_loss -= std::min(ratio * a, clipped_ratio * a) / bsz;
          if (clip_active) ++clipped;
          ++seen;
          const double d_logp = clip_active ? 0.0 : -a * ratio / bsz;
          const policy::ActionVec d_mean = d_logp * (s.raw - out.mean) / (s.std * s.std);
          const double target = gae.returns(static_cast<Eigen::Index>(i));
          const double err = out.value - target;
          critic_loss += cfg.value_coef * err * err / bsz;
          net.backward(cache, d_mean, cfg.value_coef * 2.0 * err / bsz, grad);
        }
        first_pass = false;
        if (!grad.allFinite() || !std::isfinite(actor_loss) || !std::isfinite(critic_loss)) {
          throw NonFinite("non-finite PPO gradient");
        }
        stats.mean_grad_norm += clip_grad_norm(grad, cfg.max_grad_norm);
        adam.step(net.params(), grad);
        stats.actor_loss += actor_loss;
        stats.critic_loss += critic_loss;
        ++stats.minibatches;

        if (cfg.measure_post_ratios) {
          for (std::size_t q = lo; q < hi; ++q) {
            const StepRecord& s = steps[order[q]];
            const auto out = net.forward(s.obs);
            const double ratio = std::exp(policy::gaussian_log_prob(s.raw, out.mean, s.std) - s.log_prob);
            if (ratio >= 1.0 - 2.0 * cfg.clip_eps && ratio <= 1.0 + 2.0 * cfg.clip_eps) ++post_in;
            ++post_seen;
          }
        }
      }
    }
    if (!net.params().allFinite()) throw NonFinite("non-finite parameters after update");

    // Refresh BN running statistics on an evenly spaced subset.
    const std::size_t nb = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(cfg.bn_batch, 1)));
    std::vector<obs::Observation> bn_obs;
    bn_obs.reserve(nb);
    for (std::size_t k = 0; k < nb; ++k) bn_obs.push_back(steps[k * n / nb].obs);
    net.update_bn_stats(bn_obs);
    if (!net.bn_stats().allFinite()) throw NonFinite("non-finite batch-norm statistics");
  } catch (const NonFinite&) {
    net.params() = saved_params;
    net.bn_stats() = saved_bn;
    adam = saved_adam;
    stats.aborted = true;
    return stats;
  }

  if (stats.minibatches > 0) {
    stats.actor_loss /= stats.minibatches;
    stats.critic_loss /= stats.minibatches;
    stats.mean_grad_norm /= stats.minibatches;
  }
  stats.clip_fraction = seen > 0 ? static_cast<double>(clipped) / static_cast<double>(seen) : 0.0;
  if (post_seen > 0) stats.post_ratio_in_bound = static_cast<double>(post_in) / static_cast<double>(post_seen);
  return stats;
}

}  // namespace crowdnav::rl
