#include "crowdnav/rl/trainer.hpp"

#include <sstream>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::rl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

}  // namespace

std::uint64_t training_episode_seed(std::uint64_t seed, std::int64_t episode) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(episode));
}

Agent policy_agent(const policy::PolicyNet& net, double std, std::mt19937_64* rng,
                   bool deterministic) {
  return [&net, std, rng, deterministic](const obs::Observation& o) {
    const auto out = net.forward(o);
    Decision d;
    d.action = deterministic || rng == nullptr ? policy::mean_action(out.mean, std)
                                               : policy::sample_action(out.mean, std, *rng);
    d.value = out.value;
    d.std = std;
    return d;
  };
}

Trainer::Trainer(bench::Scenario scenario, TrainConfig config, std::uint64_t seed)
    : scenario_(std::move(scenario)),
      field_(bench::build_field(scenario_.map)),
      config_(std::move(config)),
      seed_(seed),
      net_(seed),
      adam_(policy::group_learning_rates(net_, config_.lr_encoder, config_.lr_actor, config_.lr_critic)),
      rng_(splitmix64(seed ^ 0x5EEDULL)) {
  config_.episode.record_observations = true;
}

void Trainer::train(std::int64_t total_episodes, const EpisodeCallback& on_episode,
                    const CheckpointCallback& on_checkpoint, const UpdateCallback& on_update) {
  while (episode_ < total_episodes) {
    const double std = policy::std_schedule(episode_);
    std::mt19937_64 act_rng(training_episode_seed(seed_, episode_) ^ 0xAC7ULL);
    const Agent agent = policy_agent(net_, std, &act_rng, false);
    EpisodeResult r = run_episode(
        bench::instantiate(scenario_, training_episode_seed(seed_, episode_), field_), agent,
        config_.episode);

    if (on_episode) {
      EpisodeLog log;
      log.episode = episode_;
      log.ret = r.ret;
      log.length = static_cast<int>(r.steps.size());
      log.termination = r.termination;
      log.tcc = r.tcc;
      log.std = std;
      log.time = r.time;
      on_episode(log);
    }
    for (auto& s : r.steps) buffer_.push_back(std::move(s));
    ++buffered_episodes_;
    ++episode_;

    const bool boundary = config_.checkpoint_every > 0 && episode_ % config_.checkpoint_every == 0;
    if (buffered_episodes_ >= config_.episodes_per_update || boundary) update(on_update);
    if (boundary && on_checkpoint) on_checkpoint(checkpoint());
  }
}

void Trainer::update(const UpdateCallback& on_update) {
  if (buffer_.empty()) return;
  const UpdateStats stats = ppo_update(net_, adam_, buffer_, config_.ppo, rng_);
  ++updates_;
  buffer_.clear();
  buffered_episodes_ = 0;
  if (on_update) on_update(stats);
}

policy::Checkpoint Trainer::checkpoint() const {
  policy::Checkpoint c;
  c.params = net_.params();
  c.bn_stats = net_.bn_stats();
  c.adam_m = adam_.m();
  c.adam_v = adam_.v();
  c.adam_t = adam_.t();
  c.episode = episode_;
  c.updates = updates_;
  c.seed = seed_;
  c.rng_state = rng_to_string(rng_);
  return c;
}

void Trainer::restore(const policy::Checkpoint& c) {
  if (c.params.size() != net_.num_params() || c.bn_stats.size() != net_.bn_stats().size()) {
    throw ScenarioInvalid("checkpoint does not match the network layout");
  }
  net_.params() = c.params;
  net_.bn_stats() = c.bn_stats;
  adam_.set_state(c.adam_m, c.adam_v, c.adam_t);
  episode_ = c.episode;
  updates_ = c.updates;
  seed_ = c.seed;
  std::istringstream is(c.rng_state);
  is >> rng_;
  if (!is) throw ScenarioInvalid("checkpoint rng state is corrupt");
  buffer_.clear();
  buffered_episodes_ = 0;
}

policy::PolicyNet net_from_checkpoint(const policy::Checkpoint& c) {
  policy::PolicyNet net;
  if (c.params.size() != net.num_params() || c.bn_stats.size() != net.bn_stats().size()) {
    throw ScenarioInvalid("checkpoint does not match the network layout");
  }
  net.params() = c.params;
  net.bn_stats() = c.bn_stats;
  return net;
}

}  // namespace crowdnav::rl
