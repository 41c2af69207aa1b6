#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

namespace crowdnav::policy {

// Complete training state; round-trips bit-exactly.
struct Checkpoint {
  Eigen::VectorXd params;
  Eigen::VectorXd bn_stats;
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;
  std::int64_t adam_t = 0;
  std::int64_t episode = 0;   // completed training episodes
  std::int64_t updates = 0;   // completed PPO updates
  std::uint64_t seed = 0;
  std::string rng_state;      // textual std::mt19937_64 state
};

// Little-endian binary: "CNAVCKPT", u32 version, then the fields above.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);  // throws ScenarioInvalid

}  // namespace crowdnav::policy
