#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/policy/policy_net.hpp"
#include "crowdnav/rl/episode.hpp"

namespace crowdnav::bench {

struct AgentSpec {
  enum class Kind { Fixed, Checkpoint };
  Kind kind = Kind::Fixed;
  cost::CostWeights weights;
  std::string path;
};

// "fixed:<w_T,w_f,w_yr,w_s,w_h>" or "ckpt:<path>"; throws ScenarioInvalid.
AgentSpec parse_agent(const std::string& text);

// "ST(all=1)", "ST(w_T=5)", "ST(w_T=1,w_f=2,...)" or "Learned".
std::string method_name(const AgentSpec& spec);

struct RunMetrics {
  std::uint64_t seed = 0;
  bool complete = false;
  double time_taken = 0.0;  // only meaningful when complete
  double distance = 0.0;    // only meaningful when complete
  bool collided = false;
  std::int64_t tcc = 0;
};

struct Aggregate {
  std::string scene;
  std::string method;
  int runs = 0;
  int complete = 0;
  double avg_time = 0.0;  // over complete runs
  double avg_dist = 0.0;  // over complete runs
  int collided_runs = 0;
  std::int64_t tcc = 0;

  bool operator==(const Aggregate&) const = default;
};

// Loads the agent (checkpoint agents evaluate the policy mean).
class BatchAgent {
 public:
  explicit BatchAgent(const AgentSpec& spec);
  rl::Agent agent() const;
  const AgentSpec& spec() const { return spec_; }

 private:
  AgentSpec spec_;
  std::optional<policy::PolicyNet> net_;
};

RunMetrics metrics_from(const rl::EpisodeResult& r, std::uint64_t seed);

// Runs seeds base_seed, base_seed + 1, ..., base_seed + n_runs - 1.
std::vector<RunMetrics> run_batch(const Scenario& scenario, const BatchAgent& agent, int n_runs,
                                  std::uint64_t base_seed, const rl::EpisodeConfig& config = {});

Aggregate aggregate(const std::string& scene, const std::string& method,
                    const std::vector<RunMetrics>& runs);

}  // namespace crowdnav::bench
