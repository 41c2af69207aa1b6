#include "crowdnav/bench/batch.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "crowdnav/common/errors.hpp"
#include "crowdnav/policy/checkpoint.hpp"
#include "crowdnav/rl/trainer.hpp"

namespace crowdnav::bench {

AgentSpec parse_agent(const std::string& text) {
  AgentSpec spec;
  if (text.rfind("ckpt:", 0) == 0) {
    spec.kind = AgentSpec::Kind::Checkpoint;
    spec.path = text.substr(5);
    if (spec.path.empty()) throw ScenarioInvalid("agent: empty checkpoint path");
    return spec;
  }
  if (text.rfind("fixed:", 0) != 0) throw ScenarioInvalid("agent must be fixed:<w...> or ckpt:<path>");
  std::vector<double> w;
  std::string item;
  std::istringstream is(text.substr(6));
  while (std::getline(is, item, ',')) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || end != item.data() + item.size()) {
      throw ScenarioInvalid("agent: bad weight '" + item + "'");
    }
    w.push_back(v);
  }
  if (w.size() != 5) throw ScenarioInvalid("agent: expected 5 weights");
  spec.weights = {w[0], w[1], w[2], w[3], w[4]};
  if (!spec.weights.valid()) throw ScenarioInvalid("agent: weights must be positive and finite");
  return spec;
}

std::string method_name(const AgentSpec& spec) {
  if (spec.kind == AgentSpec::Kind::Checkpoint) return "Learned";
  const auto& w = spec.weights;
  const double v[5] = {w.w_T, w.w_f, w.w_yr, w.w_s, w.w_h};
  const char* names[5] = {"w_T", "w_f", "w_yr", "w_s", "w_h"};
  const auto fmt = [](double x) {
    std::ostringstream os;
    os << x;
    return os.str();
  };
  int ones = 0, other = -1;
  for (int i = 0; i < 5; ++i) {
    if (v[i] == 1.0) {
      ++ones;
    } else {
      other = i;
    }
  }
  if (ones == 5) return "ST(all=1)";
  if (ones == 4) return std::string("ST(") + names[other] + "=" + fmt(v[other]) + ")";
  std::string s = "ST(";
  for (int i = 0; i < 5; ++i) s += std::string(i ? "," : "") + names[i] + "=" + fmt(v[i]);
  return s + ")";
}

BatchAgent::BatchAgent(const AgentSpec& spec) : spec_(spec) {
  if (spec.kind == AgentSpec::Kind::Checkpoint) {
    net_ = rl::net_from_checkpoint(policy::load_checkpoint(spec.path));
  }
}

rl::Agent BatchAgent::agent() const {
  if (net_) return rl::policy_agent(*net_, policy::std_schedule(0), nullptr, true);
  return rl::fixed_agent(spec_.weights);
}

RunMetrics metrics_from(const rl::EpisodeResult& r, std::uint64_t seed) {
  RunMetrics m;
  m.seed = seed;
  m.complete = r.complete;
  if (r.complete) {
    m.time_taken = r.time;
    m.distance = r.distance;
  }
  m.collided = r.collided;
  m.tcc = r.tcc;
  return m;
}

std::vector<RunMetrics> run_batch(const Scenario& scenario, const BatchAgent& agent, int n_runs,
                                  std::uint64_t base_seed, const rl::EpisodeConfig& config) {
  std::vector<RunMetrics> out;
  if (n_runs <= 0) return out;
  const auto field = build_field(scenario.map);
  const rl::Agent a = agent.agent();
  for (int i = 0; i < n_runs; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    out.push_back(metrics_from(rl::run_episode(instantiate(scenario, seed, field), a, config), seed));
  }
  return out;
}

Aggregate aggregate(const std::string& scene, const std::string& method,
                    const std::vector<RunMetrics>& runs) {
  Aggregate a;
  a.scene = scene;
  a.method = method;
  a.runs = static_cast<int>(runs.size());
  double t = 0.0, d = 0.0;
  for (const auto& r : runs) {
    if (r.complete) {
      ++a.complete;
      t += r.time_taken;
      d += r.distance;
    }
    if (r.collided) ++a.collided_runs;
    a.tcc += r.tcc;
  }
  if (a.complete > 0) {
    a.avg_time = t / a.complete;
    a.avg_dist = d / a.complete;
  }
  return a;
}

}  // namespace crowdnav::bench
