#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "crowdnav/bench/batch.hpp"
#include "crowdnav/bench/report.hpp"
#include "crowdnav/bench/scenario.hpp"
#include "crowdnav/common/errors.hpp"
#include "crowdnav/obs/observation.hpp"
#include "crowdnav/planner/plan_io.hpp"
#include "crowdnav/policy/checkpoint.hpp"
#include "crowdnav/rl/trainer.hpp"
#include "crowdnav/traj/traj_io.hpp"
#include "crowdnav/verify/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace crowdnav;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 2;
constexpr int kExitFailedSuite = 3;

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw ScenarioInvalid("cannot write " + path);
  return f;
}

int cmd_train(const std::string& scenario_path, long long episodes, const std::string& out_dir,
              unsigned long long seed, const std::string& resume) {
  if (episodes < 0) throw ScenarioInvalid("--episodes must be non-negative");
  const bench::Scenario scenario = bench::load_scenario(scenario_path);
  fs::create_directories(out_dir);
  rl::Trainer trainer(scenario, rl::TrainConfig{}, seed);
  if (!resume.empty()) trainer.restore(policy::load_checkpoint(resume));

  const fs::path log_path = fs::path(out_dir) / "train_log.csv";
  const bool append = !resume.empty() && fs::exists(log_path);
  std::ofstream log(log_path, append ? std::ios::app : std::ios::trunc);
  if (!log) throw ScenarioInvalid("cannot write " + log_path.string());
  if (!append) log << "episode,return,length,termination,tcc,std,time\n";

  trainer.train(
      episodes,
      [&](const rl::EpisodeLog& e) {
        char buf[256];
        std::snprintf(buf, sizeof(buf), "%lld,%.17g,%d,%s,%lld,%.17g,%.17g\n",
                      static_cast<long long>(e.episode), e.ret, e.length, rl::to_string(e.termination),
                      static_cast<long long>(e.tcc), e.std, e.time);
        log << buf << std::flush;
        if ((e.episode + 1) % 10 == 0) {
          std::printf("episode %lld return %.1f tcc %lld %s\n", static_cast<long long>(e.episode + 1),
                      e.ret, static_cast<long long>(e.tcc), rl::to_string(e.termination));
          std::fflush(stdout);
        }
      },
      [&](const policy::Checkpoint& c) {
        char name[64];
        std::snprintf(name, sizeof(name), "ckpt_%06lld.bin", static_cast<long long>(c.episode));
        policy::save_checkpoint((fs::path(out_dir) / name).string(), c);
      });
  policy::save_checkpoint((fs::path(out_dir) / "final.bin").string(), trainer.checkpoint());
  std::printf("trained %lld episodes, checkpoint %s\n", static_cast<long long>(trainer.episode()),
              (fs::path(out_dir) / "final.bin").string().c_str());
  return kExitOk;
}

int cmd_eval(const std::string& scenario_path, const std::string& agent_text, int runs,
             unsigned long long seed, const std::string& report_path) {
  if (runs < 0) throw ScenarioInvalid("--runs must be non-negative");
  const bench::Scenario scenario = bench::load_scenario(scenario_path);
  const bench::AgentSpec spec = bench::parse_agent(agent_text);
  const bench::BatchAgent agent(spec);
  const auto metrics = bench::run_batch(scenario, agent, runs, seed);
  const std::vector<bench::Aggregate> rows{
      bench::aggregate(scenario.name, bench::method_name(spec), metrics)};
  std::ofstream f = open_out(report_path);
  bench::write_report_csv(f, rows);
  std::cout << bench::format_table(rows);
  return kExitOk;
}

int cmd_run(const std::string& scenario_path, const std::string& agent_text,
            unsigned long long seed, const std::string& trace_path) {
  const bench::Scenario scenario = bench::load_scenario(scenario_path);
  const bench::AgentSpec spec = bench::parse_agent(agent_text);
  const bench::BatchAgent agent(spec);
  std::ofstream trace = open_out(trace_path);

  const fs::path dump_dir = fs::path(trace_path).concat(".dumps");
  fs::create_directories(dump_dir);
  rl::EpisodeConfig cfg;
  cfg.record_trace = true;
  const auto hook = [&](int k, const obs::Observation& o, const planner::PlanRequest& req,
                        const planner::PlanResult& res) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "decision_%03d", k);
    obs::write_observation_dump((dump_dir / stem).string(), o);
    planner::write_plan_dump((dump_dir / (std::string(stem) + "_plan.json")).string(), req, cfg.planner, &res);
    if (!res.traj.empty()) {
      traj::write_trajectory_csv((dump_dir / (std::string(stem) + "_traj.csv")).string(), res.traj);
    }
  };
  const rl::EpisodeResult r = rl::run_episode(bench::instantiate(scenario, seed), agent.agent(), cfg, hook);

  trace << "t,x,y,theta,v,omega,contact,active,nearest_ped,tcc\n";
  for (const auto& row : r.trace) {
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%lld\n", row.t,
                  row.x, row.y, row.theta, row.v, row.omega, row.contact ? 1 : 0, row.active ? 1 : 0,
                  row.nearest_ped, static_cast<long long>(row.tcc));
    trace << buf;
  }
  std::printf("%s: %s in %.2f s, distance %.2f m, tcc %lld, return %.1f, decisions %d, plans %d\n",
              scenario.name.c_str(), rl::to_string(r.termination), r.time, r.distance,
              static_cast<long long>(r.tcc), r.ret, r.decisions, r.plans);
  return kExitOk;
}

int cmd_gradcheck() {
  bool ok = true;
  for (const auto& c : verify::run_all()) {
    std::printf("%s %-18s checked=%d excluded=%d max_err=%.3e tol=%.0e\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.checked, c.excluded, c.max_rel_err, c.tolerance);
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitFailedSuite;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crowd navigation with learned spatial-temporal planner weights"};
  app.require_subcommand(1);

  std::string scenario, out_dir, agent, report, trace, resume;
  long long episodes = 0;
  int runs = 0;
  unsigned long long seed = 0;

  auto* train = app.add_subcommand("train", "Train the weight policy with PPO");
  train->add_option("--scenario", scenario, "Scenario JSON")->required();
  train->add_option("--episodes", episodes, "Total training episodes")->required();
  train->add_option("--out", out_dir, "Checkpoint directory")->required();
  train->add_option("--seed", seed, "Run seed")->required();
  train->add_option("--resume", resume, "Resume from a checkpoint");

  auto* eval = app.add_subcommand("eval", "Batch evaluation");
  eval->add_option("--scenario", scenario, "Scenario JSON")->required();
  eval->add_option("--agent", agent, "fixed:<w_T,w_f,w_yr,w_s,w_h> or ckpt:<path>")->required();
  eval->add_option("--runs", runs, "Number of seeded runs")->required();
  eval->add_option("--seed", seed, "First seed")->required();
  eval->add_option("--report", report, "Report CSV")->required();

  auto* run = app.add_subcommand("run", "Single episode with trace and dumps");
  run->add_option("--scenario", scenario, "Scenario JSON")->required();
  run->add_option("--agent", agent, "fixed:<w_T,w_f,w_yr,w_s,w_h> or ckpt:<path>")->required();
  run->add_option("--seed", seed, "Seed")->required();
  run->add_option("--trace", trace, "Per-tick trace CSV")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Numerical verification suites");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (*train) return cmd_train(scenario, episodes, out_dir, seed, resume);
    if (*eval) return cmd_eval(scenario, agent, runs, seed, report);
    if (*run) return cmd_run(scenario, agent, seed, trace);
    if (*gradcheck) return cmd_gradcheck();
  } catch (const ScenarioInvalid& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitInvalid;
}
