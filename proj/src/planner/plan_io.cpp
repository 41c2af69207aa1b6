#include "crowdnav/planner/plan_io.hpp"

#include <fstream>
#include <stdexcept>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::planner {

using nlohmann::json;

namespace {

json vec(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ScenarioInvalid("expected [x, y]");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

json flat_state(const traj::FlatState& s) {
  return {{"pos", vec(s.pos)},   {"vel", vec(s.vel)}, {"acc", vec(s.acc)},
          {"jerk", vec(s.jerk)}, {"yaw", s.yaw},      {"yaw_rate", s.yaw_rate}};
}

traj::FlatState flat_state_from(const json& j) {
  traj::FlatState s;
  s.pos = vec_from(j.at("pos"));
  s.vel = vec_from(j.at("vel"));
  s.acc = vec_from(j.at("acc"));
  s.jerk = vec_from(j.at("jerk"));
  s.yaw = j.at("yaw").get<double>();
  s.yaw_rate = j.at("yaw_rate").get<double>();
  return s;
}

json boundary(const traj::BoundaryState& b) {
  return {{"pos", vec(b.pos)}, {"vel", vec(b.vel)}, {"acc", vec(b.acc)}};
}

traj::BoundaryState boundary_from(const json& j) {
  return {vec_from(j.at("pos")), vec_from(j.at("vel")), vec_from(j.at("acc"))};
}

PlanStatus status_from(const std::string& s) {
  if (s == "Converged") return PlanStatus::Converged;
  if (s == "MaxIter") return PlanStatus::MaxIter;
  if (s == "Failed") return PlanStatus::Failed;
  throw ScenarioInvalid("unknown plan status " + s);
}

}  // namespace

json field_to_json(const cost::ObstacleField& field) {
  std::string cells(field.occupancy().size(), '0');
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (field.occupancy()[i]) cells[i] = '1';
  }
  return {{"origin", vec(field.origin())},
          {"resolution", field.resolution()},
          {"width", field.width()},
          {"height", field.height()},
          {"cells", cells}};
}

cost::ObstacleField field_from_json(const json& j) {
  const int w = j.at("width").get<int>();
  const int h = j.at("height").get<int>();
  const std::string cells = j.at("cells").get<std::string>();
  if (cells.size() != static_cast<std::size_t>(w) * h) throw ScenarioInvalid("field cell count");
  std::vector<std::uint8_t> occ(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) occ[i] = cells[i] == '1' ? 1 : 0;
  return cost::ObstacleField(vec_from(j.at("origin")), j.at("resolution").get<double>(), w, h,
                             std::move(occ));
}

json to_json(const PlanRequest& r) {
  json peds = json::array();
  for (const auto& p : r.peds) {
    peds.push_back({{"pos", vec(p.pos)}, {"vel", vec(p.vel)}, {"radius", p.radius}});
  }
  const auto& w = r.weights;
  const auto& l = r.limits;
  return {{"start", flat_state(r.start)},
          {"local_goal", vec(r.local_goal)},
          {"field", field_to_json(r.field)},
          {"peds", peds},
          {"weights", {{"w_T", w.w_T}, {"w_f", w.w_f}, {"w_yr", w.w_yr}, {"w_s", w.w_s}, {"w_h", w.w_h}}},
          {"limits",
           {{"v_bar", l.v_bar},
            {"a_bar", l.a_bar},
            {"yr_bar", l.yr_bar},
            {"d_s_th", l.d_s_th},
            {"d_h_th", l.d_h_th},
            {"robot_radius", l.robot_radius},
            {"ped_radius", l.ped_radius}}}};
}

PlanRequest plan_request_from_json(const json& j) {
  PlanRequest r;
  r.start = flat_state_from(j.at("start"));
  r.local_goal = vec_from(j.at("local_goal"));
  r.field = field_from_json(j.at("field"));
  for (const auto& p : j.at("peds")) {
    r.peds.push_back({vec_from(p.at("pos")), vec_from(p.at("vel")), p.at("radius").get<double>()});
  }
  const auto& w = j.at("weights");
  r.weights = {w.at("w_T").get<double>(), w.at("w_f").get<double>(), w.at("w_yr").get<double>(),
               w.at("w_s").get<double>(), w.at("w_h").get<double>()};
  const auto& l = j.at("limits");
  r.limits.v_bar = l.at("v_bar").get<double>();
  r.limits.a_bar = l.at("a_bar").get<double>();
  r.limits.yr_bar = l.at("yr_bar").get<double>();
  r.limits.d_s_th = l.at("d_s_th").get<double>();
  r.limits.d_h_th = l.at("d_h_th").get<double>();
  r.limits.robot_radius = l.at("robot_radius").get<double>();
  r.limits.ped_radius = l.at("ped_radius").get<double>();
  return r;
}

json to_json(const PlanResult& r) {
  json pieces = json::array();
  for (int i = 0; i < r.traj.num_pieces(); ++i) {
    json rows = json::array();
    const auto& c = r.traj.coeffs(i);
    for (int k = 0; k < traj::kNumCoeffs; ++k) rows.push_back(json::array({c(k, 0), c(k, 1)}));
    pieces.push_back(rows);
  }
  json durations(std::vector<double>(r.traj.durations().begin(), r.traj.durations().end()));
  return {{"traj",
           {{"pieces", pieces},
            {"durations", durations},
            {"start", boundary(r.traj.start())},
            {"end", boundary(r.traj.end())},
            {"start_yaw", r.traj.start_yaw()}}},
          {"initial_cost", r.initial_cost},
          {"final_cost", r.final_cost},
          {"iterations", r.iterations},
          {"status", to_string(r.status)}};
}

PlanResult plan_result_from_json(const json& j) {
  PlanResult r;
  const auto& t = j.at("traj");
  std::vector<traj::CoeffMat> pieces;
  for (const auto& rows : t.at("pieces")) {
    traj::CoeffMat c;
    for (int k = 0; k < traj::kNumCoeffs; ++k) {
      c(k, 0) = rows.at(k).at(0).get<double>();
      c(k, 1) = rows.at(k).at(1).get<double>();
    }
    pieces.push_back(c);
  }
  r.traj = traj::PiecewisePolyTraj(std::move(pieces), t.at("durations").get<std::vector<double>>(),
                                   boundary_from(t.at("start")), boundary_from(t.at("end")),
                                   t.at("start_yaw").get<double>());
  r.initial_cost = j.at("initial_cost").get<double>();
  r.final_cost = j.at("final_cost").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.status = status_from(j.at("status").get<std::string>());
  return r;
}

json to_json(const PlannerConfig& c) {
  return {{"pieces", c.pieces},
          {"samples_per_piece", c.penalty.samples_per_piece},
          {"mu", c.penalty.mu},
          {"memory", c.lbfgs.memory},
          {"max_iter", c.lbfgs.max_iter},
          {"g_tol", c.lbfgs.g_tol},
          {"cost_rel_tol", c.lbfgs.cost_rel_tol}};
}

void write_plan_dump(const std::string& path, const PlanRequest& request,
                     const PlannerConfig& config, const PlanResult* result) {
  json j = {{"request", to_json(request)}, {"config", to_json(config)}};
  if (result != nullptr) j["result"] = to_json(*result);
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << j.dump(1) << '\n';
}

}  // namespace crowdnav::planner
