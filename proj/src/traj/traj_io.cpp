#include "crowdnav/traj/traj_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace crowdnav::traj {

void write_trajectory_csv(std::ostream& os, const PiecewisePolyTraj& traj) {
  os << "t,x,y,vx,vy,ax,ay,yaw,yaw_rate\n";
  if (traj.empty()) return;
  const double total = traj.total_duration();
  const long n = static_cast<long>(std::floor(total * kDumpRateHz + 1e-9));
  char line[256];
  auto emit = [&](double t) {
    const FlatState fs = traj.flat_state(t);
    std::snprintf(line, sizeof(line), "%.4f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", t,
                  fs.pos.x(), fs.pos.y(), fs.vel.x(), fs.vel.y(), fs.acc.x(), fs.acc.y(), fs.yaw,
                  fs.yaw_rate);
    os << line;
  };
  for (long k = 0; k <= n; ++k) emit(static_cast<double>(k) / kDumpRateHz);
  if (static_cast<double>(n) / kDumpRateHz < total - 1e-9) emit(total);
}

void write_trajectory_csv(const std::string& path, const PiecewisePolyTraj& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_trajectory_csv(os, traj);
}

}  // namespace crowdnav::traj
