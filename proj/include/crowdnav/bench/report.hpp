#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "crowdnav/bench/batch.hpp"

namespace crowdnav::bench {

// Rows sorted by method name, then scene.
std::vector<Aggregate> sorted_rows(std::vector<Aggregate> rows);

// Columns: Scene, Method, Runs, Complete, Avg. Time, Avg. Dist, Colli. Runs, TCC.
std::string format_table(const std::vector<Aggregate>& rows);

// Header scene,method,runs,complete,avg_time,avg_dist,colli_runs,tcc; reals as %.17g.
void write_report_csv(std::ostream& os, const std::vector<Aggregate>& rows);
std::vector<Aggregate> read_report_csv(std::istream& is);  // throws ScenarioInvalid

}  // namespace crowdnav::bench
