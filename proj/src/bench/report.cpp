#include "crowdnav/bench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "crowdnav/common/errors.hpp"

namespace crowdnav::bench {

namespace {

constexpr const char* kHeader = "scene,method,runs,complete,avg_time,avg_dist,colli_runs,tcc";

std::string real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fixed1(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

// Methods may contain commas, e.g. ST(w_T=1,w_f=2,...).
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::vector<Aggregate> sorted_rows(std::vector<Aggregate> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const Aggregate& a, const Aggregate& b) {
    return a.method != b.method ? a.method < b.method : a.scene < b.scene;
  });
  return rows;
}

std::string format_table(const std::vector<Aggregate>& rows_in) {
  const auto rows = sorted_rows(rows_in);
  std::vector<std::vector<std::string>> cells = {
      {"Scene", "Method", "Runs", "Complete", "Avg. Time", "Avg. Dist", "Colli. Runs", "TCC"}};
  for (const auto& r : rows) {
    cells.push_back({r.scene, r.method, std::to_string(r.runs), std::to_string(r.complete),
                     fixed1(r.avg_time), fixed1(r.avg_dist), std::to_string(r.collided_runs),
                     std::to_string(r.tcc)});
  }
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const std::string& s = cells[r][c];
      const std::string pad(width[c] - s.size(), ' ');
      // Text columns left-aligned, numbers right-aligned.
      os << (c < 2 ? s + pad : pad + s) << (c + 1 < cells[r].size() ? "  " : "");
    }
    os << '\n';
  }
  return os.str();
}

void write_report_csv(std::ostream& os, const std::vector<Aggregate>& rows_in) {
  os << kHeader << '\n';
  for (const auto& r : sorted_rows(rows_in)) {
    os << quote(r.scene) << ',' << quote(r.method) << ',' << r.runs << ',' << r.complete << ','
       << real(r.avg_time) << ',' << real(r.avg_dist) << ',' << r.collided_runs << ',' << r.tcc
       << '\n';
  }
}

std::vector<Aggregate> read_report_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kHeader) throw ScenarioInvalid("report: bad header");
  std::vector<Aggregate> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 8) throw ScenarioInvalid("report: expected 8 fields");
    try {
      Aggregate a;
      a.scene = f[0];
      a.method = f[1];
      a.runs = std::stoi(f[2]);
      a.complete = std::stoi(f[3]);
      a.avg_time = std::stod(f[4]);
      a.avg_dist = std::stod(f[5]);
      a.collided_runs = std::stoi(f[6]);
      a.tcc = std::stoll(f[7]);
      rows.push_back(std::move(a));
    } catch (const std::exception&) {
      throw ScenarioInvalid("report: bad number in '" + line + "'");
    }
  }
  return rows;
}

}  // namespace crowdnav::bench
