#include "stlmpc/cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace stlmpc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double to_num(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": not a number: '" + s + "'");
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(split(line));
  }
  if (rows.empty()) throw std::invalid_argument(path + ": empty file");
  return rows;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + path);
  return out;
}

}  // namespace

Trace read_trace_csv(const std::string& path) {
  auto rows = read_csv(path);
  const auto& header = rows[0];
  if (header.size() < 2 || header[0] != "time")
    throw std::invalid_argument(path + ": header must be time,<dim>,...");
  const int steps = static_cast<int>(rows.size()) - 1;
  if (steps < 1) throw std::invalid_argument(path + ": no samples");

  std::vector<std::string> dims(header.begin() + 1, header.end());
  std::vector<double> times;
  for (int t = 0; t < steps; ++t) {
    if (rows[static_cast<std::size_t>(t) + 1].size() != header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(t + 1) +
                                  " has wrong column count");
    times.push_back(to_num(rows[static_cast<std::size_t>(t) + 1][0], path));
  }
  double dt = steps > 1 ? times[1] - times[0] : 1.0;
  if (!(dt > 0)) throw std::invalid_argument(path + ": time must increase");
  for (int t = 1; t < steps; ++t)
    if (std::abs(times[static_cast<std::size_t>(t)] - times[0] - dt * t) > 1e-9)
      throw std::invalid_argument(path + ": time grid is not uniform");

  Trace tr(TimeGrid(dt, steps), dims);
  for (int t = 0; t < steps; ++t)
    for (std::size_t d = 0; d < dims.size(); ++d)
      tr.values(t, static_cast<int>(d)) =
          to_num(rows[static_cast<std::size_t>(t) + 1][d + 1], path);
  return tr;
}

std::string config_hash(const Scenario& sc) {
  // FNV-1a over the canonical JSON form
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : scenario_to_json(sc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

void write_sim_log(const SimLog& log, const Scenario& sc,
                   const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string base = dir + "/";

  {
    auto out = open_out(base + "states.csv");
    out << "cycle,px,py,theta,v\n";
    for (std::size_t i = 0; i < log.executed.size(); ++i) {
      const auto& x = log.executed[i];
      out << i << "," << fmt(x.px) << "," << fmt(x.py) << "," << fmt(x.theta)
          << "," << fmt(x.v) << "\n";
    }
  }
  {
    auto out = open_out(base + "controls.csv");
    out << "cycle,a,beta\n";
    for (const auto& c : log.cycles)
      out << c.cycle << "," << fmt(c.executed.a) << "," << fmt(c.executed.beta)
          << "\n";
  }
  {
    auto out = open_out(base + "deltas.csv");
    out << "cycle,delta_min,total";
    for (const auto& nf : sc.specs.soft) out << "," << nf.name;
    out << "\n";
    for (const auto& c : log.cycles) {
      out << c.cycle << "," << fmt(c.delta_min) << "," << fmt(c.delta_l1);
      for (const auto& nf : sc.specs.soft)
        out << "," << fmt(c.delta.count(nf.name) ? c.delta.at(nf.name) : 0.0);
      out << "\n";
    }
  }
  {
    auto out = open_out(base + "risks.csv");
    out << "cycle,agent,P,S,V,R\n";
    for (const auto& c : log.cycles)
      for (const auto& [name, ar] : c.risk.agents)
        out << c.cycle << "," << name << "," << fmt(ar.P) << "," << fmt(ar.S)
            << "," << fmt(ar.V) << "," << fmt(ar.R) << "\n";
  }
  {
    auto out = open_out(base + "fronts.csv");
    out << "cycle,candidate,selected";
    for (const auto& o : sc.objectives) out << ",g_" << o.name;
    out << "\n";
    for (const auto& c : log.cycles)
      for (std::size_t i = 0; i < c.front.size(); ++i) {
        out << c.cycle << "," << i << ","
            << (static_cast<int>(i) == c.selected_index ? 1 : 0);
        for (double g : c.front[i]) out << "," << fmt(g);
        out << "\n";
      }
  }
  {
    nlohmann::json m;
    m["scenario"] = sc.name;
    m["mode"] = log.mode == RunMode::Full ? "full" : "stage1";
    m["seed"] = log.seed;
    m["config_hash"] = config_hash(sc);
    m["cycles_run"] = log.cycles.size();
    m["aborted"] = log.aborted;
    m["abort_reason"] = log.abort_reason;
    auto out = open_out(base + "manifest.json");
    out << m.dump(2) << "\n";
  }
}

LogStreams read_sim_log(const std::string& dir) {
  LogStreams ls;
  const std::string base = dir + "/";

  auto numeric_rows = [](const std::string& path, std::size_t cols) {
    auto rows = read_csv(path);
    std::vector<std::vector<double>> out;
    if (rows[0].size() != cols)
      throw std::invalid_argument(path + ": unexpected column count");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != cols)
        throw std::invalid_argument(path + ": ragged row");
      std::vector<double> r;
      for (const auto& cell : rows[i]) r.push_back(to_num(cell, path));
      out.push_back(std::move(r));
    }
    return out;
  };
  ls.states = numeric_rows(base + "states.csv", 5);
  ls.controls = numeric_rows(base + "controls.csv", 3);

  {
    auto rows = read_csv(base + "deltas.csv");
    const auto& header = rows[0];
    if (header.size() < 3)
      throw std::invalid_argument("deltas.csv: missing columns");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != header.size())
        throw std::invalid_argument("deltas.csv: ragged row");
      DeltaRow r;
      r.cycle = static_cast<int>(to_num(rows[i][0], "deltas.csv"));
      r.delta_min = to_num(rows[i][1], "deltas.csv");
      r.total = to_num(rows[i][2], "deltas.csv");
      for (std::size_t c = 3; c < header.size(); ++c)
        r.per_spec[header[c]] = to_num(rows[i][c], "deltas.csv");
      ls.deltas.push_back(std::move(r));
    }
  }
  {
    auto rows = read_csv(base + "risks.csv");
    if (rows[0].size() != 6)
      throw std::invalid_argument("risks.csv: unexpected column count");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != 6)
        throw std::invalid_argument("risks.csv: ragged row");
      RiskRow r;
      r.cycle = static_cast<int>(to_num(rows[i][0], "risks.csv"));
      r.agent = rows[i][1];
      r.P = to_num(rows[i][2], "risks.csv");
      r.S = to_num(rows[i][3], "risks.csv");
      r.V = to_num(rows[i][4], "risks.csv");
      r.R = to_num(rows[i][5], "risks.csv");
      ls.risks.push_back(std::move(r));
    }
  }
  {
    auto rows = read_csv(base + "fronts.csv");
    const auto& header = rows[0];
    if (header.size() < 4)
      throw std::invalid_argument("fronts.csv: missing objective columns");
    for (std::size_t c = 3; c < header.size(); ++c) {
      if (header[c].rfind("g_", 0) != 0)
        throw std::invalid_argument("fronts.csv: bad objective column " +
                                    header[c]);
      ls.objective_names.push_back(header[c].substr(2));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].size() != header.size())
        throw std::invalid_argument("fronts.csv: ragged row");
      FrontRow r;
      r.cycle = static_cast<int>(to_num(rows[i][0], "fronts.csv"));
      r.candidate = static_cast<int>(to_num(rows[i][1], "fronts.csv"));
      r.selected = to_num(rows[i][2], "fronts.csv") != 0.0;
      for (std::size_t c = 3; c < header.size(); ++c)
        r.g.push_back(to_num(rows[i][c], "fronts.csv"));
      ls.fronts.push_back(std::move(r));
    }
  }
  return ls;
}

}  // namespace stlmpc
