// Artifact I/O for the command-line surface: CSV log streams written per
// simulation run (states, controls, deltas, risks, fronts) plus a JSON
// run manifest, and the matching readers used by the plot commands and
// round-trip tests. Numbers are written with round-trippable precision so
// identical runs produce byte-identical files.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlmpc/sim/runner.hpp"

namespace stlmpc {

// Trace CSV (monitor input): header "time,<dim>,<dim>,..." and one row
// per sample on a uniform grid.
Trace read_trace_csv(const std::string& path);

struct DeltaRow {
  int cycle = 0;
  double delta_min = 0.0;
  double total = 0.0;
  std::map<std::string, double> per_spec;
};

struct RiskRow {
  int cycle = 0;
  std::string agent;
  double P = 0.0, S = 0.0, V = 0.0, R = 0.0;
};

struct FrontRow {
  int cycle = 0;
  int candidate = 0;
  bool selected = false;
  std::vector<double> g;  // one value per objective column
};

struct LogStreams {
  std::vector<std::string> objective_names;  // from the fronts header
  std::vector<std::vector<double>> states;   // cycle, px, py, theta, v
  std::vector<std::vector<double>> controls;  // cycle, a, beta
  std::vector<DeltaRow> deltas;
  std::vector<RiskRow> risks;
  std::vector<FrontRow> fronts;
};

// Writes states.csv, controls.csv, deltas.csv, risks.csv, fronts.csv and
// manifest.json into dir (created if missing).
void write_sim_log(const SimLog& log, const Scenario& sc,
                   const std::string& dir);
LogStreams read_sim_log(const std::string& dir);

// Deterministic run fingerprint of the fully resolved scenario.
std::string config_hash(const Scenario& sc);

}  // namespace stlmpc
