// Receding-horizon loop: each cycle re-linearizes about the previous
// solution, restores feasibility (stage 1), optionally refines over the
// relaxation budget (stage 2), executes the first control on the
// nonlinear model, and logs everything needed for the experiment plots.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlmpc/sim/scenario.hpp"

namespace stlmpc {

enum class RunMode { Stage1Only, Full };

struct CycleLog {
  int cycle = 0;
  VehicleState ego;  // state at cycle start
  RelaxationStatus stage1_status = RelaxationStatus::HardInfeasible;
  double delta_min = 0.0;
  std::map<std::string, double> delta;  // executed plan's relaxations
  double delta_l1 = 0.0;
  ControlInput executed;
  std::vector<VehicleState> planned;  // full horizon of the executed plan
  std::map<std::string, double> robustness;  // monitor values, planned trace
  RiskReport risk;                           // planned trajectory, predictions
  // stage-2 bookkeeping (full mode only)
  bool ran_stage2 = false;
  bool stage2_fallback = false;  // no feasible subproblem; executed stage 1
  std::vector<std::vector<double>> front;
  int selected_index = -1;
  std::vector<double> selected_g;
};

struct SimLog {
  std::string scenario_name;
  RunMode mode = RunMode::Stage1Only;
  std::uint64_t seed = 0;
  std::vector<CycleLog> cycles;
  std::vector<VehicleState> executed;  // realized states, cycles.size() + 1
  bool aborted = false;
  std::string abort_reason;
};

SimLog run_receding_horizon(const Scenario& sc, RunMode mode);

}  // namespace stlmpc
