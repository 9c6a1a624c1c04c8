// Scenario definitions: road geometry, agents with constant-velocity
// ground-truth motion, the spec partition, refinement objectives, and the
// two built-in experiment setups. JSON (de)serialization lives here too;
// formulas travel as grammar strings.

#pragma once

#include <string>
#include <vector>

#include "stlmpc/risk/risk.hpp"
#include "stlmpc/stage2/stage2.hpp"

namespace stlmpc {

struct Region {
  enum class Role { Drivable, Goal, EmergencyLane, Obstacle };

  std::string name;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  Role role = Role::Drivable;

  void validate() const;
};

// Ground truth for one agent: state at simulation start plus a constant
// velocity. Per-cycle planner predictions and Monte-Carlo nominals are
// derived from this.
struct ScenarioAgent {
  std::string name;
  AgentKind kind = AgentKind::Vehicle;
  double mass = 1500.0;
  double kappa = 1.5;
  double noise_sigma = 0.3;
  double x = 0.0, y = 0.0, vx = 0.0, vy = 0.0;

  void validate() const;

  double x_at(double time) const { return x + time * vx; }
  double y_at(double time) const { return y + time * vy; }
};

struct Scenario {
  std::string name;
  TimeGrid horizon;  // per-cycle planning grid; recede step = horizon.dt
  VehicleState ego_init;
  VehicleParams params;
  std::vector<Region> regions;
  std::vector<ScenarioAgent> agents;
  SpecSet specs;
  std::vector<ObjectiveSpec> objectives;
  NominalObjective nominal_objective;
  RiskParams risk_params;
  double budget_alpha = 4.0;
  int cycles = 1;
  int grid_size = 3;  // epsilon-constraint grid resolution

  void validate() const;
};

// Built-in experiments. Dynamics/risk constants are fixed by the setup;
// geometry (lane widths, initial gaps, agent timing) is our layout, tuned
// so that the nominal controller becomes infeasible mid-run.
Scenario builtin_exp1();  // intersection: crossing pedestrian, ambulance behind
Scenario builtin_exp2();  // out-of-control rear vehicle, emergency-lane borrowing

// AgentModel (risk-module view) for one agent: constant-velocity nominal
// trajectory on `grid` starting from the agent's ground-truth state at
// absolute time `t0`.
AgentModel agent_model_at(const ScenarioAgent& agent, const TimeGrid& grid,
                          double t0);
// Planner-side prediction trace (dims x, y, vx, vy) for the same window.
Trace agent_prediction(const ScenarioAgent& agent, const TimeGrid& grid,
                       double t0);

// JSON round trip. load rejects unknown keys and reports the offending
// path; formulas are parsed with the stl grammar.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& sc, const std::string& path);
std::string scenario_to_json(const Scenario& sc);
Scenario scenario_from_json(const std::string& text);

}  // namespace stlmpc
