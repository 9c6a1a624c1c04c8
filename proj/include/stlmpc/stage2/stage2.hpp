// Value-aware refinement. Within the relaxation budget [delta_min,
// delta_min + alpha] found by stage 1, sweep epsilon-constraint
// subproblems over grids of surrogate objective bounds, evaluate the
// true Monte-Carlo consequences of every feasible solution, keep the
// nondominated set, and pick the executed action.
//
// Objectives inside the MILP are linear surrogates (clearance-shortfall
// hinges plus a speed proxy for agent risk, terminal displacement for
// progress, L1 input effort for comfort); all dominance decisions use
// the true sampled consequences evaluated on each solution's trajectory.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "stlmpc/risk/risk.hpp"
#include "stlmpc/stage1/stage1.hpp"

namespace stlmpc {

struct Budget {
  double delta_min = 0.0;
  double alpha = 0.0;

  void validate() const {
    if (delta_min < 0.0 || alpha < 0.0)
      throw std::invalid_argument("Budget: delta_min and alpha must be >= 0");
  }
};

struct ObjectiveSpec {
  enum class Kind { AgentRisk, Progress, Comfort };

  std::string name;
  Kind kind = Kind::Comfort;

  // AgentRisk: the per-step clearance formula whose robustness shortfall
  // below `margin` is penalized, the agent whose sampled risk defines the
  // true objective, and a speed-proxy weight. Share the clearance node
  // with the corresponding soft spec (G(clearance)) so both reuse one
  // set of MILP gadgets.
  std::string agent;
  FormulaPtr clearance;
  double margin = 0.5;
  double w_speed = 0.0;

  // Progress: true/surrogate objective is -(dir . (p_T - p_0)).
  double dir_x = 1.0;
  double dir_y = 0.0;
};

struct EpsilonGrid {
  std::vector<std::vector<double>> bounds;  // per objective, ascending
};

struct Candidate {
  std::vector<ControlInput> u;
  std::vector<VehicleState> x;
  std::map<std::string, double> delta;
  double delta_l1 = 0.0;
  std::vector<double> g_true;
  std::vector<double> g_surrogate;
  int origin_k = -1;                 // objective minimized
  std::vector<double> origin_eps;    // bounds used (one per objective, k slot unused)
};

struct ParetoResult {
  std::vector<Candidate> pareto;
  std::vector<std::vector<double>> front;  // g_true images of pareto
  std::vector<Candidate> dominated;
  int selected_index = -1;                 // set by select_action
};

struct NoCandidatesError : std::runtime_error {
  explicit NoCandidatesError(RelaxationResult fb)
      : std::runtime_error(
            "stage2: every epsilon-constraint subproblem was infeasible"),
        fallback(std::move(fb)) {}
  RelaxationResult fallback;
};

bool dominates(const std::vector<double>& g1, const std::vector<double>& g2);

// Nondominated subset; duplicates in objective space collapse to the
// candidate with smaller |delta|_1, then smaller control norm.
std::pair<std::vector<Candidate>, std::vector<Candidate>> pareto_filter(
    std::vector<Candidate> candidates);

class ParetoExplorer {
 public:
  // Extends enc's model with surrogate objective variables; must run
  // before enc's first solve. agents/risk_params drive g_true.
  ParetoExplorer(MpcMilp& enc, const MpcProblem& prob,
                 std::vector<ObjectiveSpec> objectives,
                 std::vector<AgentModel> agents, RiskParams risk_params);

  EpsilonGrid build_grids(const Budget& budget, int c);

  // bounds: one epsilon per objective; slot k is ignored.
  std::optional<Candidate> solve_epsilon_subproblem(
      const Budget& budget, int k, const std::vector<double>& bounds);

  // Full Algorithm-1 sweep. stage1 provides the fallback carried by
  // NoCandidatesError when nothing is feasible.
  ParetoResult approximate_pareto(const Budget& budget, int c,
                                  const RelaxationResult& stage1);

  // Exact surrogate value of objective l on a trajectory.
  double surrogate_value(int l, const std::vector<VehicleState>& states,
                         const std::vector<ControlInput>& inputs) const;
  double true_value(int l, const std::vector<VehicleState>& states,
                    const std::vector<ControlInput>& inputs) const;

  int num_objectives() const { return static_cast<int>(objectives_.size()); }
  const ObjectiveSpec& objective(int l) const {
    return objectives_.at(static_cast<std::size_t>(l));
  }

 private:
  void clear_epsilon_bounds();

  MpcMilp& enc_;
  const MpcProblem& prob_;
  std::vector<ObjectiveSpec> objectives_;
  std::vector<AgentModel> agents_;
  RiskParams risk_params_;
  std::vector<VarRef> g_;                       // surrogate variable per objective
  std::vector<std::pair<double, double>> g_nat_;  // natural bounds
  long subproblem_node_limit_ = 8000;
};

// Sets result.selected_index; returns the chosen candidate.
const Candidate& select_action(ParetoResult& result,
                               const std::vector<ControlInput>& nominal_u);

}  // namespace stlmpc
