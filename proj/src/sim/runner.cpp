#include "stlmpc/sim/runner.hpp"

#include <iostream>

namespace stlmpc {

namespace {

// Reference trajectory for linearization: roll the candidate input
// sequence out from the current state on the nonlinear model.
std::vector<VehicleState> rollout(const VehicleState& x0,
                                  const std::vector<ControlInput>& u,
                                  double dt, const VehicleParams& params) {
  std::vector<VehicleState> xs{x0};
  for (const auto& c : u) xs.push_back(step_discrete(xs.back(), c, dt, params));
  return xs;
}

// Shift last cycle's plan by one step for the new cycle's reference.
std::vector<ControlInput> shifted(const std::vector<ControlInput>& prev,
                                  int len) {
  std::vector<ControlInput> out;
  for (int t = 0; t < len; ++t) {
    const std::size_t src = std::min(static_cast<std::size_t>(t) + 1,
                                     prev.empty() ? 0 : prev.size() - 1);
    out.push_back(prev.empty() ? ControlInput{0.0, 0.0} : prev[src]);
  }
  return out;
}

}  // namespace

SimLog run_receding_horizon(const Scenario& sc, RunMode mode) {
  sc.validate();
  if (mode == RunMode::Full && sc.objectives.size() < 2)
    throw std::invalid_argument(
        "run_receding_horizon: full mode needs >= 2 objectives");

  SimLog log;
  log.scenario_name = sc.name;
  log.mode = mode;
  log.seed = sc.risk_params.seed;
  log.executed.push_back(sc.ego_init);

  const double dt = sc.horizon.dt;
  const int n_inputs = sc.horizon.steps - 1;
  VehicleState ego = sc.ego_init;
  std::vector<ControlInput> prev_u;

  for (int cycle = 0; cycle < sc.cycles; ++cycle) {
    MpcProblem prob;
    prob.horizon = sc.horizon;
    prob.x0 = ego;
    prob.params = sc.params;
    prob.objective = sc.nominal_objective;
    auto uref = shifted(prev_u, n_inputs);
    prob.linear_model =
        linearize(rollout(ego, uref, dt, sc.params), uref, dt, sc.params);

    const double t0 = dt * static_cast<double>(cycle);
    std::vector<AgentModel> predicted;
    for (const auto& a : sc.agents) {
      predicted.push_back(agent_model_at(a, sc.horizon, t0));
      Trace& tr = predicted.back().nominal;
      prob.exogenous[a.name] = tr;
    }

    MpcMilp enc(prob, sc.specs, {});
    std::optional<ParetoExplorer> explorer;
    if (mode == RunMode::Full)
      explorer.emplace(enc, prob, sc.objectives, predicted, sc.risk_params);

    CycleLog cl;
    cl.cycle = cycle;
    cl.ego = ego;

    auto stage1 = restore_feasibility(enc);
    cl.stage1_status = stage1.status;
    cl.delta_min = stage1.delta_min;
    if (stage1.status == RelaxationStatus::HardInfeasible) {
      log.aborted = true;
      log.abort_reason = "cycle " + std::to_string(cycle) +
                         ": hard specifications jointly infeasible";
      std::cerr << "abort: " << log.abort_reason << "\n";
      log.cycles.push_back(std::move(cl));
      break;
    }

    // polish within the minimal budget so the executed stage-1 plan
    // optimizes the nominal cost instead of an arbitrary delta-minimizer
    const double tol = enc.config().feas_tol;
    enc.set_budget(stage1.delta_min - tol, stage1.delta_min + tol);
    enc.use_nominal_objective();
    auto polished = enc.solve();
    std::vector<ControlInput> plan_u = stage1.u_star;
    std::vector<VehicleState> plan_x = stage1.x_star;
    if (!polished.values.empty()) {
      plan_u = enc.inputs_of(polished);
      plan_x = enc.states_of(polished);
    }

    if (mode == RunMode::Full) {
      cl.ran_stage2 = true;
      Budget budget{stage1.delta_min, sc.budget_alpha};
      try {
        auto res = explorer->approximate_pareto(budget, sc.grid_size, stage1);
        const Candidate& pick = select_action(res, plan_u);
        plan_u = pick.u;
        plan_x = pick.x;
        cl.front = res.front;
        cl.selected_index = res.selected_index;
        cl.selected_g = pick.g_true;
      } catch (const NoCandidatesError& e) {
        cl.stage2_fallback = true;
        std::cerr << "cycle " << cycle << ": " << e.what()
                  << "; executing the stage-1 plan\n";
      }
    }

    cl.planned = plan_x;
    auto tr = assemble_trace(prob, plan_x);
    for (const auto& nf : sc.specs.hard)
      cl.robustness[nf.name] = robustness(nf.formula, tr, 0);
    for (const auto& nf : sc.specs.soft) {
      cl.robustness[nf.name] = robustness(nf.formula, tr, 0);
      // effective relaxation actually consumed by the executed plan
      cl.delta[nf.name] = std::max(0.0, -cl.robustness[nf.name]);
      cl.delta_l1 += cl.delta[nf.name];
    }
    cl.risk = evaluate_risk(tr, predicted, sc.risk_params);

    cl.executed = plan_u.front();
    ego = step_discrete(ego, cl.executed, dt, sc.params);
    log.executed.push_back(ego);
    prev_u = plan_u;
    log.cycles.push_back(std::move(cl));
  }
  return log;
}

}  // namespace stlmpc
