#include "stlmpc/stage2/stage2.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <set>

namespace stlmpc {

bool dominates(const std::vector<double>& g1, const std::vector<double>& g2) {
  if (g1.size() != g2.size())
    throw std::invalid_argument("dominates: length mismatch");
  bool strict = false;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    if (g1[i] > g2[i]) return false;
    if (g1[i] < g2[i]) strict = true;
  }
  return strict;
}

namespace {

double control_sq_norm(const std::vector<ControlInput>& u) {
  double s = 0.0;
  for (const auto& c : u) s += c.a * c.a + c.beta * c.beta;
  return s;
}

// Dedup tie-break: smaller |delta|_1, then smaller control norm.
bool prefer(const Candidate& a, const Candidate& b) {
  if (a.delta_l1 != b.delta_l1) return a.delta_l1 < b.delta_l1;
  return control_sq_norm(a.u) < control_sq_norm(b.u);
}

}  // namespace

std::pair<std::vector<Candidate>, std::vector<Candidate>> pareto_filter(
    std::vector<Candidate> candidates) {
  std::vector<Candidate> kept, archived;
  // collapse exact duplicates in objective space
  for (auto& c : candidates) {
    bool dup = false;
    for (auto& k : kept) {
      if (k.g_true == c.g_true) {
        dup = true;
        if (prefer(c, k)) std::swap(k, c);
        archived.push_back(std::move(c));
        break;
      }
    }
    if (!dup) kept.push_back(std::move(c));
  }
  std::vector<Candidate> pareto;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    bool dominated_flag = false;
    for (std::size_t j = 0; j < kept.size() && !dominated_flag; ++j)
      if (j != i && dominates(kept[j].g_true, kept[i].g_true))
        dominated_flag = true;
    (dominated_flag ? archived : pareto).push_back(kept[i]);
  }
  return {std::move(pareto), std::move(archived)};
}

ParetoExplorer::ParetoExplorer(MpcMilp& enc, const MpcProblem& prob,
                               std::vector<ObjectiveSpec> objectives,
                               std::vector<AgentModel> agents,
                               RiskParams risk_params)
    : enc_(enc), prob_(prob), objectives_(std::move(objectives)),
      agents_(std::move(agents)), risk_params_(risk_params) {
  if (objectives_.size() < 2)
    throw std::invalid_argument("ParetoExplorer: need >= 2 objectives");
  {
    std::set<std::string> names;
    for (const auto& o : objectives_)
      if (o.name.empty() || !names.insert(o.name).second)
        throw std::invalid_argument("ParetoExplorer: objective names unique");
  }
  if (risk_params_.s_max == 0.0) {
    double mu_max = 0.0;
    for (const auto& a : agents_)
      mu_max = std::max(mu_max, reduced_mass(risk_params_.ego_mass, a.mass));
    risk_params_.s_max = mu_max > 0.0 ? mu_max * 30.0 : 1.0;
  }

  MilpModel& m = enc_.model();
  const int steps = enc_.num_steps();
  for (const auto& obj : objectives_) {
    LinExpr expr;
    switch (obj.kind) {
      case ObjectiveSpec::Kind::Comfort:
        for (int t = 0; t + 1 < steps; ++t)
          expr += LinExpr(enc_.input_abs_var(t, 0));
        break;
      case ObjectiveSpec::Kind::Progress: {
        expr = LinExpr(obj.dir_x * prob_.x0.px + obj.dir_y * prob_.x0.py);
        expr.add(enc_.state_var(steps - 1, 0), -obj.dir_x);
        expr.add(enc_.state_var(steps - 1, 1), -obj.dir_y);
        break;
      }
      case ObjectiveSpec::Kind::AgentRisk: {
        if (!obj.clearance)
          throw std::invalid_argument(
              "ParetoExplorer: AgentRisk objective needs a clearance formula");
        for (int t = 0; t < steps; ++t) {
          VarRef r = enc_.encoder().encode(obj.clearance, t);
          const double r_lo = m.var(r).lower;
          VarRef h = m.add_var(VarKind::Continuous, 0.0,
                               std::max(0.0, obj.margin - r_lo) + 1e-6,
                               obj.name + "_h" + std::to_string(t));
          m.add_constraint(LinExpr(h) + LinExpr(r), Relation::Ge, obj.margin);
          expr += LinExpr(h);
        }
        if (obj.w_speed != 0.0)
          for (int t = 0; t < steps; ++t)
            expr += LinExpr::term(enc_.state_var(t, 3), obj.w_speed);
        break;
      }
    }
    auto [lo, hi] = m.expr_range(expr);
    VarRef g = m.add_var(VarKind::Continuous, lo, hi, "g_" + obj.name);
    m.add_constraint(LinExpr(g) - expr, Relation::Eq, 0.0);
    g_.push_back(g);
    g_nat_.push_back({lo, hi});
  }
}

void ParetoExplorer::clear_epsilon_bounds() {
  for (std::size_t l = 0; l < g_.size(); ++l)
    enc_.model().set_var_bounds(g_[l], g_nat_[l].first, g_nat_[l].second);
}

double ParetoExplorer::surrogate_value(
    int l, const std::vector<VehicleState>& states,
    const std::vector<ControlInput>& inputs) const {
  const auto& obj = objectives_.at(static_cast<std::size_t>(l));
  switch (obj.kind) {
    case ObjectiveSpec::Kind::Comfort: {
      double s = 0.0;
      for (const auto& u : inputs) s += std::abs(u.a);
      return s;
    }
    case ObjectiveSpec::Kind::Progress:
      return -(obj.dir_x * (states.back().px - prob_.x0.px) +
               obj.dir_y * (states.back().py - prob_.x0.py));
    case ObjectiveSpec::Kind::AgentRisk: {
      Trace tr = assemble_trace(prob_, states);
      double s = 0.0;
      for (int t = 0; t < tr.grid.steps; ++t) {
        s += std::max(0.0, obj.margin - robustness(obj.clearance, tr, t));
        s += obj.w_speed * states[static_cast<std::size_t>(t)].v;
      }
      return s;
    }
  }
  throw std::logic_error("surrogate_value: unreachable");
}

double ParetoExplorer::true_value(int l,
                                  const std::vector<VehicleState>& states,
                                  const std::vector<ControlInput>& inputs) const {
  const auto& obj = objectives_.at(static_cast<std::size_t>(l));
  if (obj.kind != ObjectiveSpec::Kind::AgentRisk)
    return surrogate_value(l, states, inputs);
  auto it = std::find_if(agents_.begin(), agents_.end(),
                         [&](const AgentModel& a) { return a.name == obj.agent; });
  if (it == agents_.end())
    throw std::invalid_argument("ParetoExplorer: unknown agent " + obj.agent);
  Trace tr = assemble_trace(prob_, states);
  auto report = evaluate_risk(tr, {*it}, risk_params_);
  return report.agents.at(obj.agent).R;
}

std::optional<Candidate> ParetoExplorer::solve_epsilon_subproblem(
    const Budget& budget, int k, const std::vector<double>& bounds) {
  budget.validate();
  if (k < 0 || k >= num_objectives())
    throw std::out_of_range("solve_epsilon_subproblem: bad objective index");
  if (bounds.size() != g_.size())
    throw std::invalid_argument("solve_epsilon_subproblem: bounds size");

  clear_epsilon_bounds();
  enc_.free_deltas();
  const double tol = enc_.config().feas_tol;
  enc_.set_budget(budget.delta_min - tol, budget.delta_min + budget.alpha);
  for (int l = 0; l < num_objectives(); ++l) {
    if (l == k) continue;
    const auto [lo, hi] = g_nat_[static_cast<std::size_t>(l)];
    if (bounds[static_cast<std::size_t>(l)] < lo - 1e-9) return std::nullopt;
    enc_.model().set_var_bounds(
        g_[static_cast<std::size_t>(l)], lo,
        std::min(hi, bounds[static_cast<std::size_t>(l)] + 1e-9));
  }
  enc_.model().set_objective(ObjSense::Minimize,
                             LinExpr(g_[static_cast<std::size_t>(k)]));
  auto sol = enc_.solve(subproblem_node_limit_);
  clear_epsilon_bounds();
  if (sol.values.empty()) return std::nullopt;

  Candidate c;
  c.u = enc_.inputs_of(sol);
  c.x = enc_.states_of(sol);
  c.origin_k = k;
  c.origin_eps = bounds;

  // The MILP deltas are slack (any value above the actual shortfall is
  // feasible), so report the effective relaxation: the monitor-measured
  // robustness deficit of each soft spec on the planned trajectory.
  Trace tr = assemble_trace(prob_, c.x);
  for (const auto& nf : enc_.specs().soft) {
    const double rho = robustness(nf.formula, tr, 0);
    c.delta[nf.name] = std::max(0.0, -rho);
    c.delta_l1 += c.delta[nf.name];
  }

  // audits: never hand a candidate downstream that violates the
  // monitor-checked contracts
  for (const auto& nf : enc_.specs().hard) {
    if (robustness(nf.formula, tr, 0) < -1e-6) {
      std::cerr << "warning: dropping candidate violating hard spec "
                << nf.name << "\n";
      return std::nullopt;
    }
  }
  if (c.delta_l1 < budget.delta_min - 1e-6 ||
      c.delta_l1 > budget.delta_min + budget.alpha + 1e-6) {
    std::cerr << "warning: dropping candidate outside relaxation budget\n";
    return std::nullopt;
  }
  for (int l = 0; l < num_objectives(); ++l) {
    c.g_surrogate.push_back(surrogate_value(l, c.x, c.u));
    c.g_true.push_back(true_value(l, c.x, c.u));
  }
  return c;
}

EpsilonGrid ParetoExplorer::build_grids(const Budget& budget, int c) {
  budget.validate();
  if (c < 2) throw std::invalid_argument("build_grids: c >= 2");
  const int m = num_objectives();
  const double tol = enc_.config().feas_tol;

  // single-objective optima
  std::vector<std::vector<VehicleState>> opt_states;
  std::vector<std::vector<ControlInput>> opt_inputs;
  for (int l = 0; l < m; ++l) {
    clear_epsilon_bounds();
    enc_.free_deltas();
    enc_.set_budget(budget.delta_min - tol, budget.delta_min + budget.alpha);
    enc_.model().set_objective(ObjSense::Minimize,
                               LinExpr(g_[static_cast<std::size_t>(l)]));
    auto sol = enc_.solve(subproblem_node_limit_);
    if (sol.values.empty())
      throw std::runtime_error(
          "build_grids: single-objective subproblem infeasible (" +
          objectives_[static_cast<std::size_t>(l)].name + ")");
    opt_states.push_back(enc_.states_of(sol));
    opt_inputs.push_back(enc_.inputs_of(sol));
  }

  EpsilonGrid grid;
  for (int l = 0; l < m; ++l) {
    double ideal = surrogate_value(l, opt_states[static_cast<std::size_t>(l)],
                                   opt_inputs[static_cast<std::size_t>(l)]);
    double nadir = ideal;
    for (int j = 0; j < m; ++j)
      nadir = std::max(nadir,
                       surrogate_value(l, opt_states[static_cast<std::size_t>(j)],
                                       opt_inputs[static_cast<std::size_t>(j)]));
    std::vector<double> pts;
    if (nadir - ideal < 1e-9) {
      std::cerr << "note: objective "
                << objectives_[static_cast<std::size_t>(l)].name
                << " has a degenerate grid (ideal == nadir)\n";
      pts.push_back(ideal);
    } else {
      for (int i = 0; i < c; ++i)
        pts.push_back(ideal + (nadir - ideal) * static_cast<double>(i) /
                                  static_cast<double>(c - 1));
    }
    grid.bounds.push_back(std::move(pts));
  }
  return grid;
}

ParetoResult ParetoExplorer::approximate_pareto(const Budget& budget, int c,
                                                const RelaxationResult& stage1) {
  const int m = num_objectives();
  EpsilonGrid grid = build_grids(budget, c);

  std::vector<Candidate> collected;
  for (int k = 0; k < m; ++k) {
    // odometer over the grids of the other objectives
    std::vector<int> free_idx;
    for (int l = 0; l < m; ++l)
      if (l != k) free_idx.push_back(l);
    std::vector<std::size_t> pos(free_idx.size(), 0);
    bool done = false;
    while (!done) {
      std::vector<double> bounds(static_cast<std::size_t>(m), 0.0);
      for (std::size_t i = 0; i < free_idx.size(); ++i)
        bounds[static_cast<std::size_t>(free_idx[i])] =
            grid.bounds[static_cast<std::size_t>(free_idx[i])][pos[i]];
      if (auto cand = solve_epsilon_subproblem(budget, k, bounds))
        collected.push_back(std::move(*cand));
      // advance
      std::size_t i = 0;
      for (; i < pos.size(); ++i) {
        if (++pos[i] <
            grid.bounds[static_cast<std::size_t>(free_idx[i])].size())
          break;
        pos[i] = 0;
      }
      done = free_idx.empty() || i == pos.size();
    }
  }
  if (collected.empty()) throw NoCandidatesError(stage1);

  ParetoResult out;
  auto [pareto, dominated] = pareto_filter(std::move(collected));
  out.pareto = std::move(pareto);
  out.dominated = std::move(dominated);
  for (const auto& p : out.pareto) out.front.push_back(p.g_true);
  return out;
}

const Candidate& select_action(ParetoResult& result,
                               const std::vector<ControlInput>& nominal_u) {
  if (result.pareto.empty())
    throw std::invalid_argument("select_action: empty Pareto set");
  auto deviation = [&](const Candidate& c) {
    double s = 0.0;
    for (std::size_t t = 0; t < c.u.size(); ++t) {
      double da = c.u[t].a - (t < nominal_u.size() ? nominal_u[t].a : 0.0);
      double db = c.u[t].beta - (t < nominal_u.size() ? nominal_u[t].beta : 0.0);
      s += da * da + db * db;
    }
    return s;
  };
  auto total_risk = [&](const Candidate& c) {
    double s = 0.0;
    for (double g : c.g_true) s += g;  // risk objectives dominate ties
    return s;
  };
  int best = 0;
  for (int i = 1; i < static_cast<int>(result.pareto.size()); ++i) {
    const auto& a = result.pareto[static_cast<std::size_t>(i)];
    const auto& b = result.pareto[static_cast<std::size_t>(best)];
    const double da = deviation(a), db = deviation(b);
    if (da < db - 1e-12 ||
        (std::abs(da - db) <= 1e-12 && total_risk(a) < total_risk(b) - 1e-12))
      best = i;
  }
  result.selected_index = best;
  return result.pareto[static_cast<std::size_t>(best)];
}

}  // namespace stlmpc
