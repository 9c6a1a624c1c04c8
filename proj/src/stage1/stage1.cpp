#include "stlmpc/stage1/stage1.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace stlmpc {

void SpecSet::validate() const {
  std::set<std::string> names;
  for (const auto* list : {&hard, &soft})
    for (const auto& nf : *list) {
      if (nf.name.empty() || !nf.formula)
        throw std::invalid_argument("SpecSet: empty name or null formula");
      if (!names.insert(nf.name).second)
        throw std::invalid_argument("SpecSet: duplicate spec name " + nf.name);
    }
}

void MpcProblem::validate() const {
  params.validate();
  if (static_cast<int>(linear_model.size()) != horizon.steps - 1)
    throw std::invalid_argument(
        "MpcProblem: linear_model must have horizon.steps - 1 entries");
  for (const auto& [name, tr] : exogenous)
    if (!(tr.grid == horizon))
      throw std::invalid_argument("MpcProblem: exogenous trace grid mismatch (" +
                                  name + ")");
}

Trace assemble_trace(const MpcProblem& prob,
                     const std::vector<VehicleState>& states) {
  if (static_cast<int>(states.size()) != prob.horizon.steps)
    throw std::invalid_argument("assemble_trace: state count mismatch");
  std::vector<std::string> dims{"px", "py", "theta", "v"};
  for (const auto& [name, tr] : prob.exogenous)
    for (const auto& d : tr.dims) dims.push_back(name + "_" + d);
  Trace out(prob.horizon, dims);
  for (int k = 0; k < prob.horizon.steps; ++k) {
    out.values(k, 0) = states[static_cast<std::size_t>(k)].px;
    out.values(k, 1) = states[static_cast<std::size_t>(k)].py;
    out.values(k, 2) = states[static_cast<std::size_t>(k)].theta;
    out.values(k, 3) = states[static_cast<std::size_t>(k)].v;
  }
  int col = 4;
  for (const auto& [name, tr] : prob.exogenous)
    for (std::size_t d = 0; d < tr.dims.size(); ++d, ++col)
      for (int k = 0; k < prob.horizon.steps; ++k)
        out.values(k, col) = tr.values(k, static_cast<int>(d));
  return out;
}

MpcMilp::MpcMilp(const MpcProblem& prob, const SpecSet& specs, SolverConfig cfg)
    : prob_(prob), specs_(specs), cfg_(std::move(cfg)),
      steps_(prob.horizon.steps), delta_cap_(cfg_.big_M) {
  prob.validate();
  specs.validate();
  cfg_.validate();

  // Reachable box per step under the affine model and the input box;
  // these bounds drive both the big-M audit and selector pruning.
  const Eigen::Vector2d u_lo(prob.params.a_min, prob.params.beta_min);
  const Eigen::Vector2d u_hi(prob.params.a_max, prob.params.beta_max);
  std::vector<Eigen::Vector4d> lo(static_cast<std::size_t>(steps_)),
      hi(static_cast<std::size_t>(steps_));
  lo[0] = hi[0] = prob.x0.vec();
  for (int t = 0; t + 1 < steps_; ++t) {
    const auto& st = prob.linear_model[static_cast<std::size_t>(t)];
    for (int i = 0; i < 4; ++i) {
      double nlo = st.c[i], nhi = st.c[i];
      for (int j = 0; j < 4; ++j) {
        const double a = st.A(i, j);
        nlo += a * (a >= 0 ? lo[t][j] : hi[t][j]);
        nhi += a * (a >= 0 ? hi[t][j] : lo[t][j]);
      }
      for (int k = 0; k < 2; ++k) {
        const double b = st.B(i, k);
        nlo += b * (b >= 0 ? u_lo[k] : u_hi[k]);
        nhi += b * (b >= 0 ? u_hi[k] : u_lo[k]);
      }
      lo[t + 1][i] = nlo;
      hi[t + 1][i] = nhi;
    }
  }

  const double pad = 1e-6;  // absorb floating-point drift at the box faces
  for (int t = 0; t < steps_; ++t) {
    std::array<VarRef, 4> row;
    for (int d = 0; d < 4; ++d)
      row[static_cast<std::size_t>(d)] = model_.add_var(
          VarKind::Continuous, lo[t][d] - pad, hi[t][d] + pad,
          "x" + std::to_string(t) + "_" + std::to_string(d));
    x_.push_back(row);
  }
  for (int t = 0; t + 1 < steps_; ++t) {
    std::array<VarRef, 2> row, arow;
    for (int d = 0; d < 2; ++d) {
      row[static_cast<std::size_t>(d)] = model_.add_var(
          VarKind::Continuous, u_lo[d], u_hi[d],
          "u" + std::to_string(t) + "_" + std::to_string(d));
      const double cap = std::max(std::abs(u_lo[d]), std::abs(u_hi[d]));
      arow[static_cast<std::size_t>(d)] = model_.add_var(
          VarKind::Continuous, 0.0, cap,
          "w" + std::to_string(t) + "_" + std::to_string(d));
      model_.add_constraint(LinExpr(arow[static_cast<std::size_t>(d)]) -
                                LinExpr(row[static_cast<std::size_t>(d)]),
                            Relation::Ge, 0.0);
      model_.add_constraint(LinExpr(arow[static_cast<std::size_t>(d)]) +
                                LinExpr(row[static_cast<std::size_t>(d)]),
                            Relation::Ge, 0.0);
    }
    u_.push_back(row);
    u_abs_.push_back(arow);
  }

  // x_{t+1} = A x_t + B u_t + c
  for (int t = 0; t + 1 < steps_; ++t) {
    const auto& st = prob.linear_model[static_cast<std::size_t>(t)];
    for (int i = 0; i < 4; ++i) {
      LinExpr e(x_[static_cast<std::size_t>(t + 1)][static_cast<std::size_t>(i)]);
      for (int j = 0; j < 4; ++j)
        if (st.A(i, j) != 0.0)
          e.add(x_[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)],
                -st.A(i, j));
      for (int k = 0; k < 2; ++k)
        if (st.B(i, k) != 0.0)
          e.add(u_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)],
                -st.B(i, k));
      model_.add_constraint(std::move(e), Relation::Eq, st.c[i]);
    }
  }
  // initial state pinned
  for (int d = 0; d < 4; ++d)
    model_.set_var_bounds(x_[0][static_cast<std::size_t>(d)],
                          prob.x0.vec()[d], prob.x0.vec()[d]);

  VarTrace vt;
  vt.grid = prob.horizon;
  const char* ego_dims[4] = {"px", "py", "theta", "v"};
  for (int d = 0; d < 4; ++d) {
    std::vector<LinExpr> col;
    for (int t = 0; t < steps_; ++t)
      col.push_back(LinExpr(x_[static_cast<std::size_t>(t)][static_cast<std::size_t>(d)]));
    vt.dims[ego_dims[d]] = std::move(col);
  }
  for (const auto& [name, tr] : prob.exogenous)
    for (std::size_t d = 0; d < tr.dims.size(); ++d) {
      std::vector<LinExpr> col;
      for (int k = 0; k < steps_; ++k)
        col.push_back(LinExpr(tr.values(k, static_cast<int>(d))));
      vt.dims[name + "_" + tr.dims[d]] = std::move(col);
    }
  encoder_ = std::make_unique<RobustnessEncoder>(model_, std::move(vt), cfg_,
                                                 ctx_);

  for (const auto& nf : specs.hard) {
    VarRef r = encoder_->encode(nf.formula, 0);
    rho_[nf.name] = r;
    model_.add_constraint(LinExpr(r), Relation::Ge, 0.0, "hard_" + nf.name);
  }
  LinExpr dsum;
  for (const auto& nf : specs.soft) {
    VarRef r = encoder_->encode(nf.formula, 0);
    rho_[nf.name] = r;
    VarRef d = model_.add_var(VarKind::Continuous, 0.0, delta_cap_,
                              "delta_" + nf.name);
    delta_[nf.name] = d;
    dsum += LinExpr(d);
    model_.add_constraint(LinExpr(r) + LinExpr(d), Relation::Ge, 0.0,
                          "soft_" + nf.name);
  }
  delta_sum_ = model_.add_var(
      VarKind::Continuous, 0.0,
      delta_cap_ * static_cast<double>(std::max<std::size_t>(1, delta_.size())),
      "delta_sum");
  dsum -= LinExpr(delta_sum_);
  model_.add_constraint(std::move(dsum), Relation::Eq, 0.0, "budget");

  nominal_obj_ = LinExpr(0.0);
  for (const auto& arow : u_abs_)
    for (auto w : arow) nominal_obj_ += prob.objective.w_input * LinExpr(w);
  if (prob.objective.w_goal != 0.0) {
    const auto& xt = x_.back();
    nominal_obj_ -= prob.objective.w_goal *
                    (prob.objective.goal_dir_x * LinExpr(xt[0]) +
                     prob.objective.goal_dir_y * LinExpr(xt[1]));
  }
  model_.set_objective(ObjSense::Minimize, nominal_obj_);
}

void MpcMilp::fix_deltas_to_zero() {
  for (const auto& [name, d] : delta_) model_.set_var_bounds(d, 0.0, 0.0);
  model_.set_var_bounds(delta_sum_, 0.0, 0.0);
}

void MpcMilp::free_deltas() {
  for (const auto& [name, d] : delta_)
    model_.set_var_bounds(d, 0.0, delta_cap_);
  model_.set_var_bounds(
      delta_sum_, 0.0,
      delta_cap_ * static_cast<double>(std::max<std::size_t>(1, delta_.size())));
}

void MpcMilp::set_budget(double lo, double hi) {
  const double cap =
      delta_cap_ * static_cast<double>(std::max<std::size_t>(1, delta_.size()));
  model_.set_var_bounds(delta_sum_, std::max(0.0, lo), std::min(hi, cap));
}

void MpcMilp::use_nominal_objective() {
  model_.set_objective(ObjSense::Minimize, nominal_obj_);
}

void MpcMilp::use_relaxation_objective() {
  model_.set_objective(ObjSense::Minimize, LinExpr(delta_sum_));
}

void MpcMilp::ensure_solver() {
  if (!solver_) solver_ = std::make_unique<MilpSolver>(model_);
}

MilpSolution MpcMilp::solve(long node_limit, double initial_incumbent) {
  ensure_solver();
  SolverConfig c = cfg_;
  c.repair = [this](std::vector<double>& v) { ctx_.repair(v); };
  if (node_limit > 0) c.node_limit = node_limit;
  c.initial_incumbent = initial_incumbent;
  return solver_->solve(c);
}

std::vector<VehicleState> MpcMilp::states_of(const MilpSolution& s) const {
  std::vector<VehicleState> out;
  for (const auto& row : x_)
    out.push_back({s.value(row[0]), s.value(row[1]), s.value(row[2]),
                   s.value(row[3])});
  return out;
}

std::vector<ControlInput> MpcMilp::inputs_of(const MilpSolution& s) const {
  std::vector<ControlInput> out;
  for (const auto& row : u_) out.push_back({s.value(row[0]), s.value(row[1])});
  return out;
}

std::map<std::string, double> MpcMilp::deltas_of(const MilpSolution& s) const {
  std::map<std::string, double> out;
  for (const auto& [name, d] : delta_) out[name] = std::max(0.0, s.value(d));
  return out;
}

NominalResult solve_nominal(MpcMilp& enc) {
  enc.fix_deltas_to_zero();
  enc.use_nominal_objective();
  auto sol = enc.solve();
  NominalResult out;
  if (sol.values.empty()) return out;
  out.feasible = true;
  out.u = enc.inputs_of(sol);
  out.x = enc.states_of(sol);
  out.objective = sol.objective_value;
  return out;
}

RelaxationResult restore_feasibility(MpcMilp& enc) {
  enc.free_deltas();
  enc.use_relaxation_objective();
  auto sol = enc.solve();
  RelaxationResult out;
  if (sol.values.empty()) {
    out.status = RelaxationStatus::HardInfeasible;
    return out;
  }
  out.u_star = enc.inputs_of(sol);
  out.x_star = enc.states_of(sol);
  out.delta_star = enc.deltas_of(sol);
  out.delta_min = 0.0;
  for (const auto& [name, d] : out.delta_star) out.delta_min += d;
  out.status = out.delta_min <= enc.config().feas_tol
                   ? RelaxationStatus::FeasibleStrict
                   : RelaxationStatus::FeasibleRelaxed;
  return out;
}

NominalResult solve_nominal(const MpcProblem& prob, const SpecSet& specs,
                            const SolverConfig& cfg) {
  MpcMilp enc(prob, specs, cfg);
  return solve_nominal(enc);
}

RelaxationResult restore_feasibility(const MpcProblem& prob,
                                     const SpecSet& specs,
                                     const SolverConfig& cfg) {
  MpcMilp enc(prob, specs, cfg);
  return restore_feasibility(enc);
}

}  // namespace stlmpc
