#include "stlmpc/milp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

namespace stlmpc {

namespace {

struct Fix {
  int var;
  double val;
  std::shared_ptr<const Fix> parent;
};

struct Node {
  double bound;
  long seq;
  std::shared_ptr<const Fix> fixes;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;  // min-heap on bound
    return a.seq > b.seq;
  }
};

}  // namespace

MilpSolver::MilpSolver(const MilpModel& model) : model_(model) {
  const int n = model.num_vars();
  const int m = model.num_constraints();
  std::vector<SimplexLp::SparseCol> cols(static_cast<std::size_t>(n));
  for (int i = 0; i < m; ++i) {
    const auto& c = model.constraints()[static_cast<std::size_t>(i)];
    for (const auto& [id, a] : c.expr.terms())
      if (a != 0.0) cols[static_cast<std::size_t>(id)].push_back({i, a});
  }
  lp_.set_structure(m, std::move(cols));
  for (int j = 0; j < n; ++j)
    if (model.var(j).kind == VarKind::Binary) binaries_.push_back(j);
}

MilpSolution MilpSolver::solve(const SolverConfig& cfg) {
  cfg.validate();
  const int n = model_.num_vars();
  const int m = model_.num_constraints();
  if (n == 0) throw std::invalid_argument("MilpSolver: empty model");

  Eigen::VectorXd base_lo(n), base_hi(n), row_lo(m), row_hi(m), cost(n);
  for (int j = 0; j < n; ++j) {
    base_lo[j] = model_.var(j).lower;
    base_hi[j] = model_.var(j).upper;
  }
  for (int i = 0; i < m; ++i) {
    const auto& c = model_.constraints()[static_cast<std::size_t>(i)];
    const double rhs = c.rhs - c.expr.constant();
    row_lo[i] = (c.rel == Relation::Le) ? -kInf : rhs;
    row_hi[i] = (c.rel == Relation::Ge) ? kInf : rhs;
  }
  const bool maximize = model_.objective_sense() == ObjSense::Maximize;
  const double obj_sign = maximize ? -1.0 : 1.0;
  cost.setZero();
  for (const auto& [id, a] : model_.objective().terms())
    cost[id] = obj_sign * a;
  const double obj_const = obj_sign * model_.objective().constant();

  double incumbent_obj =
      std::isfinite(cfg.initial_incumbent) ? obj_sign * cfg.initial_incumbent
                                           : kInf;
  std::vector<double> incumbent_values;
  const auto prune_threshold = [&]() {
    return incumbent_obj - cfg.gap_tol * std::max(1.0, std::abs(incumbent_obj));
  };

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long seq = 0;
  open.push({-kInf, seq++, nullptr});
  long nodes = 0;
  bool hit_node_limit = false;
  bool unbounded = false;
  double best_open_bound = kInf;

  Eigen::VectorXd node_lo(n), node_hi(n);
  while (!open.empty()) {
    Node node = open.top();
    open.pop();
    if (node.bound >= prune_threshold()) continue;
    if (nodes >= cfg.node_limit) {
      hit_node_limit = true;
      best_open_bound = std::min(best_open_bound, node.bound);
      continue;  // drain queue to record the best remaining bound
    }

    node_lo = base_lo;
    node_hi = base_hi;
    for (const Fix* f = node.fixes.get(); f != nullptr; f = f->parent.get()) {
      node_lo[f->var] = f->val;
      node_hi[f->var] = f->val;
    }

    ++nodes;
    SimplexLp::Result lr = lp_.solve(node_lo, node_hi, row_lo, row_hi, cost);
    if (lr.status == LpStatus::Infeasible) continue;
    if (lr.status == LpStatus::Unbounded) {
      unbounded = true;
      break;
    }
    if (lr.status == LpStatus::IterLimit)
      throw std::runtime_error("MilpSolver: LP iteration limit exceeded");

    const double obj = lr.objective + obj_const;
    if (obj >= prune_threshold()) continue;

    Eigen::VectorXd xv = lp_.values();
    // Most-fractional binary (ties by lowest id).
    int branch_var = -1;
    double best_score = -1.0;
    for (int b : binaries_) {
      if (std::abs(xv[b] - std::round(xv[b])) <= cfg.int_tol) continue;
      double score = 0.5 - std::abs(xv[b] - 0.5);
      if (score > best_score + 1e-15) {
        best_score = score;
        branch_var = b;
      }
    }

    if (branch_var < 0) {
      // Integral: new incumbent.
      std::vector<double> vals(xv.data(), xv.data() + n);
      for (int b : binaries_) vals[static_cast<std::size_t>(b)] =
          std::round(vals[static_cast<std::size_t>(b)]);
      incumbent_obj = obj;
      incumbent_values = std::move(vals);
      continue;
    }

    // Rounding heuristic: may yield an early incumbent.
    if (cfg.repair) {
      std::vector<double> cand(xv.data(), xv.data() + n);
      cfg.repair(cand);
      bool integral = true;
      for (int b : binaries_) {
        double v = cand[static_cast<std::size_t>(b)];
        if (std::abs(v - std::round(v)) > cfg.int_tol) {
          integral = false;
          break;
        }
      }
      if (integral && model_.max_violation(cand) <= 10.0 * cfg.feas_tol) {
        double cobj = obj_sign * model_.objective().eval(cand);
        if (cobj < incumbent_obj - 1e-12) {
          for (int b : binaries_) cand[static_cast<std::size_t>(b)] =
              std::round(cand[static_cast<std::size_t>(b)]);
          incumbent_obj = cobj;
          incumbent_values = std::move(cand);
        }
      }
      if (obj >= prune_threshold()) continue;
    }

    for (double v : {0.0, 1.0}) {
      auto fix = std::make_shared<Fix>(Fix{branch_var, v, node.fixes});
      open.push({obj, seq++, std::move(fix)});
    }
  }

  MilpSolution sol;
  sol.nodes_explored = nodes;
  if (unbounded) {
    sol.status = MilpStatus::Unbounded;
    return sol;
  }
  if (hit_node_limit) {
    sol.status = MilpStatus::NodeLimit;
  } else {
    sol.status =
        incumbent_values.empty() && !std::isfinite(incumbent_obj)
            ? MilpStatus::Infeasible
            : MilpStatus::Optimal;
    best_open_bound = incumbent_obj;
  }
  if (std::isfinite(incumbent_obj)) {
    sol.objective_value = obj_sign * incumbent_obj;
    sol.values = std::move(incumbent_values);
  }
  sol.best_bound =
      obj_sign * std::min(best_open_bound, incumbent_obj);
  return sol;
}

MilpSolution solve(const MilpModel& model, const SolverConfig& cfg) {
  MilpSolver s(model);
  return s.solve(cfg);
}

}  // namespace stlmpc
