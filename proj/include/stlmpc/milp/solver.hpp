// Branch-and-bound MILP solver over the dense-simplex LP relaxation.
// Best-bound node selection, branching on the most-fractional binary
// (ties by lowest variable id), deterministic exploration order.
//
// A MilpSolver instance keeps its LP basis between solve() calls, so a
// sequence of solves over the same model structure (with updated bounds,
// right-hand sides, or objective) warm-starts automatically.

#pragma once

#include "stlmpc/milp/model.hpp"
#include "stlmpc/milp/simplex.hpp"

namespace stlmpc {

class MilpSolver {
 public:
  // The model's structure (variable count, constraint count, sparsity
  // pattern) must not change between solve() calls; bounds, right-hand
  // sides, and the objective may.
  explicit MilpSolver(const MilpModel& model);

  MilpSolution solve(const SolverConfig& cfg = {});

 private:
  const MilpModel& model_;
  SimplexLp lp_;
  std::vector<int> binaries_;
};

// One-shot convenience.
MilpSolution solve(const MilpModel& model, const SolverConfig& cfg = {});

}  // namespace stlmpc
