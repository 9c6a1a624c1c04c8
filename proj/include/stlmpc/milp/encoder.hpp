// Big-M encoding of STL robustness into a MilpModel.
//
// Formulas are rewritten to negation normal form first, so only min/max
// gadgets are needed: And/G compile to encode_min, Or/F to encode_max.
// Each gadget introduces a fresh continuous variable constrained to equal
// the min/max of its operand expressions at every integer-feasible point:
//
//   min:  r <= e_i;  r >= e_i - M (1 - z_i);  sum z_i = 1
//   max:  r >= e_i;  r <= e_i + M (1 - z_i);  sum z_i = 1
//
// Selector binaries that provably cannot pick the extremum (by interval
// arithmetic over the variable bounds) are omitted, which prunes most of
// them on well-bounded models. An interval-arithmetic audit rejects any
// gadget whose operand spread exceeds big_M (hard error, never silent).
//
// The EncoderContext records every gadget in creation (topological)
// order and derives a rounding heuristic for the branch-and-bound: given
// an LP point, recompute each gadget variable bottom-up as the exact
// min/max and set its selectors to the arg-extremum indicator (ties by
// lowest variable id).

#pragma once

#include <map>
#include <string>
#include <vector>

#include "stlmpc/milp/model.hpp"
#include "stlmpc/stl/ast.hpp"
#include "stlmpc/stl/robustness.hpp"

namespace stlmpc {

struct EncoderContext {
  struct Gadget {
    bool is_min = true;
    VarRef r;
    std::vector<LinExpr> exprs;          // all operands
    std::vector<VarRef> selectors;       // per operand; invalid if pruned
  };
  std::vector<Gadget> gadgets;

  // Rounding heuristic for SolverConfig::repair.
  void repair(std::vector<double>& values) const;
};

VarRef encode_min(MilpModel& m, const std::vector<LinExpr>& exprs,
                  const SolverConfig& cfg, EncoderContext& ctx);
VarRef encode_max(MilpModel& m, const std::vector<LinExpr>& exprs,
                  const SolverConfig& cfg, EncoderContext& ctx);

// Symbolic trace: per dimension, one linear expression per sample. Ego
// dimensions map to decision variables, exogenous agent dimensions to
// constants.
struct VarTrace {
  TimeGrid grid;
  std::map<std::string, std::vector<LinExpr>> dims;

  const std::vector<LinExpr>& dim(const std::string& name) const {
    auto it = dims.find(name);
    if (it == dims.end())
      throw std::runtime_error("VarTrace: unknown dimension " + name);
    return it->second;
  }
};

// Encodes rho(f, ., t_index) over the symbolic trace and returns a
// variable equal to it at any integer-feasible assignment. Uses an
// expression cache keyed on (subformula, sample index), so repeated
// subformulas (and surrogate reuse of spec subtrees) share gadgets.
class RobustnessEncoder {
 public:
  RobustnessEncoder(MilpModel& m, VarTrace trace, SolverConfig cfg,
                    EncoderContext& ctx)
      : model_(m), trace_(std::move(trace)), cfg_(std::move(cfg)), ctx_(ctx) {}

  VarRef encode(const FormulaPtr& f, int t_index);

  // Expression form (may be affine, without a dedicated variable).
  LinExpr encode_expr(const FormulaPtr& f, int t_index);

  MilpModel& model() { return model_; }
  const VarTrace& trace() const { return trace_; }

 private:
  LinExpr encode_nnf(const FormulaPtr& f, int t_index);
  LinExpr encode_gadget(const FormulaPtr& f, int t_index, bool want_min);
  void collect_operands(const FormulaPtr& f, int t_index, bool want_min,
                        std::vector<LinExpr>& out);

  MilpModel& model_;
  VarTrace trace_;
  SolverConfig cfg_;
  EncoderContext& ctx_;
  std::map<std::pair<const Formula*, int>, LinExpr> cache_;
  std::map<const Formula*, FormulaPtr> nnf_of_;
};

// Convenience matching the operation-level contract: state_vars is a
// steps x dims grid of variables.
VarRef encode_robustness(MilpModel& m, const FormulaPtr& f,
                         const std::vector<std::vector<VarRef>>& state_vars,
                         const std::vector<std::string>& dim_names,
                         const TimeGrid& grid, int t_index,
                         const SolverConfig& cfg, EncoderContext& ctx);

}  // namespace stlmpc
