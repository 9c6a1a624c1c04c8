// Discrete-time robustness semantics. inf/sup over time intervals are
// realized as min/max over the sample-index sets produced by
// interval_to_indices.

#pragma once

#include <vector>

#include "stlmpc/stl/ast.hpp"

namespace stlmpc {

// Sample indices covered by iv shifted to t_index, clipped at the horizon:
//   { k : t_index + ceil(a/dt) <= k <= t_index + floor(b/dt), k < steps }.
// Endpoint rounding is conservative (ceil lower, floor upper) with a 1e-9
// slack against floating-point drift. The set is empty only when the
// shifted interval lies wholly beyond the horizon.
std::vector<int> interval_to_indices(const Interval& iv, const TimeGrid& grid,
                                     int t_index);

// Quantitative semantics. Throws on unknown dimensions and on temporal
// operators whose clipped index set is empty (horizon too short).
double robustness(const FormulaPtr& f, const Trace& trace, int t_index);

// Boolean semantics: robustness >= 0 (zero counts as satisfied).
bool satisfies(const FormulaPtr& f, const Trace& trace, int t_index);

}  // namespace stlmpc
