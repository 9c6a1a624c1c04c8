#include "stlmpc/stl/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlmpc {

std::vector<int> interval_to_indices(const Interval& iv, const TimeGrid& grid,
                                     int t_index) {
  if (t_index < 0 || t_index >= grid.steps)
    throw std::out_of_range("interval_to_indices: t_index out of range");
  constexpr double kEps = 1e-9;
  int lo = t_index + static_cast<int>(std::ceil(iv.a / grid.dt - kEps));
  int hi = t_index + static_cast<int>(std::floor(iv.b / grid.dt + kEps));
  hi = std::min(hi, grid.steps - 1);
  std::vector<int> out;
  for (int k = std::max(lo, 0); k <= hi; ++k) out.push_back(k);
  return out;
}

double robustness(const FormulaPtr& f, const Trace& trace, int t_index) {
  switch (f->kind) {
    case Formula::Kind::True:
      return std::numeric_limits<double>::infinity();
    case Formula::Kind::Pred:
      return f->pred.eval(trace, t_index);
    case Formula::Kind::Not:
      return -robustness(f->lhs, trace, t_index);
    case Formula::Kind::And:
      return std::min(robustness(f->lhs, trace, t_index),
                      robustness(f->rhs, trace, t_index));
    case Formula::Kind::Or:
      return std::max(robustness(f->lhs, trace, t_index),
                      robustness(f->rhs, trace, t_index));
    case Formula::Kind::Always:
    case Formula::Kind::Eventually: {
      const auto idx = interval_to_indices(f->interval, trace.grid, t_index);
      if (idx.empty())
        throw std::runtime_error(
            "robustness: temporal interval lies beyond the trace horizon");
      double acc = robustness(f->lhs, trace, idx[0]);
      for (std::size_t i = 1; i < idx.size(); ++i) {
        double r = robustness(f->lhs, trace, idx[i]);
        acc = (f->kind == Formula::Kind::Always) ? std::min(acc, r)
                                                 : std::max(acc, r);
      }
      return acc;
    }
  }
  throw std::logic_error("robustness: unreachable");
}

bool satisfies(const FormulaPtr& f, const Trace& trace, int t_index) {
  return robustness(f, trace, t_index) >= 0.0;
}

}  // namespace stlmpc
