// Abstract syntax tree for the STL fragment used by the planner:
// predicates over named signal dimensions, boolean connectives, and the
// bounded temporal operators F_[a,b] / G_[a,b].
//
// Formulas are immutable trees shared through shared_ptr; all evaluation
// helpers are free functions (see robustness.hpp).

#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace stlmpc {

// Uniform sampling grid. Sample k corresponds to time k*dt.
struct TimeGrid {
  double dt = 0.0;
  int steps = 0;

  TimeGrid() = default;
  TimeGrid(double dt_, int steps_) : dt(dt_), steps(steps_) {
    if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("TimeGrid: steps must be >= 1");
  }

  double horizon() const { return (steps - 1) * dt; }
  bool operator==(const TimeGrid& o) const {
    return dt == o.dt && steps == o.steps;
  }
};

// Sampled vector-valued signal. values is steps x dims.size().
struct Trace {
  TimeGrid grid;
  std::vector<std::string> dims;
  Eigen::MatrixXd values;

  Trace() = default;
  Trace(TimeGrid g, std::vector<std::string> d)
      : grid(g), dims(std::move(d)),
        values(Eigen::MatrixXd::Zero(g.steps, static_cast<int>(dims.size()))) {
    for (std::size_t i = 0; i < dims.size(); ++i)
      for (std::size_t j = i + 1; j < dims.size(); ++j)
        if (dims[i] == dims[j])
          throw std::invalid_argument("Trace: duplicate dimension " + dims[i]);
  }

  int dim_index(const std::string& name) const {
    for (std::size_t i = 0; i < dims.size(); ++i)
      if (dims[i] == name) return static_cast<int>(i);
    return -1;
  }
  bool has_dim(const std::string& name) const { return dim_index(name) >= 0; }

  double at(int step, const std::string& name) const {
    int j = dim_index(name);
    if (j < 0) throw std::runtime_error("Trace: unknown dimension " + name);
    return values(step, j);
  }
};

// Affine predicate  l(S(t)) = coeffs . S(t) + offset >= 0.
struct Predicate {
  std::map<std::string, double> coeffs;
  double offset = 0.0;

  double eval(const Trace& tr, int step) const {
    double v = offset;
    for (const auto& [name, c] : coeffs) v += c * tr.at(step, name);
    return v;
  }

  Predicate negated() const {
    Predicate p;
    for (const auto& [name, c] : coeffs) p.coeffs[name] = -c;
    p.offset = -offset;
    return p;
  }
};

struct Interval {
  double a = 0.0;
  double b = 0.0;

  Interval() = default;
  Interval(double a_, double b_) : a(a_), b(b_) {
    if (a < 0.0 || a > b)
      throw std::invalid_argument("Interval: requires 0 <= a <= b");
  }
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  enum class Kind { True, Pred, Not, And, Or, Eventually, Always };

  Kind kind = Kind::True;
  Predicate pred;         // Kind::Pred
  Interval interval;      // Eventually / Always
  FormulaPtr lhs, rhs;    // children (rhs only for And/Or)
};

inline FormulaPtr f_true() {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::True;
  return f;
}
inline FormulaPtr f_pred(Predicate p) {
  auto f = std::make_shared<Formula>();
  f->kind = Formula::Kind::Pred;
  f->pred = std::move(p);
  return f;
}
// coeff * dim + offset >= 0
inline FormulaPtr f_pred(const std::string& dim, double coeff, double offset) {
  Predicate p;
  p.coeffs[dim] = coeff;
  p.offset = offset;
  return f_pred(std::move(p));
}
inline FormulaPtr f_not(FormulaPtr f) {
  auto r = std::make_shared<Formula>();
  r->kind = Formula::Kind::Not;
  r->lhs = std::move(f);
  return r;
}
inline FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
  auto r = std::make_shared<Formula>();
  r->kind = Formula::Kind::And;
  r->lhs = std::move(a);
  r->rhs = std::move(b);
  return r;
}
inline FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
  auto r = std::make_shared<Formula>();
  r->kind = Formula::Kind::Or;
  r->lhs = std::move(a);
  r->rhs = std::move(b);
  return r;
}
inline FormulaPtr f_eventually(Interval iv, FormulaPtr f) {
  auto r = std::make_shared<Formula>();
  r->kind = Formula::Kind::Eventually;
  r->interval = iv;
  r->lhs = std::move(f);
  return r;
}
inline FormulaPtr f_always(Interval iv, FormulaPtr f) {
  auto r = std::make_shared<Formula>();
  r->kind = Formula::Kind::Always;
  r->interval = iv;
  r->lhs = std::move(f);
  return r;
}

// n-ary conveniences (left-assoc chains).
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);
FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs);

// Grammar-compatible text rendering; parse(to_text(f)) is structurally
// equal to f.
std::string to_text(const FormulaPtr& f);

// Structural equality (exact coefficient comparison).
bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b);

// Negation normal form: negations pushed onto predicates (l -> -l).
// Not(True) becomes the predicate "constant -inf" stand-in is not
// representable, so it is kept as Not(True); callers that require pure
// NNF over predicates must not feed True under Not.
FormulaPtr to_nnf(const FormulaPtr& f, bool negate = false);

// All dimension names referenced by predicates in f.
std::vector<std::string> collect_dims(const FormulaPtr& f);

}  // namespace stlmpc
