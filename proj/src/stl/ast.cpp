#include "stlmpc/stl/ast.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace stlmpc {

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) throw std::invalid_argument("f_and_all: empty list");
  FormulaPtr acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
  return acc;
}

FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs) {
  if (fs.empty()) throw std::invalid_argument("f_or_all: empty list");
  FormulaPtr acc = fs[0];
  for (std::size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
  return acc;
}

namespace {

void format_number(std::ostringstream& os, double v) {
  std::ostringstream tmp;
  tmp.precision(17);
  tmp << v;
  os << tmp.str();
}

// Render "coeffs . S + offset >= 0" as a linexpr atom.
void print_pred(std::ostringstream& os, const Predicate& p) {
  bool first = true;
  for (const auto& [name, c] : p.coeffs) {
    if (c == 0.0) continue;
    if (first) {
      if (c == 1.0) {
        os << name;
      } else if (c == -1.0) {
        os << "-" << name;
      } else {
        format_number(os, c);
        os << "*" << name;
      }
      first = false;
    } else {
      os << (c < 0.0 ? " - " : " + ");
      double a = std::abs(c);
      if (a == 1.0) {
        os << name;
      } else {
        format_number(os, a);
        os << "*" << name;
      }
    }
  }
  if (first) {
    // constant predicate
    format_number(os, p.offset);
    os << " >= 0";
    return;
  }
  if (p.offset != 0.0) {
    os << (p.offset < 0.0 ? " - " : " + ");
    format_number(os, std::abs(p.offset));
  }
  os << " >= 0";
}

void print(std::ostringstream& os, const FormulaPtr& f) {
  switch (f->kind) {
    case Formula::Kind::True:
      os << "true";
      break;
    case Formula::Kind::Pred:
      os << "(";
      print_pred(os, f->pred);
      os << ")";
      break;
    case Formula::Kind::Not:
      os << "not ";
      print(os, f->lhs);
      break;
    case Formula::Kind::And:
      os << "(";
      print(os, f->lhs);
      os << " and ";
      print(os, f->rhs);
      os << ")";
      break;
    case Formula::Kind::Or:
      os << "(";
      print(os, f->lhs);
      os << " or ";
      print(os, f->rhs);
      os << ")";
      break;
    case Formula::Kind::Eventually:
    case Formula::Kind::Always:
      os << (f->kind == Formula::Kind::Eventually ? "F[" : "G[");
      format_number(os, f->interval.a);
      os << ",";
      format_number(os, f->interval.b);
      os << "](";
      print(os, f->lhs);
      os << ")";
      break;
  }
}

}  // namespace

std::string to_text(const FormulaPtr& f) {
  std::ostringstream os;
  print(os, f);
  return os.str();
}

bool structurally_equal(const FormulaPtr& a, const FormulaPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Formula::Kind::True:
      return true;
    case Formula::Kind::Pred: {
      if (a->pred.offset != b->pred.offset) return false;
      return a->pred.coeffs == b->pred.coeffs;
    }
    case Formula::Kind::Not:
      return structurally_equal(a->lhs, b->lhs);
    case Formula::Kind::And:
    case Formula::Kind::Or:
      return structurally_equal(a->lhs, b->lhs) &&
             structurally_equal(a->rhs, b->rhs);
    case Formula::Kind::Eventually:
    case Formula::Kind::Always:
      return a->interval.a == b->interval.a && a->interval.b == b->interval.b &&
             structurally_equal(a->lhs, b->lhs);
  }
  return false;
}

FormulaPtr to_nnf(const FormulaPtr& f, bool negate) {
  // Positive subtrees that are already in NNF come back as the same
  // node, so downstream structures keyed on node identity (e.g. the
  // MILP encoder cache) can share work across formulas with common
  // subtrees.
  switch (f->kind) {
    case Formula::Kind::True:
      return negate ? f_not(f_true()) : f;
    case Formula::Kind::Pred:
      return negate ? f_pred(f->pred.negated()) : f;
    case Formula::Kind::Not:
      return to_nnf(f->lhs, !negate);
    case Formula::Kind::And: {
      if (negate) return f_or(to_nnf(f->lhs, true), to_nnf(f->rhs, true));
      auto l = to_nnf(f->lhs, false), r = to_nnf(f->rhs, false);
      return (l == f->lhs && r == f->rhs) ? f : f_and(std::move(l), std::move(r));
    }
    case Formula::Kind::Or: {
      if (negate) return f_and(to_nnf(f->lhs, true), to_nnf(f->rhs, true));
      auto l = to_nnf(f->lhs, false), r = to_nnf(f->rhs, false);
      return (l == f->lhs && r == f->rhs) ? f : f_or(std::move(l), std::move(r));
    }
    case Formula::Kind::Eventually: {
      if (negate) return f_always(f->interval, to_nnf(f->lhs, true));
      auto l = to_nnf(f->lhs, false);
      return l == f->lhs ? f : f_eventually(f->interval, std::move(l));
    }
    case Formula::Kind::Always: {
      if (negate) return f_eventually(f->interval, to_nnf(f->lhs, true));
      auto l = to_nnf(f->lhs, false);
      return l == f->lhs ? f : f_always(f->interval, std::move(l));
    }
  }
  throw std::logic_error("to_nnf: unreachable");
}

namespace {
void collect(const FormulaPtr& f, std::set<std::string>& out) {
  switch (f->kind) {
    case Formula::Kind::True:
      return;
    case Formula::Kind::Pred:
      for (const auto& [name, c] : f->pred.coeffs) {
        (void)c;
        out.insert(name);
      }
      return;
    default:
      if (f->lhs) collect(f->lhs, out);
      if (f->rhs) collect(f->rhs, out);
  }
}
}  // namespace

std::vector<std::string> collect_dims(const FormulaPtr& f) {
  std::set<std::string> s;
  collect(f, s);
  return {s.begin(), s.end()};
}

}  // namespace stlmpc
