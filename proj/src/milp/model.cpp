#include "stlmpc/milp/model.hpp"

#include <algorithm>
#include <iomanip>

namespace stlmpc {

double MilpModel::max_violation(const std::vector<double>& values) const {
  if (values.size() != vars_.size())
    throw std::invalid_argument("max_violation: wrong vector length");
  double viol = 0.0;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    viol = std::max(viol, vars_[i].lower - values[i]);
    viol = std::max(viol, values[i] - vars_[i].upper);
  }
  for (const auto& c : cons_) {
    double v = c.expr.eval(values);
    switch (c.rel) {
      case Relation::Le: viol = std::max(viol, v - c.rhs); break;
      case Relation::Ge: viol = std::max(viol, c.rhs - v); break;
      case Relation::Eq: viol = std::max(viol, std::abs(v - c.rhs)); break;
    }
  }
  return viol;
}

namespace {
void write_expr(std::ostream& os, const LinExpr& e,
                const std::vector<VarInfo>& vars) {
  bool first = true;
  for (const auto& [id, c] : e.terms()) {
    if (c == 0.0) continue;
    if (first) {
      os << c << " " << vars[static_cast<std::size_t>(id)].name;
      first = false;
    } else {
      os << (c < 0 ? " - " : " + ") << std::abs(c) << " "
         << vars[static_cast<std::size_t>(id)].name;
    }
  }
  if (first) os << "0 " << vars[0].name;
}
}  // namespace

void MilpModel::write_lp(std::ostream& os) const {
  os << std::setprecision(17);
  os << (sense_ == ObjSense::Minimize ? "Minimize\n" : "Maximize\n");
  os << " obj: ";
  write_expr(os, objective_, vars_);
  os << "\nSubject To\n";
  for (const auto& c : cons_) {
    os << " " << c.name << ": ";
    write_expr(os, c.expr, vars_);
    switch (c.rel) {
      case Relation::Le: os << " <= "; break;
      case Relation::Ge: os << " >= "; break;
      case Relation::Eq: os << " = "; break;
    }
    os << c.rhs - c.expr.constant() << "\n";
  }
  os << "Bounds\n";
  for (const auto& v : vars_) {
    if (v.lower == -kInf && v.upper == kInf) {
      os << " " << v.name << " free\n";
    } else {
      os << " ";
      if (v.lower == -kInf)
        os << "-inf";
      else
        os << v.lower;
      os << " <= " << v.name << " <= ";
      if (v.upper == kInf)
        os << "+inf";
      else
        os << v.upper;
      os << "\n";
    }
  }
  bool any_bin = std::any_of(vars_.begin(), vars_.end(), [](const VarInfo& v) {
    return v.kind == VarKind::Binary;
  });
  if (any_bin) {
    os << "Binaries\n";
    for (const auto& v : vars_)
      if (v.kind == VarKind::Binary) os << " " << v.name << "\n";
  }
  os << "End\n";
}

}  // namespace stlmpc
