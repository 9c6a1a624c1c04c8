#include "stlmpc/milp/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlmpc {

namespace {
constexpr double kPruneTol = 1e-9;

struct Ranges {
  std::vector<std::pair<double, double>> r;
  double min_lo = kInf, min_hi = kInf, max_lo = -kInf, max_hi = -kInf;
};

Ranges compute_ranges(const MilpModel& m, const std::vector<LinExpr>& exprs,
                      double big_M) {
  Ranges out;
  out.r.reserve(exprs.size());
  for (const auto& e : exprs) {
    auto [lo, hi] = m.expr_range(e);
    out.r.push_back({lo, hi});
    out.min_lo = std::min(out.min_lo, lo);
    out.min_hi = std::min(out.min_hi, hi);
    out.max_lo = std::max(out.max_lo, lo);
    out.max_hi = std::max(out.max_hi, hi);
  }
  if (!(out.max_hi - out.min_lo <= big_M))
    throw std::runtime_error(
        "encoder: big-M audit failed, operand spread " +
        std::to_string(out.max_hi - out.min_lo) + " exceeds big_M " +
        std::to_string(big_M));
  return out;
}
}  // namespace

void EncoderContext::repair(std::vector<double>& values) const {
  for (const auto& g : gadgets) {
    double ext = g.is_min ? kInf : -kInf;
    for (const auto& e : g.exprs) {
      double v = e.eval(values);
      ext = g.is_min ? std::min(ext, v) : std::max(ext, v);
    }
    values[static_cast<std::size_t>(g.r.id)] = ext;
    bool chosen = false;
    for (std::size_t i = 0; i < g.exprs.size(); ++i) {
      if (!g.selectors[i].valid()) continue;
      double v = g.exprs[i].eval(values);
      bool pick = !chosen && v == ext;
      values[static_cast<std::size_t>(g.selectors[i].id)] = pick ? 1.0 : 0.0;
      chosen = chosen || pick;
    }
    // With pruned selectors and tolerance-tight ranges the exact
    // arg-extremum is always selectable; if floating-point drift ever
    // breaks that, pick the closest surviving operand.
    if (!chosen) {
      double best = kInf;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < g.exprs.size(); ++i) {
        if (!g.selectors[i].valid()) continue;
        double d = std::abs(g.exprs[i].eval(values) - ext);
        if (d < best) {
          best = d;
          best_i = i;
        }
      }
      if (std::isfinite(best))
        values[static_cast<std::size_t>(g.selectors[best_i].id)] = 1.0;
    }
  }
}

namespace {

VarRef encode_extremum(MilpModel& m, const std::vector<LinExpr>& exprs,
                       const SolverConfig& cfg, EncoderContext& ctx,
                       bool is_min) {
  if (exprs.empty())
    throw std::invalid_argument("encode_min/max: need at least one operand");
  const Ranges rg = compute_ranges(m, exprs, cfg.big_M);

  if (exprs.size() == 1) {
    VarRef r = m.add_var(VarKind::Continuous, rg.r[0].first, rg.r[0].second);
    m.add_constraint(LinExpr(r) - exprs[0], Relation::Eq, 0.0);
    ctx.gadgets.push_back({is_min, r, exprs, {VarRef{}}});
    return r;
  }

  const double r_lo = is_min ? rg.min_lo : rg.max_lo;
  const double r_hi = is_min ? rg.min_hi : rg.max_hi;
  VarRef r = m.add_var(VarKind::Continuous, r_lo, r_hi);

  // Selector pruning: operand i can attain the extremum only if its range
  // reaches past every other operand's best case.
  std::vector<std::size_t> survivors;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    bool can = is_min ? rg.r[i].first <= rg.min_hi + kPruneTol
                      : rg.r[i].second >= rg.max_lo - kPruneTol;
    if (can) survivors.push_back(i);
  }

  std::vector<VarRef> selectors(exprs.size());
  const double M = cfg.big_M;
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    // one-sided rows, binary-free
    LinExpr diff = LinExpr(r) - exprs[i];
    m.add_constraint(diff, is_min ? Relation::Le : Relation::Ge, 0.0);
  }
  if (survivors.size() == 1) {
    const std::size_t s = survivors[0];
    m.add_constraint(LinExpr(r) - exprs[s], Relation::Eq, 0.0);
  } else {
    LinExpr cover;
    for (std::size_t i : survivors) {
      VarRef z = m.add_var(VarKind::Binary, 0.0, 1.0);
      selectors[i] = z;
      cover += LinExpr(z);
      // r >= e_i - M_i(1-z_i)   (min)  /  r <= e_i + M_i(1-z_i)  (max)
      // with the smallest valid per-operand constant; tight M_i values
      // keep the LP relaxation strong.
      const double Mi = std::min(
          M, std::max(0.0, is_min ? rg.r[i].second - r_lo
                                  : r_hi - rg.r[i].first));
      LinExpr row = LinExpr(r) - exprs[i];
      if (is_min) {
        row -= LinExpr::term(z, Mi);
        m.add_constraint(row, Relation::Ge, -Mi);
      } else {
        row += LinExpr::term(z, Mi);
        m.add_constraint(row, Relation::Le, Mi);
      }
    }
    m.add_constraint(cover, Relation::Eq, 1.0);
  }
  ctx.gadgets.push_back({is_min, r, exprs, std::move(selectors)});
  return r;
}

}  // namespace

VarRef encode_min(MilpModel& m, const std::vector<LinExpr>& exprs,
                  const SolverConfig& cfg, EncoderContext& ctx) {
  return encode_extremum(m, exprs, cfg, ctx, true);
}

VarRef encode_max(MilpModel& m, const std::vector<LinExpr>& exprs,
                  const SolverConfig& cfg, EncoderContext& ctx) {
  return encode_extremum(m, exprs, cfg, ctx, false);
}

LinExpr RobustnessEncoder::encode_expr(const FormulaPtr& f, int t_index) {
  auto it = nnf_of_.find(f.get());
  if (it == nnf_of_.end())
    it = nnf_of_.emplace(f.get(), to_nnf(f)).first;
  return encode_nnf(it->second, t_index);
}

VarRef RobustnessEncoder::encode(const FormulaPtr& f, int t_index) {
  LinExpr e = encode_expr(f, t_index);
  // already a bare variable?
  if (e.constant() == 0.0 && e.terms().size() == 1 &&
      e.terms().begin()->second == 1.0)
    return VarRef{e.terms().begin()->first};
  auto [lo, hi] = model_.expr_range(e);
  VarRef r = model_.add_var(VarKind::Continuous, lo, hi);
  model_.add_constraint(LinExpr(r) - e, Relation::Eq, 0.0);
  return r;
}

LinExpr RobustnessEncoder::encode_nnf(const FormulaPtr& f, int t_index) {
  const auto key = std::make_pair(f.get(), t_index);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;

  LinExpr result;
  switch (f->kind) {
    case Formula::Kind::True:
      result = LinExpr(cfg_.big_M);
      break;
    case Formula::Kind::Not:
      if (f->lhs->kind != Formula::Kind::True)
        throw std::logic_error("encoder: non-NNF negation");
      result = LinExpr(-cfg_.big_M);
      break;
    case Formula::Kind::Pred: {
      if (t_index < 0 || t_index >= trace_.grid.steps)
        throw std::out_of_range("encoder: sample index outside horizon");
      result = LinExpr(f->pred.offset);
      for (const auto& [name, c] : f->pred.coeffs)
        result += c * trace_.dim(name)[static_cast<std::size_t>(t_index)];
      break;
    }
    case Formula::Kind::And:
    case Formula::Kind::Always:
      result = encode_gadget(f, t_index, true);
      break;
    case Formula::Kind::Or:
    case Formula::Kind::Eventually:
      result = encode_gadget(f, t_index, false);
      break;
  }
  cache_.emplace(key, result);
  return result;
}

LinExpr RobustnessEncoder::encode_gadget(const FormulaPtr& f, int t_index,
                                         bool want_min) {
  std::vector<LinExpr> ops;
  collect_operands(f, t_index, want_min, ops);
  // True / Not(True) encode as the saturation constants +-big_M; they
  // behave exactly like +-inf here: neutral operands are dropped,
  // dominant ones decide the gadget outright.
  const double sat = cfg_.big_M;
  std::vector<LinExpr> kept;
  for (const auto& e : ops) {
    const bool is_const = e.terms().empty();
    if (is_const && ((want_min && e.constant() >= sat) ||
                     (!want_min && e.constant() <= -sat)))
      continue;  // neutral
    if (is_const && ((want_min && e.constant() <= -sat) ||
                     (!want_min && e.constant() >= sat)))
      return LinExpr(want_min ? -sat : sat);  // dominant
    kept.push_back(e);
  }
  if (kept.empty()) return LinExpr(want_min ? sat : -sat);
  if (kept.size() == 1) return kept[0];
  return LinExpr(want_min ? encode_min(model_, kept, cfg_, ctx_)
                          : encode_max(model_, kept, cfg_, ctx_));
}

void RobustnessEncoder::collect_operands(const FormulaPtr& f, int t_index,
                                         bool want_min,
                                         std::vector<LinExpr>& out) {
  if ((f->kind == Formula::Kind::And && want_min) ||
      (f->kind == Formula::Kind::Or && !want_min)) {
    collect_operands(f->lhs, t_index, want_min, out);
    collect_operands(f->rhs, t_index, want_min, out);
    return;
  }
  if ((f->kind == Formula::Kind::Always && want_min) ||
      (f->kind == Formula::Kind::Eventually && !want_min)) {
    const auto idx = interval_to_indices(f->interval, trace_.grid, t_index);
    if (idx.empty())
      throw std::runtime_error(
          "encoder: temporal interval lies beyond the horizon");
    for (int k : idx) collect_operands(f->lhs, k, want_min, out);
    return;
  }
  out.push_back(encode_nnf(f, t_index));
}

VarRef encode_robustness(MilpModel& m, const FormulaPtr& f,
                         const std::vector<std::vector<VarRef>>& state_vars,
                         const std::vector<std::string>& dim_names,
                         const TimeGrid& grid, int t_index,
                         const SolverConfig& cfg, EncoderContext& ctx) {
  if (state_vars.size() != static_cast<std::size_t>(grid.steps))
    throw std::invalid_argument("encode_robustness: state grid size mismatch");
  VarTrace tr;
  tr.grid = grid;
  for (std::size_t d = 0; d < dim_names.size(); ++d) {
    std::vector<LinExpr> col;
    col.reserve(state_vars.size());
    for (const auto& row : state_vars) {
      if (row.size() != dim_names.size())
        throw std::invalid_argument("encode_robustness: ragged state grid");
      col.push_back(LinExpr(row[d]));
    }
    tr.dims[dim_names[d]] = std::move(col);
  }
  RobustnessEncoder enc(m, std::move(tr), cfg, ctx);
  return enc.encode(f, t_index);
}

}  // namespace stlmpc
