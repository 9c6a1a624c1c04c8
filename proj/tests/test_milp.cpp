#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "stlmpc/milp/encoder.hpp"
#include "stlmpc/milp/simplex.hpp"
#include "stlmpc/milp/solver.hpp"
#include "stlmpc/stl/parser.hpp"
#include "stlmpc/stl/robustness.hpp"

using namespace stlmpc;

namespace {

SimplexLp::Result solve_dense(SimplexLp& lp, const oracle::DenseLp& d) {
  const int n = static_cast<int>(d.c.size());
  const int m = static_cast<int>(d.b.size());
  std::vector<SimplexLp::SparseCol> cols(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i)
      if (d.A(i, j) != 0.0) cols[static_cast<std::size_t>(j)].push_back({i, d.A(i, j)});
  lp.set_structure(m, std::move(cols));
  Eigen::VectorXd rlo = Eigen::VectorXd::Constant(m, -kInf);
  return lp.solve(d.lo, d.hi, rlo, d.b, d.c);
}

}  // namespace

TEST_CASE("simplex agrees with vertex enumeration on random bounded LPs") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> nd(2, 4), md(1, 5);
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = nd(rng), m = md(rng);
    oracle::DenseLp d;
    d.A.resize(m, n);
    d.b.resize(m);
    d.c.resize(n);
    d.lo = Eigen::VectorXd::Constant(n, -3.0);
    d.hi = Eigen::VectorXd::Constant(n, 3.0);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) d.A(i, j) = u(rng);
      d.b[i] = u(rng);
    }
    for (int j = 0; j < n; ++j) d.c[j] = u(rng);

    auto exp = oracle::lp_by_enumeration(d);
    SimplexLp lp;
    auto got = solve_dense(lp, d);
    CAPTURE(trial);
    if (exp) {
      REQUIRE(got.status == LpStatus::Optimal);
      CHECK(got.objective == doctest::Approx(exp->objective).epsilon(1e-7));
      ++feasible;
    } else {
      CHECK(got.status == LpStatus::Infeasible);
      ++infeasible;
    }
  }
  // both branches exercised
  CHECK(feasible > 50);
  CHECK(infeasible > 20);
}

TEST_CASE("simplex detects unboundedness") {
  oracle::DenseLp d;
  d.A.resize(1, 2);
  d.A << 1.0, 1.0;
  d.b.resize(1);
  d.b << 4.0;
  d.lo = Eigen::VectorXd::Constant(2, -kInf);
  d.hi = Eigen::VectorXd::Constant(2, kInf);
  d.c.resize(2);
  d.c << 1.0, 0.0;  // x0 can go to -inf
  SimplexLp lp;
  CHECK(solve_dense(lp, d).status == LpStatus::Unbounded);
}

TEST_CASE("simplex warm start after bound and cost changes") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  oracle::DenseLp d;
  const int n = 4, m = 4;
  d.A.resize(m, n);
  d.b.resize(m);
  d.c.resize(n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) d.A(i, j) = u(rng);
    d.b[i] = 1.0 + std::abs(u(rng));
  }
  d.lo = Eigen::VectorXd::Constant(n, -2.0);
  d.hi = Eigen::VectorXd::Constant(n, 2.0);
  for (int j = 0; j < n; ++j) d.c[j] = u(rng);

  SimplexLp lp;
  auto first = solve_dense(lp, d);
  REQUIRE(first.status == LpStatus::Optimal);
  for (int round = 0; round < 20; ++round) {
    for (int j = 0; j < n; ++j) d.c[j] = u(rng);
    d.b[round % m] = 0.5 + std::abs(u(rng));
    Eigen::VectorXd rlo = Eigen::VectorXd::Constant(m, -kInf);
    auto warm = lp.solve(d.lo, d.hi, rlo, d.b, d.c);
    auto exp = oracle::lp_by_enumeration(d);
    REQUIRE(exp.has_value());
    REQUIRE(warm.status == LpStatus::Optimal);
    CHECK(warm.objective == doctest::Approx(exp->objective).epsilon(1e-7));
  }
}

TEST_CASE("model utilities: expr_range, max_violation, write_lp") {
  MilpModel m;
  auto x = m.add_var(VarKind::Continuous, -1.0, 2.0, "x");
  auto y = m.add_var(VarKind::Continuous, 0.0, 3.0, "y");
  auto z = m.add_var(VarKind::Binary, 0, 1, "z");

  auto e = LinExpr::term(x, 2.0) + LinExpr::term(y, -1.0) + 0.5;
  auto [lo, hi] = m.expr_range(e);
  CHECK(lo == doctest::Approx(-4.5));
  CHECK(hi == doctest::Approx(4.5));

  m.add_constraint(LinExpr(x) + LinExpr(y), Relation::Le, 2.0);
  m.add_constraint(LinExpr(x) - LinExpr(z), Relation::Eq, 0.0);
  CHECK(m.max_violation({1.0, 1.0, 1.0}) == doctest::Approx(0.0));
  CHECK(m.max_violation({1.0, 2.0, 0.0}) == doctest::Approx(1.0));
  CHECK(m.max_violation({-2.0, 0.0, 0.0}) == doctest::Approx(2.0));

  std::ostringstream os;
  m.write_lp(os);
  CHECK(os.str().find("x") != std::string::npos);

  CHECK_THROWS(m.add_var(VarKind::Continuous, 2.0, 1.0));
  CHECK_THROWS(m.set_var_bounds(x, 5.0, 4.0));
  CHECK_THROWS(m.set_constraint_rhs(99, 0.0));
}

TEST_CASE("branch and bound: knapsack optimum") {
  MilpModel m;
  auto x1 = m.add_var(VarKind::Binary, 0, 1);
  auto x2 = m.add_var(VarKind::Binary, 0, 1);
  auto x3 = m.add_var(VarKind::Binary, 0, 1);
  m.add_constraint(2.0 * LinExpr(x1) + 3.0 * LinExpr(x2) + LinExpr(x3),
                   Relation::Le, 5.0);
  m.set_objective(ObjSense::Maximize,
                  5.0 * LinExpr(x1) + 4.0 * LinExpr(x2) + 3.0 * LinExpr(x3));
  auto sol = solve(m);
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(9.0));
  CHECK(sol.value(x1) == doctest::Approx(1.0));
  CHECK(sol.value(x2) == doctest::Approx(1.0));
  CHECK(sol.value(x3) == doctest::Approx(0.0));
}

TEST_CASE("branch and bound agrees with binary enumeration on random MILPs") {
  std::mt19937 rng(777);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_int_distribution<int> nb(1, 6), nc(1, 3), mr(1, 5);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 120; ++trial) {
    MilpModel m;
    const int k = nb(rng), c = nc(rng), rows = mr(rng);
    std::vector<VarRef> vars;
    for (int j = 0; j < k; ++j) vars.push_back(m.add_var(VarKind::Binary, 0, 1));
    for (int j = 0; j < c; ++j)
      vars.push_back(m.add_var(VarKind::Continuous, -2.0, 2.0));
    for (int i = 0; i < rows; ++i) {
      LinExpr e;
      for (auto v : vars) e += u(rng) * LinExpr(v);
      double rhs = u(rng);
      Relation rel = (i % 3 == 0) ? Relation::Ge
                     : (i % 3 == 1) ? Relation::Le
                                    : Relation::Eq;
      if (rel == Relation::Eq) rhs = std::abs(rhs) * 0.5;
      m.add_constraint(std::move(e), rel, rhs);
    }
    LinExpr obj;
    for (auto v : vars) obj += u(rng) * LinExpr(v);
    m.set_objective(trial % 2 ? ObjSense::Minimize : ObjSense::Maximize, obj);

    auto exp = oracle::milp_by_enumeration(m);
    auto got = solve(m);
    CAPTURE(trial);
    REQUIRE(got.status == exp.status);
    if (exp.status == MilpStatus::Optimal) {
      CHECK(got.objective_value == doctest::Approx(exp.objective).epsilon(1e-6));
      CHECK(m.max_violation(got.values) < 1e-6);
      ++optimal;
    } else {
      ++infeasible;
    }
  }
  CHECK(optimal > 40);
  CHECK(infeasible > 5);
}

TEST_CASE("encode_min / encode_max basic gadgets") {
  MilpModel m;
  auto x = m.add_var(VarKind::Continuous, -5.0, 5.0, "x");
  auto y = m.add_var(VarKind::Continuous, -5.0, 5.0, "y");
  m.add_constraint(LinExpr(x), Relation::Eq, 2.0);
  m.add_constraint(LinExpr(y), Relation::Eq, -1.0);
  SolverConfig cfg;
  cfg.big_M = 100.0;
  EncoderContext ctx;
  auto rmin = encode_min(m, {LinExpr(x), LinExpr(y) + 1.5}, cfg, ctx);
  auto rmax = encode_max(m, {LinExpr(x), LinExpr(y) + 1.5}, cfg, ctx);
  m.set_objective(ObjSense::Minimize, LinExpr(0.0));
  SolverConfig scfg;
  scfg.big_M = 100.0;
  scfg.repair = [&ctx](std::vector<double>& v) { ctx.repair(v); };
  auto sol = solve(m, scfg);
  REQUIRE(sol.status == MilpStatus::Optimal);
  CHECK(sol.value(rmin) == doctest::Approx(0.5));
  CHECK(sol.value(rmax) == doctest::Approx(2.0));
}

TEST_CASE("encoder prunes selectors with disjoint operand ranges") {
  MilpModel m;
  auto x = m.add_var(VarKind::Continuous, 0.0, 1.0);   // always smaller
  auto y = m.add_var(VarKind::Continuous, 5.0, 9.0);
  SolverConfig cfg;
  cfg.big_M = 100.0;
  EncoderContext ctx;
  encode_min(m, {LinExpr(x), LinExpr(y)}, cfg, ctx);
  // single survivor -> no binaries at all
  for (int j = 0; j < m.num_vars(); ++j)
    CHECK(m.var(j).kind == VarKind::Continuous);
  REQUIRE(ctx.gadgets.size() == 1);
  CHECK_FALSE(ctx.gadgets[0].selectors[1].valid());
}

TEST_CASE("big-M audit rejects oversized operand spreads") {
  MilpModel m;
  auto x = m.add_var(VarKind::Continuous, -500.0, 500.0);
  auto y = m.add_var(VarKind::Continuous, -500.0, 500.0);
  SolverConfig cfg;
  cfg.big_M = 100.0;
  EncoderContext ctx;
  CHECK_THROWS_AS(encode_min(m, {LinExpr(x), LinExpr(y)}, cfg, ctx),
                  std::runtime_error);
}

TEST_CASE("robustness encoding matches the monitor on random formulas") {
  std::mt19937 rng(31337);
  TimeGrid grid(0.2, 7);
  const std::vector<std::string> dims{"x", "y"};
  oracle::FormulaGen gen{dims, grid.horizon(), 3, true};

  int checked = 0;
  while (checked < 220) {
    auto f = gen(rng);
    auto tr = oracle::random_trace(rng, grid, dims, 4.0);

    double rho;
    try {
      rho = robustness(f, tr, 0);
    } catch (const std::runtime_error&) {
      continue;
    }
    const double clip = 1e3;
    const double expect = std::min(std::max(rho, -clip), clip);

    MilpModel m;
    VarTrace vt;
    vt.grid = grid;
    for (std::size_t d = 0; d < dims.size(); ++d) {
      std::vector<LinExpr> col;
      for (int k = 0; k < grid.steps; ++k) {
        auto v = m.add_var(VarKind::Continuous, -6.0, 6.0);
        m.add_constraint(LinExpr(v), Relation::Eq, tr.values(k, static_cast<int>(d)));
        col.push_back(LinExpr(v));
      }
      vt.dims[dims[d]] = std::move(col);
    }
    SolverConfig cfg;
    cfg.big_M = clip;
    EncoderContext ctx;
    RobustnessEncoder enc(m, vt, cfg, ctx);
    VarRef r = enc.encode(f, 0);
    m.set_objective(ObjSense::Minimize, LinExpr(0.0));
    SolverConfig scfg = cfg;
    scfg.repair = [&ctx](std::vector<double>& v) { ctx.repair(v); };
    auto sol = solve(m, scfg);
    CAPTURE(to_text(f));
    REQUIRE(sol.status == MilpStatus::Optimal);
    CHECK(sol.value(r) == doctest::Approx(expect).epsilon(1e-9));
    ++checked;
  }
}

TEST_CASE("encoding of a bare predicate stays affine") {
  MilpModel m;
  auto v = m.add_var(VarKind::Continuous, -2.0, 2.0, "v");
  VarTrace vt;
  vt.grid = TimeGrid(0.2, 1);
  vt.dims["v"] = {LinExpr(v)};
  SolverConfig cfg;
  EncoderContext ctx;
  RobustnessEncoder enc(m, vt, cfg, ctx);
  VarRef r = enc.encode(parse_formula("v - 1 >= 0"), 0);
  for (int j = 0; j < m.num_vars(); ++j)
    CHECK(m.var(j).kind == VarKind::Continuous);
  CHECK(ctx.gadgets.empty());
  auto [lo, hi] = m.expr_range(LinExpr(r));
  CHECK(lo == doctest::Approx(-3.0));
  CHECK(hi == doctest::Approx(1.0));
}

TEST_CASE("solver warm start across rhs mutations of one model") {
  MilpModel m;
  auto x = m.add_var(VarKind::Continuous, 0.0, 10.0);
  auto z = m.add_var(VarKind::Binary, 0, 1);
  int row = m.add_constraint(LinExpr(x) + 4.0 * LinExpr(z), Relation::Ge, 3.0);
  m.set_objective(ObjSense::Minimize, LinExpr(x) + 2.0 * LinExpr(z));
  MilpSolver solver(m);
  auto s1 = solver.solve();
  REQUIRE(s1.status == MilpStatus::Optimal);
  CHECK(s1.objective_value == doctest::Approx(2.0));  // z=1, x=0
  m.set_constraint_rhs(row, 1.0);
  auto s2 = solver.solve();
  REQUIRE(s2.status == MilpStatus::Optimal);
  CHECK(s2.objective_value == doctest::Approx(1.0));  // x=1, z=0
  m.set_var_bounds(x, 0.0, 0.5);
  auto s3 = solver.solve();
  REQUIRE(s3.status == MilpStatus::Optimal);
  CHECK(s3.objective_value == doctest::Approx(2.0));  // back to z=1
}
