#include <doctest.h>

#include <cmath>
#include <random>

#include "stlmpc/stage1/stage1.hpp"
#include "stlmpc/stl/parser.hpp"

using namespace stlmpc;

namespace {

// Problem linearized about a zero-input constant-velocity rollout.
MpcProblem make_problem(VehicleState x0, int steps, double dt = 0.2) {
  MpcProblem p;
  p.horizon = TimeGrid(dt, steps);
  p.x0 = x0;
  std::vector<VehicleState> ref{x0};
  std::vector<ControlInput> uref(static_cast<std::size_t>(steps - 1), {0.0, 0.0});
  for (const auto& u : uref)
    ref.push_back(step_discrete(ref.back(), u, dt, p.params));
  p.linear_model = linearize(ref, uref, dt, p.params);
  return p;
}

SpecSet soft_only(std::vector<std::pair<std::string, std::string>> specs) {
  SpecSet s;
  for (auto& [name, text] : specs) s.soft.push_back({name, parse_formula(text)});
  return s;
}

}  // namespace

TEST_CASE("nominal: no specs, at rest, L1 objective -> zero control") {
  auto p = make_problem({0, 0, 0, 0}, 11);
  auto res = solve_nominal(p, {});
  REQUIRE(res.feasible);
  CHECK(res.objective == doctest::Approx(0.0));
  for (const auto& u : res.u) {
    CHECK(u.a == doctest::Approx(0.0));
    CHECK(u.beta == doctest::Approx(0.0));
  }
  for (const auto& x : res.x) CHECK(x.px == doctest::Approx(0.0));
}

TEST_CASE("nominal: satisfiable speed spec is feasible") {
  auto p = make_problem({0, 0, 0, 5}, 11);
  SpecSet s;
  s.hard.push_back({"vpos", parse_formula("G[0,2](v >= 0)")});
  auto res = solve_nominal(p, s);
  CHECK(res.feasible);
}

TEST_CASE("nominal: conflicting soft specs are infeasible") {
  auto p = make_problem({0, 0, 0, 0}, 11);
  auto s = soft_only({{"far", "F[2,2](px >= 5)"}, {"near", "F[2,2](px <= 3)"}});
  auto res = solve_nominal(p, s);
  CHECK_FALSE(res.feasible);
}

TEST_CASE("restore_feasibility: analytic two-interval toy, gap 2") {
  auto p = make_problem({0, 0, 0, 0}, 11);
  auto s = soft_only({{"far", "F[2,2](px >= 5)"}, {"near", "F[2,2](px <= 3)"}});
  auto res = restore_feasibility(p, s);
  REQUIRE(res.status == RelaxationStatus::FeasibleRelaxed);
  CHECK(res.delta_min == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(res.delta_star.at("far") + res.delta_star.at("near") ==
        doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("restore_feasibility: jointly satisfiable -> delta_min = 0") {
  auto p = make_problem({0, 0, 0, 4}, 11);
  auto s = soft_only({{"a", "F[2,2](px >= 3)"}, {"b", "F[2,2](px <= 9)"},
                      {"c", "G[0,2](v >= -1)"}});
  auto res = restore_feasibility(p, s);
  REQUIRE(res.status == RelaxationStatus::FeasibleStrict);
  CHECK(res.delta_min == doctest::Approx(0.0));
}

TEST_CASE("restore_feasibility: randomized conflicting intervals") {
  std::mt19937 rng(2025);
  std::uniform_real_distribution<double> u(0.5, 6.5);
  for (int trial = 0; trial < 25; ++trial) {
    double a1 = u(rng), b1 = a1 + 0.3, a2 = u(rng), b2 = a2 + 0.3;
    auto mk = [](double lo, double hi) {
      return "F[2,2](px >= " + std::to_string(lo) + " and px <= " +
             std::to_string(hi) + ")";
    };
    auto p = make_problem({0, 0, 0, 2}, 11);
    SpecSet s = soft_only({{"i1", mk(a1, b1)}, {"i2", mk(a2, b2)}});
    double gap = std::max({0.0, a1 - b2, a2 - b1});
    auto res = restore_feasibility(p, s);
    CAPTURE(trial);
    REQUIRE(res.status != RelaxationStatus::HardInfeasible);
    CHECK(res.delta_min == doctest::Approx(gap).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("restore_feasibility: hard conflict is reported, never relaxed") {
  auto p = make_problem({1, 0, 0, 0}, 3);
  SpecSet s;
  s.hard.push_back({"stay", parse_formula("G[0,0](px <= 0)")});
  auto res = restore_feasibility(p, s);
  CHECK(res.status == RelaxationStatus::HardInfeasible);
  CHECK(res.u_star.empty());
}

TEST_CASE("relaxed solutions pass the monitor audit") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(1.0, 6.0);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = make_problem({0, 0, 0, 3}, 11);
    SpecSet s;
    s.hard.push_back({"lane", parse_formula("G[0,2](py <= 2 and py >= -2)")});
    double a1 = u(rng), a2 = u(rng);
    s.soft = soft_only({{"s1", "F[2,2](px >= " + std::to_string(a1 + 2) + ")"},
                        {"s2", "F[2,2](px <= " + std::to_string(a2 - 2) + ")"}})
                 .soft;
    auto res = restore_feasibility(p, s);
    REQUIRE(res.status != RelaxationStatus::HardInfeasible);
    auto tr = assemble_trace(p, res.x_star);
    for (const auto& nf : s.hard)
      CHECK(robustness(nf.formula, tr, 0) >= -1e-6);
    for (const auto& nf : s.soft) {
      CHECK(res.delta_star.at(nf.name) >= 0.0);
      CHECK(robustness(nf.formula, tr, 0) >=
            -res.delta_star.at(nf.name) - 1e-6);
    }
  }
}

TEST_CASE("exogenous agent dims are visible to specs") {
  auto p = make_problem({0, 0, 0, 2}, 6);
  Trace ped(p.horizon, {"x", "y"});
  for (int k = 0; k < 6; ++k) {
    ped.values(k, 0) = 10.0 - k;
    ped.values(k, 1) = 0.0;
  }
  p.exogenous["ped"] = ped;
  SpecSet s;
  // stay 1 m behind the pedestrian's x at all times
  s.soft.push_back({"behind", parse_formula("G[0,1](ped_x - px >= 1)")});
  auto res = restore_feasibility(p, s);
  REQUIRE(res.status == RelaxationStatus::FeasibleStrict);
  auto tr = assemble_trace(p, res.x_star);
  CHECK(robustness(s.soft[0].formula, tr, 0) >= -1e-6);
}

TEST_CASE("problem validation") {
  auto p = make_problem({0, 0, 0, 0}, 5);
  p.linear_model.pop_back();
  CHECK_THROWS(p.validate());
  SpecSet s;
  s.hard.push_back({"a", parse_formula("px >= 0")});
  s.soft.push_back({"a", parse_formula("px <= 0")});
  CHECK_THROWS(s.validate());
}
