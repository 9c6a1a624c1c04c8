// stlmpc command line: monitor formulas over traces, run the two-stage
// pipeline on scenarios, export Pareto fronts, and render SVG plots.
// Exit codes: 0 success, 1 usage error, 2 infeasible outcome, 3 I/O or
// schema error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "stlmpc/cli/io.hpp"
#include "stlmpc/cli/svg.hpp"
#include "stlmpc/stl/parser.hpp"

namespace {

using namespace stlmpc;

constexpr int kOk = 0, kUsage = 1, kInfeasible = 2, kIoError = 3;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid_size;
  std::optional<double> alpha;
  std::optional<int> samples;
};

Scenario load(const std::string& path, const Overrides& ov) {
  Scenario sc;
  if (path == "exp1") {
    sc = builtin_exp1();
  } else if (path == "exp2") {
    sc = builtin_exp2();
  } else {
    sc = load_scenario(path);
  }
  if (ov.seed) sc.risk_params.seed = *ov.seed;
  if (ov.grid_size) sc.grid_size = *ov.grid_size;
  if (ov.alpha) sc.budget_alpha = *ov.alpha;
  if (ov.samples) sc.risk_params.n_samples = *ov.samples;
  sc.validate();
  return sc;
}

RunMode mode_of(const std::string& s) {
  if (s == "stage1") return RunMode::Stage1Only;
  if (s == "full") return RunMode::Full;
  throw CLI::ValidationError("--mode", "must be stage1 or full");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int run_monitor(const std::string& formula_text, const std::string& trace_path,
                int t) {
  FormulaPtr f;
  try {
    f = parse_formula(formula_text);
  } catch (const std::exception& e) {
    std::cerr << "error: bad formula: " << e.what() << "\n";
    return kUsage;
  }
  Trace tr = read_trace_csv(trace_path);
  const double rho = robustness(f, tr, t);
  std::cout << "rho = " << fmt(rho) << "\n"
            << (rho >= 0.0 ? "SAT" : "UNSAT") << "\n";
  return kOk;
}

int run_solve(const std::string& path, const std::string& mode_s,
              const Overrides& ov) {
  Scenario sc = load(path, ov);
  sc.cycles = 1;
  auto log = run_receding_horizon(sc, mode_of(mode_s));
  const CycleLog& c = log.cycles.front();
  if (log.aborted) {
    std::cerr << "hard-infeasible: " << log.abort_reason << "\n";
    return kInfeasible;
  }
  std::cout << "status = "
            << (c.delta_min > 1e-6 ? "feasible_relaxed" : "feasible_strict")
            << "\n";
  std::cout << "delta_min = " << fmt(c.delta_min) << "\n";
  for (const auto& [name, d] : c.delta)
    std::cout << "delta[" << name << "] = " << fmt(d) << "\n";
  for (const auto& [name, rho] : c.robustness)
    std::cout << "rho[" << name << "] = " << fmt(rho) << "\n";
  std::cout << "u0 = (" << fmt(c.executed.a) << ", " << fmt(c.executed.beta)
            << ")\n";
  for (const auto& [name, ar] : c.risk.agents)
    std::cout << "R[" << name << "] = " << fmt(ar.R) << "\n";
  return kOk;
}

int run_pareto(const std::string& path, int cycle, const Overrides& ov,
               const std::string& out) {
  Scenario sc = load(path, ov);
  if (cycle < 0 || cycle >= sc.cycles) {
    std::cerr << "error: cycle out of range [0, " << sc.cycles - 1 << "]\n";
    return kUsage;
  }
  sc.cycles = cycle + 1;
  auto log = run_receding_horizon(sc, RunMode::Full);
  if (log.aborted || static_cast<int>(log.cycles.size()) <= cycle) {
    std::cerr << "hard-infeasible before requested cycle: " << log.abort_reason
              << "\n";
    return kInfeasible;
  }
  const CycleLog& c = log.cycles.back();
  if (c.front.empty()) {
    std::cerr << "no candidates at cycle " << cycle << "\n";
    return kInfeasible;
  }
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty()) {
    file.open(out, std::ios::binary);
    if (!file) throw std::invalid_argument("cannot write " + out);
    os = &file;
  }
  *os << "candidate,selected";
  for (const auto& o : sc.objectives) *os << ",g_" << o.name;
  *os << "\n";
  for (std::size_t i = 0; i < c.front.size(); ++i) {
    *os << i << "," << (static_cast<int>(i) == c.selected_index ? 1 : 0);
    for (double g : c.front[i]) *os << "," << fmt(g);
    *os << "\n";
  }
  return kOk;
}

int run_simulate(const std::string& path, const std::string& mode_s,
                 const std::string& out_dir, const Overrides& ov) {
  Scenario sc = load(path, ov);
  auto log = run_receding_horizon(sc, mode_of(mode_s));
  write_sim_log(log, sc, out_dir);
  std::cerr << "wrote " << log.cycles.size() << " cycles to " << out_dir
            << "\n";
  if (log.aborted) {
    std::cerr << "hard-infeasible: " << log.abort_reason << "\n";
    return kInfeasible;
  }
  return kOk;
}

int run_plot(const std::string& log_dir, const std::string& kind_s,
             const std::string& out_svg) {
  PlotKind kind;
  try {
    kind = plot_kind_from_string(kind_s);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  auto ls = read_sim_log(log_dir);
  auto svg = render_svg(ls, kind);
  std::ofstream out(out_svg, std::ios::binary);
  if (!out) throw std::invalid_argument("cannot write " + out_svg);
  out << svg;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-stage STL-constrained MPC: feasibility restoration and "
      "risk-aware relaxation refinement"};
  app.require_subcommand(1);

  const char* env_out = std::getenv("STLMPC_OUT_DIR");
  std::string default_out = env_out ? env_out : "out";

  Overrides ov;
  std::string scenario, mode = "full", trace_path, formula_text;
  std::string out_dir = default_out, out_file, kind;
  int t_index = 0, cycle = 0;

  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "Override the scenario seed");
    cmd->add_option("--grid-size", ov.grid_size,
                    "Epsilon grid resolution per objective");
    cmd->add_option("--alpha", ov.alpha, "Relaxation budget above delta_min");
    cmd->add_option("--samples", ov.samples, "Monte-Carlo sample count");
  };
  auto add_scenario = [&](CLI::App* cmd) {
    cmd->add_option("scenario", scenario,
                    "Scenario JSON file, or built-in name exp1/exp2")
        ->required();
  };

  auto* monitor =
      app.add_subcommand("monitor", "Evaluate a formula over a trace CSV");
  monitor->add_option("formula", formula_text, "STL formula text")->required();
  monitor->add_option("trace", trace_path, "Trace CSV (time,<dim>,...)")
      ->required();
  monitor->add_option("--t", t_index, "Evaluation time index (default 0)");

  auto* solve = app.add_subcommand(
      "solve", "Run one control cycle and print the relaxation result");
  add_scenario(solve);
  solve->add_option("--mode", mode, "stage1 or full (default full)");
  add_overrides(solve);

  auto* pareto = app.add_subcommand(
      "pareto", "Export the Pareto front of one control cycle as CSV");
  add_scenario(pareto);
  pareto->add_option("--cycle", cycle, "Cycle index (default 0)");
  pareto->add_option("--out", out_file, "Output CSV (default stdout)");
  add_overrides(pareto);

  auto* simulate = app.add_subcommand(
      "simulate", "Run the receding-horizon loop and write CSV logs");
  add_scenario(simulate);
  simulate->add_option("--mode", mode, "stage1 or full (default full)");
  simulate->add_option("--out", out_dir,
                       "Output directory (default $STLMPC_OUT_DIR or ./out)");
  add_overrides(simulate);

  auto* plot = app.add_subcommand("plot", "Render an SVG from written logs");
  plot->add_option("log_dir", out_dir, "Directory written by simulate")
      ->required();
  plot->add_option("kind", kind, "trajectory | controls | deltas | front")
      ->required();
  plot->add_option("--out", out_file, "Output SVG path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (monitor->parsed()) return run_monitor(formula_text, trace_path, t_index);
    if (solve->parsed()) return run_solve(scenario, mode, ov);
    if (pareto->parsed()) return run_pareto(scenario, cycle, ov, out_file);
    if (simulate->parsed()) return run_simulate(scenario, mode, out_dir, ov);
    if (plot->parsed()) return run_plot(out_dir, kind, out_file);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoError;
  }
  return kUsage;
}
