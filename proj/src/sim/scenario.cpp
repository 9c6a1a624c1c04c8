#include "stlmpc/sim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stlmpc/stl/parser.hpp"

namespace stlmpc {

using nlohmann::json;

void Region::validate() const {
  if (name.empty()) throw std::invalid_argument("Region: empty name");
  if (!(x_lo < x_hi) || !(y_lo < y_hi))
    throw std::invalid_argument("Region " + name + ": empty box");
}

void ScenarioAgent::validate() const {
  if (name.empty()) throw std::invalid_argument("ScenarioAgent: empty name");
  if (!(mass > 0.0))
    throw std::invalid_argument("ScenarioAgent " + name + ": mass must be > 0");
  if (kappa < 0.0 || noise_sigma < 0.0)
    throw std::invalid_argument("ScenarioAgent " + name +
                                ": kappa and noise_sigma must be >= 0");
}

void Scenario::validate() const {
  params.validate();
  risk_params.validate();
  specs.validate();
  if (horizon.steps < 2) throw std::invalid_argument("Scenario: horizon too short");
  if (cycles < 1) throw std::invalid_argument("Scenario: cycles must be >= 1");
  if (grid_size < 2) throw std::invalid_argument("Scenario: grid_size must be >= 2");
  if (budget_alpha < 0.0)
    throw std::invalid_argument("Scenario: budget_alpha must be >= 0");

  std::set<std::string> names;
  for (const auto& r : regions) {
    r.validate();
    if (!names.insert("region:" + r.name).second)
      throw std::invalid_argument("Scenario: duplicate region " + r.name);
  }
  std::set<std::string> dims{"px", "py", "theta", "v"};
  for (const auto& a : agents) {
    a.validate();
    if (!names.insert("agent:" + a.name).second)
      throw std::invalid_argument("Scenario: duplicate agent " + a.name);
    for (const char* d : {"x", "y", "vx", "vy"}) dims.insert(a.name + "_" + d);
  }
  auto check_dims = [&](const FormulaPtr& f, const std::string& where) {
    for (const auto& d : collect_dims(f))
      if (!dims.count(d))
        throw std::invalid_argument("Scenario: " + where +
                                    " references unknown signal " + d);
  };
  for (const auto& nf : specs.hard) check_dims(nf.formula, "hard spec " + nf.name);
  for (const auto& nf : specs.soft) check_dims(nf.formula, "soft spec " + nf.name);
  for (const auto& o : objectives) {
    if (o.kind == ObjectiveSpec::Kind::AgentRisk) {
      bool known = false;
      for (const auto& a : agents) known = known || a.name == o.agent;
      if (!known)
        throw std::invalid_argument("Scenario: objective " + o.name +
                                    " references unknown agent " + o.agent);
      check_dims(o.clearance, "objective " + o.name);
    }
  }
}

AgentModel agent_model_at(const ScenarioAgent& agent, const TimeGrid& grid,
                          double t0) {
  AgentModel m;
  m.name = agent.name;
  m.kind = agent.kind;
  m.mass = agent.mass;
  m.kappa = agent.kappa;
  m.noise_sigma = agent.noise_sigma;
  m.nominal = Trace(grid, {"x", "y", "vx", "vy"});
  for (int t = 0; t < grid.steps; ++t) {
    const double time = t0 + grid.dt * static_cast<double>(t);
    m.nominal.values(t, 0) = agent.x_at(time);
    m.nominal.values(t, 1) = agent.y_at(time);
    m.nominal.values(t, 2) = agent.vx;
    m.nominal.values(t, 3) = agent.vy;
  }
  return m;
}

Trace agent_prediction(const ScenarioAgent& agent, const TimeGrid& grid,
                       double t0) {
  return agent_model_at(agent, grid, t0).nominal;
}

Scenario builtin_exp1() {
  // Intersection: ego heads +x down a corridor it cannot leave, a
  // pedestrian crosses the corridor ahead, and an ambulance closes in
  // from behind. Waiting for the pedestrian conflicts with keeping pace
  // and with clearing the ambulance's path, so the nominal problem loses
  // feasibility mid-run. Dynamics and risk constants are the standard
  // setup; all geometry below is our layout, tuned for that conflict.
  Scenario sc;
  sc.name = "exp1_intersection";
  sc.horizon = TimeGrid(0.2, 11);  // 2 s lookahead
  sc.ego_init = {0.0, 0.0, 0.0, 7.0};
  sc.params = {1.5, 1.5, -9.0, 4.0, -0.2, 0.2};
  sc.cycles = 10;
  sc.grid_size = 3;
  sc.budget_alpha = 4.0;

  sc.regions = {
      {"corridor", -20.0, 60.0, -1.5, 1.5, Region::Role::Drivable},
      {"goal", 30.0, 60.0, -1.5, 1.5, Region::Role::Goal},
      // parked vehicles flanking the corridor: no pulling over
      {"parked_left", 5.0, 25.0, 1.5, 4.5, Region::Role::Obstacle},
      {"parked_right", 5.0, 25.0, -4.5, -1.5, Region::Role::Obstacle},
  };

  sc.agents = {
      {"ped", AgentKind::Pedestrian, 70.0, 0.1, 0.3, 14.0, 3.2, 0.0, -1.2},
      {"amb", AgentKind::Ambulance, 5000.0, 2.3, 0.2, -14.0, 0.0, 8.0, 0.0},
  };

  auto ped_clear = parse_formula(
      "(ped_x - px >= 3) or (ped_y >= 2.5) or (ped_y <= -2.5)");
  auto amb_clear = parse_formula("px - amb_x >= 6");
  sc.specs.hard = {
      {"drivable", parse_formula("G[0,2](py >= -1.5 and py <= 1.5)")}};
  sc.specs.soft = {
      {"reach", parse_formula("G[0,2](v >= 3)")},
      {"ped_safe", f_always({0.0, 2.0}, ped_clear)},
      {"amb_safe", f_always({0.0, 2.0}, amb_clear)},
  };

  ObjectiveSpec ped_risk{"ped_risk", ObjectiveSpec::Kind::AgentRisk, "ped",
                         ped_clear, 0.5, 0.05};
  ObjectiveSpec amb_risk{"amb_risk", ObjectiveSpec::Kind::AgentRisk, "amb",
                         amb_clear, 0.5, 0.0};
  ObjectiveSpec progress;
  progress.name = "progress";
  progress.kind = ObjectiveSpec::Kind::Progress;
  sc.objectives = {ped_risk, amb_risk, progress};

  sc.nominal_objective = {0.1, 1.0, 1.0, 0.0};
  sc.risk_params.n_samples = 200;
  sc.risk_params.d_safe = 2.0;
  sc.risk_params.seed = 1;
  sc.validate();
  return sc;
}

Scenario builtin_exp2() {
  // Emergency-lane borrowing: the ego crawls in its lane while an
  // out-of-control rear vehicle closes at high speed. Keeping clear of
  // it requires either an impossible sprint or a swerve into the
  // emergency lane, where a cyclist rides further ahead. The lane-keeping
  // rule, cyclist clearance, and rear clearance are the negotiable trio;
  // geometry is again ours, tuned so feasibility breaks within a few
  // cycles.
  Scenario sc;
  sc.name = "exp2_rear_vehicle";
  sc.horizon = TimeGrid(0.2, 11);
  sc.ego_init = {0.0, 0.0, 0.0, 2.0};
  sc.params = {1.5, 1.5, -9.0, 4.0, -0.2, 0.2};
  sc.cycles = 12;
  sc.grid_size = 3;
  sc.budget_alpha = 4.0;

  sc.regions = {
      {"road", -30.0, 80.0, -4.5, 1.5, Region::Role::Drivable},
      {"lane", -30.0, 80.0, -1.5, 1.5, Region::Role::Drivable},
      {"shoulder", -30.0, 80.0, -4.5, -1.5, Region::Role::EmergencyLane},
  };

  sc.agents = {
      {"rear", AgentKind::RearVehicle, 1500.0, 1.5, 0.3, -22.0, 0.0, 14.0, 0.0},
      {"cyc", AgentKind::Cyclist, 80.0, 0.2, 0.2, 30.0, -3.0, 4.0, 0.0},
  };

  auto cyc_clear = parse_formula(
      "(px - cyc_x >= 4) or (cyc_x - px >= 4) or (py - cyc_y >= 2)");
  // clear of the rear vehicle: a healthy gap ahead of it, or out of its
  // lane; the lateral escape is discounted so staying put is never the
  // cheapest relaxation
  auto rear_clear = parse_formula(
      "(px - rear_x >= 10) or (0.8*rear_y - 0.8*py >= 2)");
  sc.specs.hard = {
      {"drivable", parse_formula("G[0,2](py >= -4.5 and py <= 1.5)")}};
  sc.specs.soft = {
      {"no_emergency_lane", parse_formula("G[0,2](py >= -1.5)")},
      {"cyclist_safe", f_always({0.0, 2.0}, cyc_clear)},
      {"rear_safe", f_always({0.0, 2.0}, rear_clear)},
  };

  ObjectiveSpec rear_risk{"rear_risk", ObjectiveSpec::Kind::AgentRisk, "rear",
                          rear_clear, 0.5, 0.0};
  ObjectiveSpec cyc_risk{"cyc_risk", ObjectiveSpec::Kind::AgentRisk, "cyc",
                         cyc_clear, 0.5, 0.0};
  sc.objectives = {rear_risk, cyc_risk};

  sc.nominal_objective = {0.1, 0.5, 1.0, 0.0};
  sc.risk_params.n_samples = 200;
  sc.risk_params.d_safe = 2.0;
  sc.risk_params.seed = 2;
  sc.validate();
  return sc;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::invalid_argument("scenario: " + path + ": " + msg);
}

void expect_keys(const json& j, const std::string& path,
                 const std::set<std::string>& required,
                 const std::set<std::string>& optional = {}) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& key : required)
    if (!j.contains(key)) fail(path, "missing field '" + key + "'");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key))
      fail(path + "." + key, "unknown key");
  }
}

double num(const json& j, const std::string& path, const char* key) {
  if (!j.at(key).is_number()) fail(path + "." + key, "expected a number");
  return j.at(key).get<double>();
}

int integer(const json& j, const std::string& path, const char* key) {
  if (!j.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return j.at(key).get<int>();
}

std::string str(const json& j, const std::string& path, const char* key) {
  if (!j.at(key).is_string()) fail(path + "." + key, "expected a string");
  return j.at(key).get<std::string>();
}

FormulaPtr formula(const json& j, const std::string& path, const char* key) {
  try {
    return parse_formula(str(j, path, key));
  } catch (const std::exception& e) {
    fail(path + "." + key, e.what());
  }
}

const std::map<std::string, Region::Role> kRoles = {
    {"drivable", Region::Role::Drivable},
    {"goal", Region::Role::Goal},
    {"emergency_lane", Region::Role::EmergencyLane},
    {"obstacle", Region::Role::Obstacle}};

const std::map<std::string, AgentKind> kKinds = {
    {"pedestrian", AgentKind::Pedestrian},
    {"vehicle", AgentKind::Vehicle},
    {"ambulance", AgentKind::Ambulance},
    {"cyclist", AgentKind::Cyclist},
    {"rear_vehicle", AgentKind::RearVehicle}};

const std::map<std::string, ObjectiveSpec::Kind> kObjKinds = {
    {"agent_risk", ObjectiveSpec::Kind::AgentRisk},
    {"progress", ObjectiveSpec::Kind::Progress},
    {"comfort", ObjectiveSpec::Kind::Comfort}};

template <typename T>
std::string key_of(const std::map<std::string, T>& table, T value) {
  for (const auto& [k, v] : table)
    if (v == value) return k;
  throw std::logic_error("key_of: unmapped enum value");
}

template <typename T>
T enum_of(const std::map<std::string, T>& table, const json& j,
          const std::string& path, const char* key) {
  auto s = str(j, path, key);
  auto it = table.find(s);
  if (it == table.end()) fail(path + "." + key, "unknown value '" + s + "'");
  return it->second;
}

}  // namespace

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["grid"] = {{"dt", sc.horizon.dt}, {"steps", sc.horizon.steps}};
  j["ego"] = {{"px", sc.ego_init.px},
              {"py", sc.ego_init.py},
              {"theta", sc.ego_init.theta},
              {"v", sc.ego_init.v}};
  j["params"] = {{"l_r", sc.params.l_r},         {"l_f", sc.params.l_f},
                 {"a_min", sc.params.a_min},     {"a_max", sc.params.a_max},
                 {"beta_min", sc.params.beta_min},
                 {"beta_max", sc.params.beta_max}};
  j["regions"] = json::array();
  for (const auto& r : sc.regions)
    j["regions"].push_back({{"name", r.name},
                            {"role", key_of(kRoles, r.role)},
                            {"x_lo", r.x_lo},
                            {"x_hi", r.x_hi},
                            {"y_lo", r.y_lo},
                            {"y_hi", r.y_hi}});
  j["agents"] = json::array();
  for (const auto& a : sc.agents)
    j["agents"].push_back({{"name", a.name},
                           {"kind", key_of(kKinds, a.kind)},
                           {"mass", a.mass},
                           {"kappa", a.kappa},
                           {"noise_sigma", a.noise_sigma},
                           {"x", a.x},
                           {"y", a.y},
                           {"vx", a.vx},
                           {"vy", a.vy}});
  j["hard_specs"] = json::array();
  for (const auto& nf : sc.specs.hard)
    j["hard_specs"].push_back({{"name", nf.name},
                               {"formula", to_text(nf.formula)}});
  j["soft_specs"] = json::array();
  for (const auto& nf : sc.specs.soft)
    j["soft_specs"].push_back({{"name", nf.name},
                               {"formula", to_text(nf.formula)}});
  j["objectives"] = json::array();
  for (const auto& o : sc.objectives) {
    json jo = {{"name", o.name}, {"kind", key_of(kObjKinds, o.kind)}};
    switch (o.kind) {
      case ObjectiveSpec::Kind::AgentRisk:
        jo["agent"] = o.agent;
        jo["clearance"] = to_text(o.clearance);
        jo["margin"] = o.margin;
        jo["w_speed"] = o.w_speed;
        break;
      case ObjectiveSpec::Kind::Progress:
        jo["dir_x"] = o.dir_x;
        jo["dir_y"] = o.dir_y;
        break;
      case ObjectiveSpec::Kind::Comfort:
        break;
    }
    j["objectives"].push_back(std::move(jo));
  }
  j["nominal_objective"] = {{"w_input", sc.nominal_objective.w_input},
                            {"w_goal", sc.nominal_objective.w_goal},
                            {"goal_dir_x", sc.nominal_objective.goal_dir_x},
                            {"goal_dir_y", sc.nominal_objective.goal_dir_y}};
  j["risk"] = {{"n_samples", sc.risk_params.n_samples},
               {"d_safe", sc.risk_params.d_safe},
               {"s_max", sc.risk_params.s_max},
               {"ego_mass", sc.risk_params.ego_mass}};
  j["seed"] = sc.risk_params.seed;
  j["budget_alpha"] = sc.budget_alpha;
  j["cycles"] = sc.cycles;
  j["grid_size"] = sc.grid_size;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail("$", e.what());
  }
  expect_keys(j, "$",
              {"grid", "ego", "params", "regions", "agents", "hard_specs",
               "soft_specs", "objectives", "risk", "budget_alpha", "cycles",
               "seed"},
              {"name", "nominal_objective", "grid_size"});

  Scenario sc;
  if (j.contains("name")) sc.name = str(j, "$", "name");

  const json& g = j.at("grid");
  expect_keys(g, "$.grid", {"dt", "steps"});
  sc.horizon = TimeGrid(num(g, "$.grid", "dt"), integer(g, "$.grid", "steps"));

  const json& e = j.at("ego");
  expect_keys(e, "$.ego", {"px", "py", "theta", "v"});
  sc.ego_init = {num(e, "$.ego", "px"), num(e, "$.ego", "py"),
                 num(e, "$.ego", "theta"), num(e, "$.ego", "v")};

  const json& p = j.at("params");
  expect_keys(p, "$.params",
              {"l_r", "l_f", "a_min", "a_max", "beta_min", "beta_max"});
  sc.params = {num(p, "$.params", "l_r"),      num(p, "$.params", "l_f"),
               num(p, "$.params", "a_min"),    num(p, "$.params", "a_max"),
               num(p, "$.params", "beta_min"), num(p, "$.params", "beta_max")};

  int idx = 0;
  for (const json& r : j.at("regions")) {
    const std::string path = "$.regions[" + std::to_string(idx++) + "]";
    expect_keys(r, path, {"name", "role", "x_lo", "x_hi", "y_lo", "y_hi"});
    sc.regions.push_back({str(r, path, "name"), num(r, path, "x_lo"),
                          num(r, path, "x_hi"), num(r, path, "y_lo"),
                          num(r, path, "y_hi"),
                          enum_of(kRoles, r, path, "role")});
  }
  idx = 0;
  for (const json& a : j.at("agents")) {
    const std::string path = "$.agents[" + std::to_string(idx++) + "]";
    expect_keys(a, path, {"name", "kind", "mass", "kappa", "noise_sigma", "x",
                          "y", "vx", "vy"});
    sc.agents.push_back({str(a, path, "name"), enum_of(kKinds, a, path, "kind"),
                         num(a, path, "mass"), num(a, path, "kappa"),
                         num(a, path, "noise_sigma"), num(a, path, "x"),
                         num(a, path, "y"), num(a, path, "vx"),
                         num(a, path, "vy")});
  }
  idx = 0;
  for (const json& s : j.at("hard_specs")) {
    const std::string path = "$.hard_specs[" + std::to_string(idx++) + "]";
    expect_keys(s, path, {"name", "formula"});
    sc.specs.hard.push_back({str(s, path, "name"), formula(s, path, "formula")});
  }
  idx = 0;
  for (const json& s : j.at("soft_specs")) {
    const std::string path = "$.soft_specs[" + std::to_string(idx++) + "]";
    expect_keys(s, path, {"name", "formula"});
    sc.specs.soft.push_back({str(s, path, "name"), formula(s, path, "formula")});
  }
  idx = 0;
  for (const json& o : j.at("objectives")) {
    const std::string path = "$.objectives[" + std::to_string(idx++) + "]";
    ObjectiveSpec obj;
    obj.kind = enum_of(kObjKinds, o, path, "kind");
    switch (obj.kind) {
      case ObjectiveSpec::Kind::AgentRisk:
        expect_keys(o, path, {"name", "kind", "agent", "clearance"},
                    {"margin", "w_speed"});
        obj.agent = str(o, path, "agent");
        obj.clearance = formula(o, path, "clearance");
        if (o.contains("margin")) obj.margin = num(o, path, "margin");
        if (o.contains("w_speed")) obj.w_speed = num(o, path, "w_speed");
        break;
      case ObjectiveSpec::Kind::Progress:
        expect_keys(o, path, {"name", "kind"}, {"dir_x", "dir_y"});
        if (o.contains("dir_x")) obj.dir_x = num(o, path, "dir_x");
        if (o.contains("dir_y")) obj.dir_y = num(o, path, "dir_y");
        break;
      case ObjectiveSpec::Kind::Comfort:
        expect_keys(o, path, {"name", "kind"});
        break;
    }
    obj.name = str(o, path, "name");
    sc.objectives.push_back(std::move(obj));
  }
  if (j.contains("nominal_objective")) {
    const json& n = j.at("nominal_objective");
    expect_keys(n, "$.nominal_objective",
                {"w_input", "w_goal", "goal_dir_x", "goal_dir_y"});
    sc.nominal_objective = {
        num(n, "$.nominal_objective", "w_input"),
        num(n, "$.nominal_objective", "w_goal"),
        num(n, "$.nominal_objective", "goal_dir_x"),
        num(n, "$.nominal_objective", "goal_dir_y")};
  }
  const json& r = j.at("risk");
  expect_keys(r, "$.risk", {"n_samples", "d_safe", "s_max", "ego_mass"});
  sc.risk_params.n_samples = integer(r, "$.risk", "n_samples");
  sc.risk_params.d_safe = num(r, "$.risk", "d_safe");
  sc.risk_params.s_max = num(r, "$.risk", "s_max");
  sc.risk_params.ego_mass = num(r, "$.risk", "ego_mass");
  if (!j.at("seed").is_number_integer()) fail("$.seed", "expected an integer");
  sc.risk_params.seed = j.at("seed").get<std::uint64_t>();
  sc.budget_alpha = num(j, "$", "budget_alpha");
  sc.cycles = integer(j, "$", "cycles");
  if (j.contains("grid_size")) sc.grid_size = integer(j, "$", "grid_size");

  try {
    sc.validate();
  } catch (const std::exception& ex) {
    fail("$", ex.what());
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("scenario: cannot write " + path);
  out << scenario_to_json(sc);
}

}  // namespace stlmpc
