// Monte-Carlo consequence evaluation. Per agent: empirical collision
// probability P over velocity-perturbed trajectory samples, mean impact
// severity S at first contact using the reduced mass, vulnerability
// V = 1/(1+kappa), and the risk product R = P * S * V.
//
// Sampling uses a counter-based generator: every Gaussian draw is a pure
// function of (seed, agent name, sample, step, axis), so results are
// reproducible and independent of evaluation order or thread count.

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "stlmpc/stl/ast.hpp"

namespace stlmpc {

enum class AgentKind { Pedestrian, Vehicle, Ambulance, Cyclist, RearVehicle };

struct AgentModel {
  std::string name;
  AgentKind kind = AgentKind::Vehicle;
  double mass = 1500.0;       // kg
  double kappa = 1.5;         // protection index
  Trace nominal;              // dims x, y, vx, vy on the planning grid
  double noise_sigma = 0.3;   // m/s per axis per step

  void validate() const;
};

struct RiskParams {
  int n_samples = 200;
  double d_safe = 2.0;        // m, L-inf threshold
  double s_max = 0.0;         // 0 = auto: max reduced mass * 30 m/s
  std::uint64_t seed = 0;
  double ego_mass = 1500.0;   // kg

  void validate() const;
};

struct AgentRisk {
  double P = 0.0;
  double S = 0.0;
  double V = 1.0;
  double R = 0.0;
  double S_raw = 0.0;
  int colliding_count = 0;
  std::vector<int> colliding_samples;
  std::vector<int> first_contact_times;  // aligned with colliding_samples
  bool severity_clamped = false;
};

struct RiskReport {
  std::map<std::string, AgentRisk> agents;
};

double reduced_mass(double m_ego, double m_agent);
double vulnerability(double kappa);

// n velocity-perturbed trajectories; noise integrates on top of the
// nominal positions, so sigma = 0 reproduces the nominal exactly.
std::vector<Trace> sample_agent_trajectories(const AgentModel& agent, int n,
                                             std::uint64_t seed);

// P = (#samples with min-over-t L-inf gap <= d_safe) / N, plus the
// indices of the colliding samples. Ego trace needs dims px, py.
std::pair<double, std::vector<int>> collision_probability(
    const Trace& ego, const std::vector<Trace>& samples, double d_safe);

// Smallest sample index with gap <= d_safe; throws if the pair never
// comes within d_safe.
int first_contact_time(const Trace& ego, const Trace& sample, double d_safe);

// Mean reduced-mass impact momentum over the colliding samples, raw and
// normalized by s_max (clamped to [0,1]; clamping sets the flag and logs
// to stderr). Ego trace needs dims px, py, theta, v.
struct SeverityResult {
  double raw = 0.0;
  double normalized = 0.0;
  bool clamped = false;
};
SeverityResult severity(const Trace& ego, const AgentModel& agent,
                        const std::vector<Trace>& samples,
                        const std::vector<int>& colliding,
                        const std::vector<int>& contact_times,
                        const RiskParams& params);

RiskReport evaluate_risk(const Trace& ego,
                         const std::vector<AgentModel>& agents,
                         const RiskParams& params);

}  // namespace stlmpc
