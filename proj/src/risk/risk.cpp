#include "stlmpc/risk/risk.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace stlmpc {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double uniform01(std::uint64_t h) {
  // (0, 1); never exactly 0 so it is safe inside log()
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

// One Gaussian draw addressed by counters only.
double gaussian_draw(std::uint64_t seed, std::uint64_t agent, int sample,
                     int step, int axis) {
  std::uint64_t key = mix64(seed) ^ mix64(agent);
  key = mix64(key ^ (static_cast<std::uint64_t>(sample) << 32 |
                     static_cast<std::uint64_t>(step) << 8 |
                     static_cast<std::uint64_t>(axis)));
  const double u1 = uniform01(mix64(key));
  const double u2 = uniform01(mix64(key ^ 0xdeadbeefcafef00dULL));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int dim_of(const Trace& tr, const std::string& name) {
  int j = tr.dim_index(name);
  if (j < 0) throw std::invalid_argument("risk: trace lacks dimension " + name);
  return j;
}

double linf_gap(const Trace& ego, int ex, int ey, const Trace& agent, int ax,
                int ay, int t) {
  return std::max(std::abs(ego.values(t, ex) - agent.values(t, ax)),
                  std::abs(ego.values(t, ey) - agent.values(t, ay)));
}

}  // namespace

void AgentModel::validate() const {
  if (name.empty()) throw std::invalid_argument("AgentModel: empty name");
  if (!(mass > 0.0)) throw std::invalid_argument("AgentModel: mass must be > 0");
  if (kappa < 0.0) throw std::invalid_argument("AgentModel: kappa must be >= 0");
  if (noise_sigma < 0.0)
    throw std::invalid_argument("AgentModel: noise_sigma must be >= 0");
  for (const char* d : {"x", "y", "vx", "vy"})
    if (!nominal.has_dim(d))
      throw std::invalid_argument("AgentModel: nominal trace lacks dim " +
                                  std::string(d));
}

void RiskParams::validate() const {
  if (n_samples < 1) throw std::invalid_argument("RiskParams: n_samples >= 1");
  if (!(d_safe > 0.0)) throw std::invalid_argument("RiskParams: d_safe > 0");
  if (s_max < 0.0) throw std::invalid_argument("RiskParams: s_max >= 0");
  if (!(ego_mass > 0.0)) throw std::invalid_argument("RiskParams: ego_mass > 0");
}

double reduced_mass(double m_ego, double m_agent) {
  if (!(m_ego > 0.0) || !(m_agent > 0.0))
    throw std::invalid_argument("reduced_mass: masses must be > 0");
  return m_ego * m_agent / (m_ego + m_agent);
}

double vulnerability(double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("vulnerability: kappa >= 0");
  return 1.0 / (1.0 + kappa);
}

std::vector<Trace> sample_agent_trajectories(const AgentModel& agent, int n,
                                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_agent_trajectories: n >= 1");
  agent.validate();
  const int steps = agent.nominal.grid.steps;
  const double dt = agent.nominal.grid.dt;
  const int jx = dim_of(agent.nominal, "x"), jy = dim_of(agent.nominal, "y");
  const int jvx = dim_of(agent.nominal, "vx"), jvy = dim_of(agent.nominal, "vy");
  const std::uint64_t agent_key = fnv1a(agent.name);

  std::vector<Trace> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    Trace tr(agent.nominal.grid, {"x", "y", "vx", "vy"});
    double ix = 0.0, iy = 0.0;  // integrated noise displacement
    for (int t = 0; t < steps; ++t) {
      const double ex =
          agent.noise_sigma * gaussian_draw(seed, agent_key, s, t, 0);
      const double ey =
          agent.noise_sigma * gaussian_draw(seed, agent_key, s, t, 1);
      tr.values(t, 0) = agent.nominal.values(t, jx) + ix;
      tr.values(t, 1) = agent.nominal.values(t, jy) + iy;
      tr.values(t, 2) = agent.nominal.values(t, jvx) + ex;
      tr.values(t, 3) = agent.nominal.values(t, jvy) + ey;
      ix += dt * ex;
      iy += dt * ey;
    }
    out.push_back(std::move(tr));
  }
  return out;
}

std::pair<double, std::vector<int>> collision_probability(
    const Trace& ego, const std::vector<Trace>& samples, double d_safe) {
  const int ex = dim_of(ego, "px"), ey = dim_of(ego, "py");
  std::vector<int> colliding;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Trace& tr = samples[s];
    if (!(tr.grid == ego.grid))
      throw std::invalid_argument("collision_probability: grid mismatch");
    const int ax = dim_of(tr, "x"), ay = dim_of(tr, "y");
    for (int t = 0; t < ego.grid.steps; ++t)
      if (linf_gap(ego, ex, ey, tr, ax, ay, t) <= d_safe) {
        colliding.push_back(static_cast<int>(s));
        break;
      }
  }
  const double P = samples.empty()
                       ? 0.0
                       : static_cast<double>(colliding.size()) /
                             static_cast<double>(samples.size());
  return {P, std::move(colliding)};
}

int first_contact_time(const Trace& ego, const Trace& sample, double d_safe) {
  if (!(sample.grid == ego.grid))
    throw std::invalid_argument("first_contact_time: grid mismatch");
  const int ex = dim_of(ego, "px"), ey = dim_of(ego, "py");
  const int ax = dim_of(sample, "x"), ay = dim_of(sample, "y");
  for (int t = 0; t < ego.grid.steps; ++t)
    if (linf_gap(ego, ex, ey, sample, ax, ay, t) <= d_safe) return t;
  throw std::invalid_argument("first_contact_time: sample never collides");
}

SeverityResult severity(const Trace& ego, const AgentModel& agent,
                        const std::vector<Trace>& samples,
                        const std::vector<int>& colliding,
                        const std::vector<int>& contact_times,
                        const RiskParams& params) {
  SeverityResult out;
  if (colliding.empty()) return out;  // S := 0 when nothing collides
  if (colliding.size() != contact_times.size())
    throw std::invalid_argument("severity: colliding/contact size mismatch");
  if (!(params.s_max > 0.0))
    throw std::invalid_argument("severity: s_max must be resolved > 0");
  const int jth = dim_of(ego, "theta"), jv = dim_of(ego, "v");
  const double mu = reduced_mass(params.ego_mass, agent.mass);

  double acc = 0.0;
  for (std::size_t i = 0; i < colliding.size(); ++i) {
    const Trace& tr = samples.at(static_cast<std::size_t>(colliding[i]));
    const int t = contact_times[i];
    const double th = ego.values(t, jth), sp = ego.values(t, jv);
    const double dvx = sp * std::cos(th) - tr.values(t, dim_of(tr, "vx"));
    const double dvy = sp * std::sin(th) - tr.values(t, dim_of(tr, "vy"));
    acc += mu * std::hypot(dvx, dvy);
  }
  out.raw = acc / static_cast<double>(colliding.size());
  out.normalized = out.raw / params.s_max;
  if (out.normalized > 1.0) {
    out.normalized = 1.0;
    out.clamped = true;
    std::cerr << "warning: severity for agent " << agent.name
              << " clamped to 1 (raw " << out.raw << " > s_max "
              << params.s_max << ")\n";
  }
  return out;
}

RiskReport evaluate_risk(const Trace& ego,
                         const std::vector<AgentModel>& agents,
                         const RiskParams& params) {
  params.validate();
  RiskParams p = params;
  if (p.s_max == 0.0) {
    double mu_max = 0.0;
    for (const auto& a : agents)
      mu_max = std::max(mu_max, reduced_mass(p.ego_mass, a.mass));
    p.s_max = mu_max > 0.0 ? mu_max * 30.0 : 1.0;
  }

  RiskReport report;
  for (const auto& agent : agents) {
    auto samples = sample_agent_trajectories(agent, p.n_samples, p.seed);
    auto [P, colliding] = collision_probability(ego, samples, p.d_safe);
    AgentRisk ar;
    ar.P = P;
    ar.colliding_count = static_cast<int>(colliding.size());
    ar.colliding_samples = colliding;
    for (int s : colliding)
      ar.first_contact_times.push_back(
          first_contact_time(ego, samples[static_cast<std::size_t>(s)],
                             p.d_safe));
    auto sev = severity(ego, agent, samples, ar.colliding_samples,
                        ar.first_contact_times, p);
    ar.S_raw = sev.raw;
    ar.S = sev.normalized;
    ar.severity_clamped = sev.clamped;
    ar.V = vulnerability(agent.kappa);
    ar.R = ar.P * ar.S * ar.V;
    report.agents[agent.name] = std::move(ar);
  }
  return report;
}

}  // namespace stlmpc
