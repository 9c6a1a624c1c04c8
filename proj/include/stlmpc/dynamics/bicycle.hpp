// Acceleration-controlled kinematic bicycle model under the small-slip
// control-affine approximation, with forward-Euler discretization and
// per-step affine linearization for the MILP stage. The same Euler map
// is used for simulation and linearization so planner and simulator
// agree step-for-step on the reference.

#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace stlmpc {

struct VehicleState {
  double px = 0.0;
  double py = 0.0;
  double theta = 0.0;
  double v = 0.0;

  Eigen::Vector4d vec() const { return {px, py, theta, v}; }
  static VehicleState from_vec(const Eigen::Vector4d& x) {
    return {x[0], x[1], x[2], x[3]};
  }
};

struct ControlInput {
  double a = 0.0;     // longitudinal acceleration [m/s^2]
  double beta = 0.0;  // slip angle, used directly as input [rad]

  Eigen::Vector2d vec() const { return {a, beta}; }
};

struct VehicleParams {
  double l_r = 1.5;
  double l_f = 1.5;
  double a_min = -9.0;
  double a_max = 4.0;
  double beta_min = -0.2;
  double beta_max = 0.2;

  void validate() const {
    if (!(l_r > 0.0 && l_f > 0.0))
      throw std::invalid_argument("VehicleParams: axle distances must be > 0");
    if (!(a_min < a_max) || !(beta_min < beta_max))
      throw std::invalid_argument("VehicleParams: empty input box");
  }
};

// x_{t+1} ~= A x_t + B u_t + c
struct AffineStep {
  Eigen::Matrix4d A;
  Eigen::Matrix<double, 4, 2> B;
  Eigen::Vector4d c;
};

// (v cos(th) - v sin(th) b,  v sin(th) + v cos(th) b,  v/l_r b,  a)
Eigen::Vector4d continuous_derivative(const VehicleState& x,
                                      const ControlInput& u,
                                      const VehicleParams& p);

// atan(l_r / (l_f + l_r) * tan(steer)); steering-to-slip conversion for
// callers commanding front-wheel angles. Not part of the MPC loop.
double slip_from_steering(double steer, const VehicleParams& p);

VehicleState step_discrete(const VehicleState& x, const ControlInput& u,
                           double dt, const VehicleParams& p);

// Analytic Jacobians of the Euler map about (ref_states[t], ref_inputs[t]);
// c_t makes the affine map exact on the reference.
// ref_states must have one more element than ref_inputs.
std::vector<AffineStep> linearize(const std::vector<VehicleState>& ref_states,
                                  const std::vector<ControlInput>& ref_inputs,
                                  double dt, const VehicleParams& p);

}  // namespace stlmpc
