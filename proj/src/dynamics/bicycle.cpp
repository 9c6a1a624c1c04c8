#include "stlmpc/dynamics/bicycle.hpp"

#include <cmath>

namespace stlmpc {

Eigen::Vector4d continuous_derivative(const VehicleState& x,
                                      const ControlInput& u,
                                      const VehicleParams& p) {
  const double c = std::cos(x.theta);
  const double s = std::sin(x.theta);
  return {x.v * c - x.v * s * u.beta,
          x.v * s + x.v * c * u.beta,
          x.v / p.l_r * u.beta,
          u.a};
}

double slip_from_steering(double steer, const VehicleParams& p) {
  if (!(std::abs(steer) < M_PI / 2))
    throw std::invalid_argument("slip_from_steering: |steer| must be < pi/2");
  return std::atan(p.l_r / (p.l_f + p.l_r) * std::tan(steer));
}

VehicleState step_discrete(const VehicleState& x, const ControlInput& u,
                           double dt, const VehicleParams& p) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_discrete: dt must be > 0");
  return VehicleState::from_vec(x.vec() + dt * continuous_derivative(x, u, p));
}

std::vector<AffineStep> linearize(const std::vector<VehicleState>& ref_states,
                                  const std::vector<ControlInput>& ref_inputs,
                                  double dt, const VehicleParams& p) {
  if (ref_states.size() != ref_inputs.size() + 1)
    throw std::invalid_argument(
        "linearize: need one more reference state than input");
  std::vector<AffineStep> out;
  out.reserve(ref_inputs.size());
  for (std::size_t t = 0; t < ref_inputs.size(); ++t) {
    const VehicleState& x = ref_states[t];
    const ControlInput& u = ref_inputs[t];
    const double c = std::cos(x.theta);
    const double s = std::sin(x.theta);

    Eigen::Matrix4d J = Eigen::Matrix4d::Zero();
    // d(deriv)/dx
    J(0, 2) = -x.v * s - x.v * c * u.beta;
    J(0, 3) = c - s * u.beta;
    J(1, 2) = x.v * c - x.v * s * u.beta;
    J(1, 3) = s + c * u.beta;
    J(2, 3) = u.beta / p.l_r;

    Eigen::Matrix<double, 4, 2> Ju = Eigen::Matrix<double, 4, 2>::Zero();
    Ju(0, 1) = -x.v * s;
    Ju(1, 1) = x.v * c;
    Ju(2, 1) = x.v / p.l_r;
    Ju(3, 0) = 1.0;

    AffineStep st;
    st.A = Eigen::Matrix4d::Identity() + dt * J;
    st.B = dt * Ju;
    st.c = step_discrete(x, u, dt, p).vec() - st.A * x.vec() - st.B * u.vec();
    out.push_back(st);
  }
  return out;
}

}  // namespace stlmpc
