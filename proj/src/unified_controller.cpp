#include "flexarm/unified_controller.hpp"

#include <cmath>
#include <stdexcept>

namespace flexarm {
namespace {

void AllPositive(const Eigen::Ref<const Vector>& v, const std::string& name,
                 std::vector<std::string>* errors) {
  if (!v.allFinite() || (v.array() <= 0.0).any()) {
    errors->push_back(name + " entries must be > 0");
  }
}

}  // namespace

Gains Gains::Benchmark() {
  Gains g;
  g.K_gamma.resize(4);
  g.K_gamma << 209.9, 220.5, 241.4, 283.4;
  g.K_eta = Vector::Constant(4, 20.0);
  g.K_gamma_eta = g.K_gamma + g.K_eta;
  return g;
}

std::vector<std::string> Gains::Validate(int num_actuated,
                                         const std::string& prefix) const {
  std::vector<std::string> errors;
  AllPositive(K_P, prefix + ".K_P", &errors);
  AllPositive(K_I, prefix + ".K_I", &errors);
  AllPositive(K_xi, prefix + ".K_xi", &errors);
  const std::pair<const Vector*, const char*> joint_gains[] = {
      {&K_gamma, "K_gamma"}, {&K_eta, "K_eta"}, {&K_gamma_eta, "K_gamma_eta"}};
  for (const auto& [v, name] : joint_gains) {
    if (v->size() != num_actuated) {
      errors.push_back(prefix + "." + name + " needs " +
                       std::to_string(num_actuated) + " entries (got " +
                       std::to_string(v->size()) + ")");
    } else {
      AllPositive(*v, prefix + "." + name, &errors);
    }
  }
  if (!(sigma_p > 0.0) || !std::isfinite(sigma_p)) {
    errors.push_back(prefix + ".sigma_p must be > 0");
  }
  if (!(eta_t >= 0.0) || !std::isfinite(eta_t)) {
    errors.push_back(prefix + ".eta_t must be >= 0");
  }
  return errors;
}

double Sigma(const Vec2& eta, double sigma_p) { return sigma_p * eta.norm(); }

Vec2 ApplyDeadband(const Vec2& eta, double eta_t) {
  return eta.norm() < eta_t ? Vec2::Zero() : eta;
}

ControlOutput ControlStep(const ControllerState& state, const Vec3& e,
                          const Vec2& eta_meas, const Matrix& J_T_hat,
                          const Matrix& Jp_gamma, const Mat2& Ke_hat,
                          const Gains& gains) {
  if (!e.allFinite() || !eta_meas.allFinite() || !J_T_hat.allFinite() ||
      !Jp_gamma.allFinite() || !Ke_hat.allFinite() || !state.xi.allFinite()) {
    throw std::invalid_argument("control step: non-finite input");
  }
  ControlOutput out;
  out.eta = ApplyDeadband(eta_meas, gains.eta_t);
  out.sigma = Sigma(out.eta, gains.sigma_p);

  const Vec3 Kp_e = gains.K_P.asDiagonal() * e;
  // Joint-space force channel Jp^T Ke eta.
  const Vector force_channel = Jp_gamma.transpose() * (Ke_hat * out.eta);
  const Vector position_channel =
      J_T_hat.transpose() * (Kp_e + gains.K_I.asDiagonal() * state.xi);

  out.gamma_dot = gains.K_gamma.asDiagonal() * position_channel +
                  gains.K_eta.asDiagonal() * force_channel;
  const Vector inner = J_T_hat.transpose() * Kp_e + force_channel;
  out.xi_dot = -(gains.K_xi.cwiseProduct(state.xi)) +
               gains.K_I.asDiagonal() *
                   (J_T_hat * (gains.K_gamma.asDiagonal() * inner));
  out.q_r_dot = J_T_hat * (gains.K_gamma_eta.asDiagonal() * force_channel) -
                out.sigma * Kp_e;
  return out;
}

ControllerState IntegrateController(const ControllerState& state,
                                    const ControlOutput& out, double dt) {
  ControllerState next = state;
  next.xi += dt * out.xi_dot;
  next.q_r += dt * out.q_r_dot;
  return next;
}

}  // namespace flexarm
