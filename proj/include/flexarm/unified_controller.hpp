#pragma once

#include <string>
#include <vector>

#include "flexarm/types.hpp"

namespace flexarm {

/// Diagonal gains of the unified motion/force law.
struct Gains {
  Vec3 K_P{0.5949, 0.5949, 0.0214};
  Vec3 K_I{0.1610, 0.1610, 0.0024};
  Vec3 K_xi{0.1200, 0.1200, 0.1200};
  Vector K_gamma;      // N
  Vector K_eta;        // N
  Vector K_gamma_eta;  // N, reference-shaping gain of the force loop
  double sigma_p = 0.3;
  double eta_t = 0.03;  // force-error deadband, N

  /// Benchmark gains for the four-actuator arm. K_gamma_eta = K_gamma + K_eta.
  static Gains Benchmark();

  std::vector<std::string> Validate(int num_actuated,
                                    const std::string& prefix = "gains") const;
};

struct ControllerState {
  Vec3 xi = Vec3::Zero();   // integral action
  Vec3 q_r = Vec3::Zero();  // task reference (x, y, alpha)
  Vec2 f_r = Vec2::Zero();  // force reference, N
};

struct ControlOutput {
  Vector gamma_dot;  // rad/s
  Vec3 xi_dot = Vec3::Zero();
  Vec3 q_r_dot = Vec3::Zero();
  Vec2 eta = Vec2::Zero();  // force error after the deadband
  double sigma = 0.0;
};

/// sigma_p * |eta|.
double Sigma(const Vec2& eta, double sigma_p);

/// Zero when |eta| < eta_t.
Vec2 ApplyDeadband(const Vec2& eta, double eta_t);

/// One evaluation of the control law.
///
///   xi_dot    = -K_xi xi + K_I J_T K_gamma (J_T^T K_P e + Jp^T Ke eta)
///   gamma_dot = K_gamma J_T^T (K_P e + K_I xi) + K_eta Jp^T Ke eta
///   q_r_dot   = J_T K_gamma_eta Jp^T Ke eta - sigma(|eta|) K_P e
///
/// with e = q_r - q and eta = f_r - f deadbanded first. Throws
/// std::invalid_argument on non-finite inputs.
ControlOutput ControlStep(const ControllerState& state, const Vec3& e,
                          const Vec2& eta_meas, const Matrix& J_T_hat,
                          const Matrix& Jp_gamma, const Mat2& Ke_hat,
                          const Gains& gains);

/// Explicit Euler update of xi and q_r.
ControllerState IntegrateController(const ControllerState& state,
                                    const ControlOutput& out, double dt);

}  // namespace flexarm
