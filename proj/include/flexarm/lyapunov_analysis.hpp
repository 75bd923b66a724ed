#pragma once

#include "flexarm/adaptation.hpp"
#include "flexarm/chain_kinematics.hpp"
#include "flexarm/unified_controller.hpp"

namespace flexarm {

/// x = col(xi, e, eta).
inline constexpr int kClosedLoopDim = 2 * kTaskDim + kPosDim;

/// Closed-loop state matrix of the estimated error dynamics, built from the
/// control law as implemented:
///
///   [ -K_xi            K_I JT K_P           K_I JTg Ke         ]
///   [ -JT K_I          -(JT + sigma) K_P    J_T (K_ge-K_eta) Jp^T Ke ]
///   [ -Ke JTg^T K_I    -Ke JTg^T K_P        -Ke Jg Ke          ]
///
/// with JT = J_T K_gamma J_T^T, JTg = J_T K_gamma Jp^T, Jg = Jp K_eta Jp^T.
/// The (2,3) block equals JTg Ke exactly when K_gamma_eta = K_gamma + K_eta.
Matrix AssembleAHat(const Matrix& J_T_hat, const Matrix& Jp_gamma,
                    const Mat2& Ke_hat, const Gains& gains, double sigma);

/// Parameter-error input matrix, x_dot = A x + B gamma_dot:
/// rows (0, J_delta Theta_tilde^T Jfg, -Ke_tilde Jp_gamma).
Matrix AssembleBTilde(const Matrix& J_delta, const Matrix& Jfg,
                      const Matrix& theta_tilde, const Mat2& Ke_tilde,
                      const Matrix& Jp_gamma);

struct Certificate {
  double V = 0.0;
  double V_state = 0.0;   // 1/2 |x|^2 weighted by diag(I, K_P, I)
  double V_theta = 0.0;   // 1/2 Tr(Theta~^T Gamma^-1 Theta~)
  double V_ke = 0.0;      // 1/2 |ke~|^2 weighted by Gamma_e^-1
  double Vdot_bound = 0.0;
  Eigen::Matrix<double, kClosedLoopDim, 1> x =
      Eigen::Matrix<double, kClosedLoopDim, 1>::Zero();
  RankMargins rank_margins;
};

Eigen::Matrix<double, kClosedLoopDim, 1> StackState(const Vec3& xi, const Vec3& e,
                                                    const Vec2& eta);

/// V; needs the true parameters, so only available in simulation.
Certificate LyapunovValue(const Eigen::Matrix<double, kClosedLoopDim, 1>& x,
                          const Matrix& theta_tilde, const Vec2& ke_tilde,
                          const Gains& gains, const AdaptationParams& adaptation);

/// -xi^T K_xi xi - eb^T (JT + sigma) eb - eta^T Ke Jg Ke eta with eb = K_P e,
/// evaluated as weighted sums of squares so it is never positive.
double VdotBound(const Vec3& xi, const Vec3& e, const Vec2& eta,
                 const Matrix& J_T_hat, const Matrix& Jp_gamma,
                 const Mat2& Ke_hat, const Gains& gains, double sigma);

/// -ke~^T Gamma_e^-1 (Proj(varpi) - varpi); the proof needs it <= 0.
double ProjectionCorrection(const Vec2& ke_tilde, const KeRates& rates,
                            const AdaptationParams& adaptation);

}  // namespace flexarm
