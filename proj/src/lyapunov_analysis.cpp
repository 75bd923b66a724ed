#include "flexarm/lyapunov_analysis.hpp"

namespace flexarm {

Matrix AssembleAHat(const Matrix& J_T_hat, const Matrix& Jp_gamma,
                    const Mat2& Ke_hat, const Gains& gains, double sigma) {
  const Matrix Kg = gains.K_gamma.asDiagonal();
  const Matrix JT = J_T_hat * Kg * J_T_hat.transpose();
  const Matrix JTg = J_T_hat * Kg * Jp_gamma.transpose();
  const Matrix Jg = Jp_gamma * gains.K_eta.asDiagonal() * Jp_gamma.transpose();
  const Matrix KP = gains.K_P.asDiagonal();
  const Matrix KI = gains.K_I.asDiagonal();
  const Matrix I3 = Matrix::Identity(kTaskDim, kTaskDim);
  const Vector shaping = gains.K_gamma_eta - gains.K_eta;

  Matrix A = Matrix::Zero(kClosedLoopDim, kClosedLoopDim);
  A.block(0, 0, 3, 3) = -Matrix(gains.K_xi.asDiagonal());
  A.block(0, 3, 3, 3) = KI * JT * KP;
  A.block(0, 6, 3, 2) = KI * JTg * Ke_hat;
  A.block(3, 0, 3, 3) = -JT * KI;
  A.block(3, 3, 3, 3) = -(JT + sigma * I3) * KP;
  A.block(3, 6, 3, 2) =
      J_T_hat * shaping.asDiagonal() * Jp_gamma.transpose() * Ke_hat;
  A.block(6, 0, 2, 3) = -Ke_hat * JTg.transpose() * KI;
  A.block(6, 3, 2, 3) = -Ke_hat * JTg.transpose() * KP;
  A.block(6, 6, 2, 2) = -Ke_hat * Jg * Ke_hat;
  return A;
}

Matrix AssembleBTilde(const Matrix& J_delta, const Matrix& Jfg,
                      const Matrix& theta_tilde, const Mat2& Ke_tilde,
                      const Matrix& Jp_gamma) {
  const int N = static_cast<int>(Jp_gamma.cols());
  Matrix B = Matrix::Zero(kClosedLoopDim, N);
  B.middleRows(3, 3) = J_delta * theta_tilde.transpose() * Jfg;
  B.bottomRows(2) = -Ke_tilde * Jp_gamma;
  return B;
}

Eigen::Matrix<double, kClosedLoopDim, 1> StackState(const Vec3& xi, const Vec3& e,
                                                    const Vec2& eta) {
  Eigen::Matrix<double, kClosedLoopDim, 1> x;
  x << xi, e, eta;
  return x;
}

Certificate LyapunovValue(const Eigen::Matrix<double, kClosedLoopDim, 1>& x,
                          const Matrix& theta_tilde, const Vec2& ke_tilde,
                          const Gains& gains, const AdaptationParams& adaptation) {
  Certificate c;
  c.x = x;
  const Vec3 xi = x.segment<3>(0);
  const Vec3 e = x.segment<3>(3);
  const Vec2 eta = x.segment<2>(6);
  c.V_state = 0.5 * (xi.squaredNorm() + e.dot(gains.K_P.asDiagonal() * e) +
                     eta.squaredNorm());
  // Tr(Θ~^T Γ^-1 Θ~) = Σ_ij Θ~_ij^2 / Γ_i.
  c.V_theta = 0.5 * (theta_tilde.array().square().colwise() /
                     adaptation.Gamma_theta.array())
                        .sum();
  c.V_ke = 0.5 * (ke_tilde.x() * ke_tilde.x() / adaptation.Gamma_ke_normal +
                  ke_tilde.y() * ke_tilde.y() / adaptation.Gamma_ke_tangential);
  c.V = c.V_state + c.V_theta + c.V_ke;
  return c;
}

double VdotBound(const Vec3& xi, const Vec3& e, const Vec2& eta,
                 const Matrix& J_T_hat, const Matrix& Jp_gamma,
                 const Mat2& Ke_hat, const Gains& gains, double sigma) {
  const Vec3 eb = gains.K_P.asDiagonal() * e;
  const Vector u = J_T_hat.transpose() * eb;
  const Vector w = Jp_gamma.transpose() * (Ke_hat * eta);
  const double xi_term = (gains.K_xi.array() * xi.array().square()).sum();
  const double e_term = (gains.K_gamma.array() * u.array().square()).sum() +
                        sigma * eb.squaredNorm();
  const double eta_term = (gains.K_eta.array() * w.array().square()).sum();
  return -(xi_term + e_term + eta_term);
}

double ProjectionCorrection(const Vec2& ke_tilde, const KeRates& rates,
                            const AdaptationParams& adaptation) {
  return -(ke_tilde.x() * (rates.normal - rates.varpi_normal) /
               adaptation.Gamma_ke_normal +
           ke_tilde.y() * (rates.tangential - rates.varpi_tangential) /
               adaptation.Gamma_ke_tangential);
}

}  // namespace flexarm
