#pragma once

#include <string>
#include <vector>

#include "flexarm/contact_model.hpp"

namespace flexarm {

struct ParameterBounds {
  double min = 0.0040;
  double max = 0.0120;

  double center() const { return 0.5 * (max + min); }
  double half_width() const { return 0.5 * (max - min); }
  bool Contains(double v) const { return v >= min && v <= max; }
};

/// Adaptation gains and projection set-up.
struct AdaptationParams {
  Vector Gamma_theta;  // 3M diagonal entries
  double Gamma_ke_normal = 0.0040;
  double Gamma_ke_tangential = 0.0020;
  ParameterBounds bounds_normal;
  ParameterBounds bounds_tangential;
  double beta = 0.4;

  /// Six benchmark values: 1-3 weight the normal-force rows, 4-6 the
  /// tangential rows, and 4-6 again the gravity rows.
  static AdaptationParams Benchmark();
  /// Expands 2M values (normal rows, then tangential rows) to the 3M
  /// diagonal as above; 3M values pass through.
  static Vector ExpandGammaTheta(const Vector& six_or_full, int num_flexible);

  std::vector<std::string> Validate(int num_flexible,
                                    const std::string& prefix = "adaptation") const;
};

struct AdaptiveState {
  Matrix theta_hat;  // 3M x M
  double ke_hat_normal = 0.008;
  double ke_hat_tangential = 0.008;
};

/// Convex boundary function; equals 1 on both bounds and -beta^2/(1-beta^2)
/// at the centre. Throws std::invalid_argument for degenerate bounds or
/// beta outside (0, 1).
double Rho(double kappa_hat, const ParameterBounds& bounds, double beta);
double RhoDerivative(double kappa_hat, const ParameterBounds& bounds, double beta);

/// Projected rate: (1 - rho) * varpi inside the boundary layer when varpi
/// points outward, varpi otherwise. Throws std::logic_error when kappa_hat
/// is already outside the bounds.
double Project(double varpi, double kappa_hat, const ParameterBounds& bounds,
               double beta);

struct KeRates {
  double varpi_normal = 0.0;
  double varpi_tangential = 0.0;
  double normal = 0.0;  // projected
  double tangential = 0.0;
};

/// varpi = -Gamma eta^T N Jp_gamma gamma_dot per channel, then projected.
/// `eta` is the deadbanded force error used by the controller.
KeRates KeUpdate(const Vec2& eta, const Projectors& proj, const Matrix& Jp_gamma,
                 const Vector& gamma_dot, const AdaptationParams& params,
                 const AdaptiveState& state);

/// Gamma_Theta Jfg gamma_dot e^T K_P J_delta (rank one).
Matrix ThetaUpdate(const Matrix& Jfg, const Vector& gamma_dot, const Vec3& e,
                   const Vec3& K_P, const Matrix& J_delta,
                   const Vector& Gamma_theta);

/// Euler step. The stiffness estimates are clamped to their bounds, which
/// only absorbs the overshoot of a finite step near the boundary.
AdaptiveState IntegrateAdaptation(const AdaptiveState& state,
                                  const Matrix& theta_dot, const KeRates& rates,
                                  double dt, const AdaptationParams& params);

/// Initial estimate: Theta from the nominal stiffness and mid-range moduli.
AdaptiveState InitialAdaptiveState(const Vector& nominal_stiffness,
                                   const AdaptationParams& params);

}  // namespace flexarm
