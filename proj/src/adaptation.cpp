#include "flexarm/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flexarm/flex_deflection.hpp"

namespace flexarm {
namespace {

void CheckLayer(const ParameterBounds& bounds, double beta) {
  if (!(bounds.max > bounds.min)) {
    throw std::invalid_argument("projection bounds are degenerate");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw std::invalid_argument("projection beta must lie in (0, 1)");
  }
}

}  // namespace

AdaptationParams AdaptationParams::Benchmark() {
  AdaptationParams p;
  Vector six(6);
  six << 257.1, 1929, 3857, 51.43, 385.7, 771.4;
  p.Gamma_theta = ExpandGammaTheta(six, 3);
  return p;
}

Vector AdaptationParams::ExpandGammaTheta(const Vector& values, int num_flexible) {
  const int M = num_flexible;
  if (values.size() == 3 * M) return values;
  if (values.size() != 2 * M) {
    throw std::invalid_argument("Gamma_theta needs 2M or 3M entries");
  }
  Vector full(3 * M);
  full << values.head(M), values.tail(M), values.tail(M);
  return full;
}

std::vector<std::string> AdaptationParams::Validate(int num_flexible,
                                                    const std::string& prefix) const {
  std::vector<std::string> errors;
  if (Gamma_theta.size() != 3 * num_flexible) {
    errors.push_back(prefix + ".Gamma_theta needs " +
                     std::to_string(3 * num_flexible) + " entries");
  } else if (!Gamma_theta.allFinite() || (Gamma_theta.array() <= 0.0).any()) {
    errors.push_back(prefix + ".Gamma_theta entries must be > 0");
  }
  if (!(Gamma_ke_normal > 0.0)) errors.push_back(prefix + ".Gamma_ke_normal must be > 0");
  if (!(Gamma_ke_tangential > 0.0)) {
    errors.push_back(prefix + ".Gamma_ke_tangential must be > 0");
  }
  const std::pair<const ParameterBounds*, const char*> all[] = {
      {&bounds_normal, "bounds_normal"}, {&bounds_tangential, "bounds_tangential"}};
  for (const auto& [b, name] : all) {
    if (!(b->min > 0.0)) {
      errors.push_back(prefix + "." + name + ".min (k_m) must be > 0");
    }
    if (!(b->max > b->min)) {
      errors.push_back(prefix + "." + name + ": k_m must be below k_M");
    }
  }
  if (!(beta > 0.0 && beta < 1.0)) errors.push_back(prefix + ".beta must lie in (0, 1)");
  return errors;
}

double Rho(double kappa_hat, const ParameterBounds& bounds, double beta) {
  CheckLayer(bounds, beta);
  const double h = bounds.half_width();
  const double d = kappa_hat - bounds.center();
  const double b2 = beta * beta;
  return d * d / ((1.0 - b2) * h * h) - b2 / (1.0 - b2);
}

double RhoDerivative(double kappa_hat, const ParameterBounds& bounds, double beta) {
  CheckLayer(bounds, beta);
  const double h = bounds.half_width();
  return 2.0 * (kappa_hat - bounds.center()) / ((1.0 - beta * beta) * h * h);
}

double Project(double varpi, double kappa_hat, const ParameterBounds& bounds,
               double beta) {
  if (!bounds.Contains(kappa_hat)) {
    throw std::logic_error("projected parameter left its bounds");
  }
  const double rho = Rho(kappa_hat, bounds, beta);
  if (rho > 0.0 && RhoDerivative(kappa_hat, bounds, beta) * varpi > 0.0) {
    return (1.0 - rho) * varpi;
  }
  return varpi;
}

KeRates KeUpdate(const Vec2& eta, const Projectors& proj, const Matrix& Jp_gamma,
                 const Vector& gamma_dot, const AdaptationParams& params,
                 const AdaptiveState& state) {
  const Vec2 velocity = Jp_gamma * gamma_dot;
  KeRates r;
  r.varpi_normal = -params.Gamma_ke_normal * eta.dot(proj.normal * velocity);
  r.varpi_tangential =
      -params.Gamma_ke_tangential * eta.dot(proj.tangential * velocity);
  r.normal = Project(r.varpi_normal, state.ke_hat_normal, params.bounds_normal,
                     params.beta);
  r.tangential = Project(r.varpi_tangential, state.ke_hat_tangential,
                         params.bounds_tangential, params.beta);
  return r;
}

Matrix ThetaUpdate(const Matrix& Jfg, const Vector& gamma_dot, const Vec3& e,
                   const Vec3& K_P, const Matrix& J_delta,
                   const Vector& Gamma_theta) {
  const Vector left = Gamma_theta.asDiagonal() * (Jfg * gamma_dot);
  const Eigen::RowVectorXd right =
      (K_P.asDiagonal() * e).transpose() * J_delta;
  return left * right;
}

AdaptiveState IntegrateAdaptation(const AdaptiveState& state,
                                  const Matrix& theta_dot, const KeRates& rates,
                                  double dt, const AdaptationParams& params) {
  AdaptiveState next = state;
  next.theta_hat += dt * theta_dot;
  next.ke_hat_normal =
      std::clamp(state.ke_hat_normal + dt * rates.normal,
                 params.bounds_normal.min, params.bounds_normal.max);
  next.ke_hat_tangential =
      std::clamp(state.ke_hat_tangential + dt * rates.tangential,
                 params.bounds_tangential.min, params.bounds_tangential.max);
  return next;
}

AdaptiveState InitialAdaptiveState(const Vector& nominal_stiffness,
                                   const AdaptationParams& params) {
  AdaptiveState s;
  s.ke_hat_normal = params.bounds_normal.center();
  s.ke_hat_tangential = params.bounds_tangential.center();
  s.theta_hat =
      ThetaFrom(nominal_stiffness, s.ke_hat_normal, s.ke_hat_tangential);
  return s;
}

}  // namespace flexarm
