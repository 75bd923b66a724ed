#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "flexarm/runner.hpp"

namespace flexarm::verify {

/// Central finite difference of a vector map, one column per coordinate.
Matrix FiniteDifference(const std::function<Vector(const Vector&)>& f,
                        const Vector& x, double h = 1e-6);

/// Relative Frobenius error |a - b| / max(|b|, floor).
double RelativeError(const Matrix& a, const Matrix& b, double floor = 1e-12);

/// Uniformly random joint state, angles in [-pi, pi] and deflections in
/// [-0.5, 0.5].
JointState RandomJointState(const ChainParams& params, std::uint64_t seed);

struct JacobianErrors {
  double J = 0.0;
  double J_cg_delta = 0.0;
  double dJp_delta_dgamma = 0.0;
  double dJcg_delta_dgamma = 0.0;

  double max() const;
};

/// Analytic blocks against central differences of the forward maps.
JacobianErrors CompareJacobians(const ChainParams& params, const JointState& js,
                                double h = 1e-7);

/// Frozen-Jacobian oracle of the deflection rate: central difference of
/// K^-1 (-Jp_delta^T Ke (p - p_s) + J_cg_delta^T m g0) along gamma_dot with
/// delta held at js.delta.
Vector FrozenDeflectionRate(const ChainParams& params, const ContactParams& contact,
                            const JointState& js, const Vector& gamma_dot,
                            double h = 1e-6);

/// -Theta^T Jfg gamma_dot with the true Theta.
Vector ModelDeflectionRate(const ChainParams& params, const ContactParams& contact,
                           const JointState& js, const Vector& gamma_dot);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  int jacobian_poses = 1000;
  int flex_configurations = 200;
  int noise_runs = 100;
  std::uint64_t seed = 1;
};

/// Runs the ten acceptance criteria in order.
std::vector<CriterionResult> RunAcceptance(const AcceptanceOptions& options = {});

std::string FormatResult(const CriterionResult& r);

}  // namespace flexarm::verify
