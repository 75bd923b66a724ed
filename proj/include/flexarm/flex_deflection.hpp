#pragma once

#include <stdexcept>
#include <string>

#include "flexarm/chain_kinematics.hpp"
#include "flexarm/contact_model.hpp"

namespace flexarm {

/// The pseudo-static deflection solve did not converge. Usually the flexible
/// stiffness is too low for the applied load.
class DeflectionDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DeflectionMethod {
  kNewton,      // full nonlinear Newton on the static residual
  kFixedPoint,  // delta <- K^-1 (-Jp_delta^T f + g_delta)
};

struct DeflectionSolveOptions {
  DeflectionMethod method = DeflectionMethod::kNewton;
  double tolerance = 1e-10;  // inf-norm of successive iterates, rad
  int max_iterations = 100;
};

struct StaticDeflection {
  Vector delta;
  Vec2 force = Vec2::Zero();  // contact force at the solution
  bool contact_active = false;
  // Fraction of the tangential spring carried at a grazing contact, where
  // neither the free nor the fully engaged solution is self-consistent.
  double tangential_scale = 1.0;
  int iterations = 0;
};

/// Gravity torque on the flexible joints, J_cg_delta^T m g0.
Vector GravityTorque(const ChainParams& params, const JacobianSet& jac);

/// K delta + Jp_delta^T f - g_delta at the given state, with f evaluated
/// from the contact model (penetration test included).
Vector StaticResidual(const ChainParams& params, const ContactParams* contact,
                      const JointState& js);

/// Deflection that balances the flexible springs against contact and
/// gravity loads for the actuated angles `gamma`. `contact` may be null (no
/// interface). `seed` and `contact_hint` come from the previous plant step.
StaticDeflection SolveStaticDeflection(const ChainParams& params,
                                       const ContactParams* contact,
                                       const Vector& gamma, const Vector& seed,
                                       bool contact_hint = false,
                                       const DeflectionSolveOptions& options = {});

/// Compound force/gravity Jacobian (3M x N): normal-force, tangential-force
/// and gravity block rows. The force blocks vanish when `contact_active` is
/// false or `contact` is null.
Matrix ComputeJfg(const ChainParams& params, const ContactParams* contact,
                  bool contact_active, const Vec2& p, const JacobianSet& jac);

/// Theta (3M x M) such that the frozen-Jacobian deflection rate is
/// -Theta^T Jfg gamma_dot, i.e. Theta^T = K^-1 [k_n I | k_t I | I].
Matrix ThetaFrom(const Vector& stiffness, double ke_normal, double ke_tangential);

/// J_gamma - J_delta Theta_hat^T Jfg.
Matrix EstimatedTaskJacobian(const JacobianSet& jac, const Matrix& theta_hat,
                             const Matrix& Jfg);

struct FlexModel {
  Vector stiffness;  // diagonal of K
  Matrix theta_true;

  static FlexModel From(const ChainParams& params, const ContactParams& contact);
};

}  // namespace flexarm
