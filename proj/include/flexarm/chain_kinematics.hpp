#pragma once

#include <string>
#include <vector>

#include "flexarm/types.hpp"

namespace flexarm {

/// Actuated joint + link l + flexible joint + link L.
struct CompoundJoint {
  double l = 0.048;      // m
  double L = 0.062;      // m
  double l_cg = 0.024;   // m, from the actuated joint
  double L_cg = 0.036;   // m, from the flexible joint
  double m = 0.025;      // kg
  double M = 0.064;      // kg
  double k = 0.8;        // N*m/rad
};

/// Final actuated joint and the tool link.
struct EndEffectorLink {
  double l = 0.12;
  double l_cg = 0.06;
  double m = 0.072;
};

/// Geometry and inertial data of the alternating actuated/flexible chain.
///
/// The chain reads γ1, l, δ1, L, γ2, l, δ2, L, ..., γN, l_EE with
/// N = compound.size() + 1 actuated and M = compound.size() flexible joints.
/// All quantities are SI.
struct ChainParams {
  std::vector<CompoundJoint> compound;
  EndEffectorLink ee;
  Vec2 g0 = Vec2::Zero();  // arm moving in a horizontal plane

  /// Benchmark arm: three compound joints plus the end-effector link.
  static ChainParams Benchmark();

  int num_actuated() const { return static_cast<int>(compound.size()) + 1; }
  int num_flexible() const { return static_cast<int>(compound.size()); }
  int num_joints() const { return num_actuated() + num_flexible(); }
  double total_mass() const;
  /// Diagonal of the flexible stiffness matrix K.
  Vector stiffness() const;

  /// Invariant violations, empty when valid. Field names are prefixed with
  /// `prefix`.
  std::vector<std::string> Validate(const std::string& prefix = "chain") const;
};

struct JointState {
  Vector gamma;  // actuated angles, rad
  Vector delta;  // flexible deflections, rad
};

struct TaskPose {
  Vec2 p = Vec2::Zero();
  double alpha = 0.0;

  Vec3 q() const { return {p.x(), p.y(), alpha}; }
};

/// Analytic Jacobians at one joint state. Column order of J is col(γ, δ).
struct JacobianSet {
  Matrix J;             // S x (N+M)
  Matrix J_gamma;       // S x N
  Matrix J_delta;       // S x M
  Matrix Jp_gamma;      // 2 x N
  Matrix Jp_delta;      // 2 x M
  Matrix Jalpha_gamma;  // 1 x N
  Matrix Jalpha_delta;  // 1 x M
  Matrix J_cg_delta;    // 2 x M, Jacobian of the mass-weighted CG
  // Slice j is d(Jp_delta)/d(gamma_j), resp. d(J_cg_delta)/d(gamma_j).
  std::vector<Matrix> dJp_delta_dgamma;
  std::vector<Matrix> dJcg_delta_dgamma;
};

struct CenterOfMass {
  Vec2 position = Vec2::Zero();
  double total_mass = 0.0;
};

TaskPose ForwardKinematics(const ChainParams& params, const JointState& js);

CenterOfMass ComputeCenterOfMass(const ChainParams& params,
                                 const JointState& js);

JacobianSet ComputeJacobians(const ChainParams& params, const JointState& js);

/// Slices d(Jp_delta)/d(delta_j) and d(J_cg_delta)/d(delta_j); used by the
/// Newton step of the static deflection solve.
void DeltaDerivatives(const ChainParams& params, const JointState& js,
                      std::vector<Matrix>* dJp_delta_ddelta,
                      std::vector<Matrix>* dJcg_delta_ddelta);

struct RankMargins {
  double J = 0.0;         // smallest singular value of J (S x (N+M))
  double Jp_gamma = 0.0;  // smallest singular value of Jp_gamma
};

/// Smallest singular values; zero means rank loss.
RankMargins ComputeRankMargins(const JacobianSet& jac);

}  // namespace flexarm
