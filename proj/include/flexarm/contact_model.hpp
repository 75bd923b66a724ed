#pragma once

#include <string>
#include <vector>

#include "flexarm/types.hpp"

namespace flexarm {

/// Elastic interface. `normal` points out of the environment; `rest_point`
/// is the undeformed contact point.
struct ContactParams {
  Vec2 normal{0.0, -1.0};
  Vec2 rest_point = Vec2::Zero();
  double ke_normal = 100.0;      // N/m
  double ke_tangential = 50.0;   // N/m

  std::vector<std::string> Validate(const std::string& prefix = "contact") const;
};

struct Projectors {
  Mat2 normal;      // n n^T
  Mat2 tangential;  // I - n n^T
};

/// Normal/tangential projectors of `n`. A non-unit `n` is normalized; a
/// zero vector throws std::invalid_argument.
Projectors ComputeProjectors(const Vec2& n);

/// K_e = k_n n n^T + k_t (I - n n^T).
struct StiffnessMatrix {
  Mat2 Ke = Mat2::Zero();
  double ke_normal = 0.0;
  double ke_tangential = 0.0;

  /// (k_t)^(S_p - 1) * k_n, the closed form of det(K_e).
  double ClosedFormDeterminant() const;
};

/// Throws std::invalid_argument unless both moduli are positive. The same
/// constructor serves the true and the estimated stiffness.
StiffnessMatrix MakeStiffness(const Vec2& n, double ke_normal,
                              double ke_tangential);
StiffnessMatrix MakeStiffness(const ContactParams& cp);

/// n^T (p - p_s) <= 0.
bool IsPenetrating(const ContactParams& cp, const Vec2& p);

/// Force exerted by the end effector on the environment: K_e (p - p_s) when
/// `active`, zero otherwise. Under compression it points along -n.
Vec2 ContactForce(const ContactParams& cp, const Vec2& p, bool active);

/// Rigid-arm force rate K_e Jp_gamma gamma_dot.
Vec2 ForceRate(const Mat2& Ke, const Matrix& Jp_gamma, const Vector& gamma_dot);

}  // namespace flexarm
