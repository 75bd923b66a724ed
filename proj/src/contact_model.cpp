#include "flexarm/contact_model.hpp"

#include <cmath>
#include <stdexcept>

namespace flexarm {

std::vector<std::string> ContactParams::Validate(const std::string& prefix) const {
  std::vector<std::string> errors;
  if (!normal.allFinite() || normal.norm() == 0.0) {
    errors.push_back(prefix + ".normal must be a finite non-zero vector");
  }
  if (!rest_point.allFinite()) {
    errors.push_back(prefix + ".rest_point must be finite");
  }
  if (!(ke_normal > 0.0) || !std::isfinite(ke_normal)) {
    errors.push_back(prefix + ".ke_normal must be > 0");
  }
  if (!(ke_tangential > 0.0) || !std::isfinite(ke_tangential)) {
    errors.push_back(prefix + ".ke_tangential must be > 0");
  }
  return errors;
}

Projectors ComputeProjectors(const Vec2& n) {
  const double norm = n.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("contact normal has zero or non-finite norm");
  }
  const Vec2 u = std::abs(norm - 1.0) <= 1e-12 ? n : Vec2(n / norm);
  Projectors out;
  out.normal = u * u.transpose();
  out.tangential = Mat2::Identity() - out.normal;
  return out;
}

double StiffnessMatrix::ClosedFormDeterminant() const {
  return std::pow(ke_tangential, kPosDim - 1) * ke_normal;
}

StiffnessMatrix MakeStiffness(const Vec2& n, double ke_normal,
                              double ke_tangential) {
  if (!(ke_normal > 0.0) || !(ke_tangential > 0.0)) {
    throw std::invalid_argument("contact moduli must be positive");
  }
  const Projectors proj = ComputeProjectors(n);
  StiffnessMatrix s;
  s.Ke = ke_normal * proj.normal + ke_tangential * proj.tangential;
  s.ke_normal = ke_normal;
  s.ke_tangential = ke_tangential;
  return s;
}

StiffnessMatrix MakeStiffness(const ContactParams& cp) {
  return MakeStiffness(cp.normal, cp.ke_normal, cp.ke_tangential);
}

bool IsPenetrating(const ContactParams& cp, const Vec2& p) {
  return cp.normal.dot(p - cp.rest_point) <= 0.0;
}

Vec2 ContactForce(const ContactParams& cp, const Vec2& p, bool active) {
  if (!active) return Vec2::Zero();
  return MakeStiffness(cp).Ke * (p - cp.rest_point);
}

Vec2 ForceRate(const Mat2& Ke, const Matrix& Jp_gamma, const Vector& gamma_dot) {
  return Ke * (Jp_gamma * gamma_dot);
}

}  // namespace flexarm
