#include "flexarm/flex_deflection.hpp"

#include <cmath>
#include <sstream>

namespace flexarm {
namespace {

enum class Engagement { kFree, kFull, kGrazing };

struct Load {
  Vec2 force = Vec2::Zero();
  Mat2 stiffness = Mat2::Zero();  // d force / d p
};

Load ContactLoad(const ContactParams* contact, const Vec2& p,
                 Engagement mode, double tangential_scale) {
  Load load;
  if (contact == nullptr || mode == Engagement::kFree) return load;
  const Projectors proj = ComputeProjectors(contact->normal);
  const double kt = mode == Engagement::kGrazing
                        ? tangential_scale * contact->ke_tangential
                        : contact->ke_tangential;
  load.stiffness = contact->ke_normal * proj.normal + kt * proj.tangential;
  load.force = load.stiffness * (p - contact->rest_point);
  return load;
}

struct Attempt {
  bool converged = false;
  Vector delta;
  Vec2 force = Vec2::Zero();
  double penetration = 0.0;  // n^T (p - p_s), 0 without interface
  int iterations = 0;
};

Attempt NewtonSolve(const ChainParams& params, const ContactParams* contact,
                    const Vector& gamma, const Vector& seed, Engagement mode,
                    double tangential_scale,
                    const DeflectionSolveOptions& options) {
  const int M = params.num_flexible();
  const Vector K = params.stiffness();
  const Vec2 weight = params.total_mass() * params.g0;
  JointState js{gamma, seed};
  Attempt out;
  std::vector<Matrix> dJp, dJcg;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const TaskPose pose = ForwardKinematics(params, js);
    const JacobianSet jac = ComputeJacobians(params, js);
    const Load load = ContactLoad(contact, pose.p, mode, tangential_scale);
    const Vector residual = K.asDiagonal() * js.delta +
                            jac.Jp_delta.transpose() * load.force -
                            jac.J_cg_delta.transpose() * weight;
    DeltaDerivatives(params, js, &dJp, &dJcg);
    Matrix jr = Matrix(K.asDiagonal()) +
                jac.Jp_delta.transpose() * load.stiffness * jac.Jp_delta;
    for (int i = 0; i < M; ++i) {
      jr.col(i) += dJp[i].transpose() * load.force -
                   dJcg[i].transpose() * weight;
    }
    const Vector step = jr.partialPivLu().solve(residual);
    if (!step.allFinite()) break;
    js.delta -= step;
    out.iterations = it;
    if (step.lpNorm<Eigen::Infinity>() < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.delta = js.delta;
  const TaskPose pose = ForwardKinematics(params, js);
  out.force = ContactLoad(contact, pose.p, mode, tangential_scale).force;
  if (contact != nullptr) {
    out.penetration = contact->normal.dot(pose.p - contact->rest_point);
  }
  return out;
}

// Plain fixed point; the contact state is re-evaluated every iterate.
Attempt FixedPointSolve(const ChainParams& params, const ContactParams* contact,
                        const Vector& gamma, const Vector& seed,
                        const DeflectionSolveOptions& options) {
  const Vector K = params.stiffness();
  const Vec2 weight = params.total_mass() * params.g0;
  JointState js{gamma, seed};
  Attempt out;
  for (int it = 1; it <= options.max_iterations; ++it) {
    const TaskPose pose = ForwardKinematics(params, js);
    const JacobianSet jac = ComputeJacobians(params, js);
    const bool active = contact != nullptr && IsPenetrating(*contact, pose.p);
    const Vec2 f = active ? ContactForce(*contact, pose.p, true) : Vec2::Zero();
    const Vector next = (-jac.Jp_delta.transpose() * f +
                         jac.J_cg_delta.transpose() * weight)
                            .cwiseQuotient(K);
    const double change = (next - js.delta).lpNorm<Eigen::Infinity>();
    js.delta = next;
    out.iterations = it;
    if (!next.allFinite()) break;
    if (change < options.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.delta = js.delta;
  const TaskPose pose = ForwardKinematics(params, js);
  const bool active = contact != nullptr && IsPenetrating(*contact, pose.p);
  out.force = active ? ContactForce(*contact, pose.p, true) : Vec2::Zero();
  if (contact != nullptr) {
    out.penetration = contact->normal.dot(pose.p - contact->rest_point);
  }
  return out;
}

[[noreturn]] void Diverged(const Vector& gamma, const std::string& what) {
  std::ostringstream msg;
  msg << "static deflection solve did not converge (" << what
      << ") at gamma = [" << gamma.transpose() << "]";
  throw DeflectionDivergence(msg.str());
}

}  // namespace

Vector GravityTorque(const ChainParams& params, const JacobianSet& jac) {
  return jac.J_cg_delta.transpose() * (params.total_mass() * params.g0);
}

Vector StaticResidual(const ChainParams& params, const ContactParams* contact,
                      const JointState& js) {
  const TaskPose pose = ForwardKinematics(params, js);
  const JacobianSet jac = ComputeJacobians(params, js);
  const bool active = contact != nullptr && IsPenetrating(*contact, pose.p);
  const Vec2 f = active ? ContactForce(*contact, pose.p, true) : Vec2::Zero();
  return params.stiffness().asDiagonal() * js.delta +
         jac.Jp_delta.transpose() * f - GravityTorque(params, jac);
}

StaticDeflection SolveStaticDeflection(const ChainParams& params,
                                       const ContactParams* contact,
                                       const Vector& gamma, const Vector& seed,
                                       bool contact_hint,
                                       const DeflectionSolveOptions& options) {
  if (seed.size() != params.num_flexible() ||
      gamma.size() != params.num_actuated()) {
    throw std::invalid_argument("deflection solve: dimension mismatch");
  }
  StaticDeflection out;
  if (options.method == DeflectionMethod::kFixedPoint) {
    const Attempt a = FixedPointSolve(params, contact, gamma, seed, options);
    if (!a.converged) Diverged(gamma, "fixed point");
    out.delta = a.delta;
    out.force = a.force;
    out.contact_active = contact != nullptr && a.penetration <= 0.0;
    out.iterations = a.iterations;
    return out;
  }

  auto consistent = [](const Attempt& a, bool engaged) {
    return a.converged && ((a.penetration <= 0.0) == engaged);
  };
  auto accept = [&](const Attempt& a, bool engaged, double scale) {
    out.delta = a.delta;
    out.force = a.force;
    out.contact_active = engaged;
    out.tangential_scale = scale;
    return out;
  };

  if (contact == nullptr) {
    const Attempt a =
        NewtonSolve(params, nullptr, gamma, seed, Engagement::kFree, 1.0, options);
    if (!a.converged) Diverged(gamma, "free space");
    out.iterations = a.iterations;
    return accept(a, false, 1.0);
  }

  const bool first = contact_hint;
  for (const bool engaged : {first, !first}) {
    const Attempt a =
        NewtonSolve(params, contact, gamma, seed,
                    engaged ? Engagement::kFull : Engagement::kFree, 1.0, options);
    out.iterations += a.iterations;
    if (consistent(a, engaged)) return accept(a, engaged, 1.0);
  }

  // Grazing: the tangential spring switches on discontinuously, so neither
  // branch is self-consistent. Find the partial tangential load that leaves
  // the tip exactly on the surface.
  double lo = 0.0, hi = 1.0;
  Attempt best = NewtonSolve(params, contact, gamma, seed, Engagement::kGrazing,
                             0.0, options);
  if (!best.converged || best.penetration > 0.0) {
    Diverged(gamma, "grazing contact");
  }
  double best_scale = 0.0;
  for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const Attempt a = NewtonSolve(params, contact, gamma, best.delta,
                                  Engagement::kGrazing, mid, options);
    if (!a.converged) Diverged(gamma, "grazing contact");
    if (a.penetration <= 0.0) {
      lo = mid;
      best = a;
      best_scale = mid;
    } else {
      hi = mid;
    }
  }
  return accept(best, true, best_scale);
}

Matrix ComputeJfg(const ChainParams& params, const ContactParams* contact,
                  bool contact_active, const Vec2& p, const JacobianSet& jac) {
  const int N = params.num_actuated();
  const int M = params.num_flexible();
  Matrix jfg = Matrix::Zero(3 * M, N);
  if (contact != nullptr && contact_active) {
    const Projectors proj = ComputeProjectors(contact->normal);
    const Vec2 dp = p - contact->rest_point;
    const Mat2* blocks[2] = {&proj.normal, &proj.tangential};
    for (int b = 0; b < 2; ++b) {
      const Mat2& P = *blocks[b];
      const Vec2 deformation = P * dp;
      auto rows = jfg.middleRows(b * M, M);
      rows = jac.Jp_delta.transpose() * P * jac.Jp_gamma;
      for (int k = 0; k < N; ++k) {
        rows.col(k) += jac.dJp_delta_dgamma[k].transpose() * deformation;
      }
    }
  }
  const Vec2 weight = params.total_mass() * params.g0;
  for (int k = 0; k < N; ++k) {
    jfg.block(2 * M, k, M, 1) = -jac.dJcg_delta_dgamma[k].transpose() * weight;
  }
  return jfg;
}

Matrix ThetaFrom(const Vector& stiffness, double ke_normal, double ke_tangential) {
  if ((stiffness.array() == 0.0).any() || !stiffness.allFinite()) {
    throw std::invalid_argument("flexible stiffness matrix is singular");
  }
  const int M = static_cast<int>(stiffness.size());
  const Vector inv = stiffness.cwiseInverse();
  Matrix theta = Matrix::Zero(3 * M, M);
  theta.topRows(M).diagonal() = ke_normal * inv;
  theta.middleRows(M, M).diagonal() = ke_tangential * inv;
  theta.bottomRows(M).diagonal() = inv;
  return theta;
}

Matrix EstimatedTaskJacobian(const JacobianSet& jac, const Matrix& theta_hat,
                             const Matrix& Jfg) {
  return jac.J_gamma - jac.J_delta * (theta_hat.transpose() * Jfg);
}

FlexModel FlexModel::From(const ChainParams& params, const ContactParams& contact) {
  FlexModel model;
  model.stiffness = params.stiffness();
  model.theta_true =
      ThetaFrom(model.stiffness, contact.ke_normal, contact.ke_tangential);
  return model;
}

}  // namespace flexarm
