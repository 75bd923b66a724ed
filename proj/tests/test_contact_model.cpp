#include <cmath>

#include "doctest.h"

#include "flexarm/chain_kinematics.hpp"
#include "flexarm/contact_model.hpp"
#include "flexarm/verification.hpp"

using namespace flexarm;

TEST_CASE("projectors for an axis-aligned normal") {
  const Projectors p = ComputeProjectors({1.0, 0.0});
  CHECK(p.normal.isApprox((Mat2() << 1, 0, 0, 0).finished()));
  CHECK(p.tangential.isApprox((Mat2() << 0, 0, 0, 1).finished()));
  CHECK((p.normal + p.tangential).isApprox(Mat2::Identity()));
}

TEST_CASE("projectors for a diagonal normal") {
  const double r = 1.0 / std::sqrt(2.0);
  const Projectors p = ComputeProjectors({r, r});
  CHECK((p.normal - Mat2::Constant(0.5)).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.tangential(0, 1) == doctest::Approx(-0.5));
}

TEST_CASE("projectors are idempotent, complementary and normalize the input") {
  for (double a = -3.0; a < 3.2; a += 0.37) {
    const Vec2 n(std::cos(a), std::sin(a));
    const Projectors p = ComputeProjectors(3.5 * n);
    CHECK((p.normal * p.normal - p.normal).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p.tangential * p.tangential - p.tangential).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p.normal * p.tangential).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((p.normal * n - n).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(ComputeProjectors(Vec2::Zero()), std::invalid_argument);
}

TEST_CASE("equal moduli give an isotropic stiffness") {
  const StiffnessMatrix s = MakeStiffness(Vec2(0.6, 0.8), 0.008, 0.008);
  CHECK((s.Ke - 0.008 * Mat2::Identity()).cwiseAbs().maxCoeff() < 1e-17);
}

TEST_CASE("stiffness determinant and eigenvectors") {
  const Vec2 n = Vec2(0.3, -0.9).normalized();
  const StiffnessMatrix s = MakeStiffness(n, 0.012, 0.004);
  CHECK(s.Ke.determinant() == doctest::Approx(0.012 * 0.004).epsilon(1e-12));
  CHECK(s.ClosedFormDeterminant() == doctest::Approx(0.012 * 0.004).epsilon(1e-14));
  CHECK((s.Ke * n - 0.012 * n).norm() < 1e-16);
  CHECK((s.Ke * rot90(n) - 0.004 * rot90(n)).norm() < 1e-16);
  CHECK(s.Ke.isApprox(s.Ke.transpose()));
}

TEST_CASE("stiffness rejects non-positive moduli") {
  CHECK_THROWS_AS(MakeStiffness(Vec2(0, 1), 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MakeStiffness(Vec2(0, 1), 1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(MakeStiffness(Vec2::Zero(), 1.0, 1.0), std::invalid_argument);
  ContactParams cp;
  cp.ke_normal = 0.0;
  cp.normal = Vec2::Zero();
  CHECK(cp.Validate().size() == 2u);
}

TEST_CASE("contact force") {
  ContactParams cp;
  cp.normal = {-1.0, 0.0};
  cp.rest_point = {0.2, 0.1};
  cp.ke_normal = 100.0;
  cp.ke_tangential = 50.0;

  SUBCASE("zero at the rest point") {
    CHECK(ContactForce(cp, cp.rest_point, true).norm() == 0.0);
  }
  SUBCASE("hand-computed example") {
    const Vec2 f = ContactForce(cp, cp.rest_point + Vec2(-0.01, 0.005), true);
    CHECK(f.x() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(f.y() == doctest::Approx(0.25).epsilon(1e-12));
  }
  SUBCASE("inactive contact carries no force") {
    CHECK(ContactForce(cp, cp.rest_point + Vec2(0.03, 0.02), false).norm() == 0.0);
  }
  SUBCASE("compression pushes along -n") {
    const Vec2 p = cp.rest_point + Vec2(0.004, 0.0);  // inside the environment
    CHECK(IsPenetrating(cp, p));
    CHECK_FALSE(IsPenetrating(cp, cp.rest_point + Vec2(-0.004, 0.0)));
    CHECK(ContactForce(cp, p, true).dot(cp.normal) < 0.0);
  }
}

TEST_CASE("contact force rotates with the frame") {
  ContactParams cp;
  cp.normal = Vec2(0.2, -1.0).normalized();
  cp.rest_point = {0.1, 0.3};
  const Vec2 d(0.003, 0.007);
  const Vec2 f = ContactForce(cp, cp.rest_point + d, true);
  for (double a : {0.3, 1.7, -2.4}) {
    const Eigen::Rotation2Dd R(a);
    ContactParams rotated = cp;
    rotated.normal = R * cp.normal;
    rotated.rest_point = R * cp.rest_point;
    const Vec2 fr = ContactForce(rotated, rotated.rest_point + R * d, true);
    CHECK((fr - R * f).norm() < 1e-13);
  }
}

TEST_CASE("force rate") {
  const ChainParams c = ChainParams::Benchmark();
  const Mat2 Ke = MakeStiffness(Vec2(0, -1), 100.0, 50.0).Ke;

  SUBCASE("zero motion") {
    const JointState js = verify::RandomJointState(c, 1);
    const JacobianSet jac = ComputeJacobians(c, js);
    CHECK(ForceRate(Ke, jac.Jp_gamma, Vector::Zero(4)).norm() == 0.0);
  }
  SUBCASE("straight chain, first joint only") {
    const JointState js{Vector::Zero(4), Vector::Zero(3)};
    const JacobianSet jac = ComputeJacobians(c, js);
    const Vec2 fd = ForceRate(Ke, jac.Jp_gamma, Vector::Unit(4, 0));
    CHECK(std::abs(fd.x()) < 1e-14);
    CHECK(fd.y() == doctest::Approx(100.0 * 0.45));
  }
  SUBCASE("matches a short rigid step") {
    ContactParams cp;
    JointState js = verify::RandomJointState(c, 8);
    js.delta.setZero();
    cp.rest_point = ForwardKinematics(c, js).p;
    const Vector gd = (Vector(4) << 0.2, -0.1, 0.3, 0.05).finished();
    const double dt = 1e-4;
    JointState next = js;
    next.gamma += dt * gd;
    const Vec2 f0 = ContactForce(cp, ForwardKinematics(c, js).p, true);
    const Vec2 f1 = ContactForce(cp, ForwardKinematics(c, next).p, true);
    const Vec2 rate = ForceRate(MakeStiffness(cp).Ke, ComputeJacobians(c, js).Jp_gamma, gd);
    CHECK(((f1 - f0) / dt - rate).norm() < 1e-3 * rate.norm());
  }
}
