#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

#include "flexarm/chain_kinematics.hpp"
#include "flexarm/verification.hpp"

using namespace flexarm;

namespace {

JointState Straight(const ChainParams& c) {
  return {Vector::Zero(c.num_actuated()), Vector::Zero(c.num_flexible())};
}

// Independent oracle: walk the chain as a sum of complex phasors.
std::complex<double> PhasorTip(const ChainParams& c, const JointState& js, double* alpha) {
  std::complex<double> z = 0.0;
  double a = 0.0;
  for (int i = 0; i < c.num_flexible(); ++i) {
    a += js.gamma(i);
    z += std::polar(c.compound[i].l, a);
    a += js.delta(i);
    z += std::polar(c.compound[i].L, a);
  }
  a += js.gamma(c.num_flexible());
  z += std::polar(c.ee.l, a);
  *alpha = a;
  return z;
}

std::complex<double> PhasorCom(const ChainParams& c, const JointState& js) {
  std::complex<double> base = 0.0, weighted = 0.0;
  double a = 0.0, mass = 0.0;
  auto link = [&](double len, double cg, double m) {
    weighted += m * (base + std::polar(cg, a));
    base += std::polar(len, a);
    mass += m;
  };
  for (int i = 0; i < c.num_flexible(); ++i) {
    a += js.gamma(i);
    link(c.compound[i].l, c.compound[i].l_cg, c.compound[i].m);
    a += js.delta(i);
    link(c.compound[i].L, c.compound[i].L_cg, c.compound[i].M);
  }
  a += js.gamma(c.num_flexible());
  link(c.ee.l, c.ee.l_cg, c.ee.m);
  return weighted / mass;
}

}  // namespace

TEST_CASE("straight chain reaches 0.45 m along x") {
  const ChainParams c = ChainParams::Benchmark();
  const TaskPose pose = ForwardKinematics(c, Straight(c));
  CHECK(pose.p.x() == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(std::abs(pose.p.y()) < 1e-15);
  CHECK(pose.alpha == 0.0);
}

TEST_CASE("first joint at a quarter turn points the arm along y") {
  const ChainParams c = ChainParams::Benchmark();
  JointState js = Straight(c);
  js.gamma(0) = M_PI / 2;
  const TaskPose pose = ForwardKinematics(c, js);
  CHECK(std::abs(pose.p.x()) < 1e-15);
  CHECK(pose.p.y() == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(pose.alpha == doctest::Approx(M_PI / 2));
}

TEST_CASE("forward kinematics matches the phasor walk on random poses") {
  const ChainParams c = ChainParams::Benchmark();
  for (int s = 0; s < 200; ++s) {
    const JointState js = verify::RandomJointState(c, 100 + s);
    double alpha = 0.0;
    const std::complex<double> z = PhasorTip(c, js, &alpha);
    const TaskPose pose = ForwardKinematics(c, js);
    CHECK(std::abs(pose.p.x() - z.real()) < 1e-14);
    CHECK(std::abs(pose.p.y() - z.imag()) < 1e-14);
    CHECK(std::abs(pose.alpha - alpha) < 1e-14);
  }
}

TEST_CASE("orientation is the plain sum of all joint angles") {
  const ChainParams c = ChainParams::Benchmark();
  const JointState js = verify::RandomJointState(c, 7);
  const TaskPose pose = ForwardKinematics(c, js);
  CHECK(pose.alpha == doctest::Approx(js.gamma.sum() + js.delta.sum()));
  const JacobianSet jac = ComputeJacobians(c, js);
  CHECK(jac.Jalpha_gamma.isApproxToConstant(1.0));
  CHECK(jac.Jalpha_delta.isApproxToConstant(1.0));
}

TEST_CASE("center of mass") {
  const ChainParams c = ChainParams::Benchmark();
  CHECK(c.total_mass() == doctest::Approx(0.339).epsilon(1e-12));

  SUBCASE("brute force on random poses") {
    for (int s = 0; s < 50; ++s) {
      const JointState js = verify::RandomJointState(c, 500 + s);
      const CenterOfMass com = ComputeCenterOfMass(c, js);
      const std::complex<double> z = PhasorCom(c, js);
      CHECK(std::abs(com.position.x() - z.real()) < 1e-14);
      CHECK(std::abs(com.position.y() - z.imag()) < 1e-14);
      CHECK(com.total_mass == doctest::Approx(0.339));
    }
  }
  SUBCASE("mirroring every angle mirrors the center of mass") {
    JointState js = verify::RandomJointState(c, 3);
    const Vec2 a = ComputeCenterOfMass(c, js).position;
    js.gamma = -js.gamma;
    js.delta = -js.delta;
    const Vec2 b = ComputeCenterOfMass(c, js).position;
    CHECK(a.x() == doctest::Approx(b.x()));
    CHECK(a.y() == doctest::Approx(-b.y()));
  }
  SUBCASE("straight chain keeps the mass on the x axis") {
    const Vec2 com = ComputeCenterOfMass(c, Straight(c)).position;
    CHECK(std::abs(com.y()) < 1e-15);
    CHECK(com.x() > 0.0);
    CHECK(com.x() < 0.45);
  }
}

TEST_CASE("first column of Jp_gamma at the straight pose") {
  const ChainParams c = ChainParams::Benchmark();
  const JacobianSet jac = ComputeJacobians(c, Straight(c));
  CHECK(std::abs(jac.Jp_gamma(0, 0)) < 1e-15);
  CHECK(jac.Jp_gamma(1, 0) == doctest::Approx(0.45));
  CHECK(jac.J.rows() == 3);
  CHECK(jac.J.cols() == 7);
}

TEST_CASE("analytic Jacobians agree with central differences") {
  const ChainParams c = ChainParams::Benchmark();
  for (int s = 0; s < 100; ++s) {
    const verify::JacobianErrors err =
        verify::CompareJacobians(c, verify::RandomJointState(c, 900 + s), 1e-7);
    CHECK(err.J < 1e-6);
    CHECK(err.J_cg_delta < 1e-6);
    CHECK(err.dJp_delta_dgamma < 1e-6);
    CHECK(err.dJcg_delta_dgamma < 1e-6);
  }
}

TEST_CASE("Jacobian column blocks are consistent") {
  const ChainParams c = ChainParams::Benchmark();
  const JacobianSet jac = ComputeJacobians(c, verify::RandomJointState(c, 11));
  CHECK(jac.J.leftCols(4).isApprox(jac.J_gamma));
  CHECK(jac.J.rightCols(3).isApprox(jac.J_delta));
  CHECK(jac.J_gamma.topRows(2).isApprox(jac.Jp_gamma));
  CHECK(jac.J_delta.topRows(2).isApprox(jac.Jp_delta));
  CHECK(jac.J_gamma.row(2).isApprox(jac.Jalpha_gamma));
}

TEST_CASE("delta derivatives agree with central differences") {
  const ChainParams c = ChainParams::Benchmark();
  const JointState js = verify::RandomJointState(c, 21);
  std::vector<Matrix> dJp, dJcg;
  DeltaDerivatives(c, js, &dJp, &dJcg);
  REQUIRE(dJp.size() == 3u);
  const double h = 1e-6;
  for (int j = 0; j < c.num_flexible(); ++j) {
    JointState plus = js, minus = js;
    plus.delta(j) += h;
    minus.delta(j) -= h;
    const JacobianSet a = ComputeJacobians(c, plus), b = ComputeJacobians(c, minus);
    CHECK(verify::RelativeError(dJp[j], (a.Jp_delta - b.Jp_delta) / (2 * h)) < 1e-7);
    CHECK(verify::RelativeError(dJcg[j], (a.J_cg_delta - b.J_cg_delta) / (2 * h)) < 1e-7);
  }
}

TEST_CASE("rank margins flag the straight singularity") {
  const ChainParams c = ChainParams::Benchmark();
  const RankMargins straight = ComputeRankMargins(ComputeJacobians(c, Straight(c)));
  CHECK(straight.J < 1e-12);
  CHECK(straight.Jp_gamma < 1e-12);
  const RankMargins bent =
      ComputeRankMargins(ComputeJacobians(c, verify::RandomJointState(c, 5)));
  CHECK(bent.J > 1e-4);
  CHECK(bent.Jp_gamma > 1e-4);
}

TEST_CASE("chain validation names the offending field") {
  ChainParams c = ChainParams::Benchmark();
  c.compound[1].k = -1.0;
  c.ee.l = 0.0;
  const auto issues = c.Validate();
  REQUIRE(issues.size() >= 2u);
  bool found_k = false, found_l = false;
  for (const auto& s : issues) {
    found_k = found_k || s.find("compound[1].k") != std::string::npos;
    found_l = found_l || s.find("l_ee") != std::string::npos;
  }
  CHECK(found_k);
  CHECK(found_l);
  CHECK(ChainParams::Benchmark().Validate().empty());
}
