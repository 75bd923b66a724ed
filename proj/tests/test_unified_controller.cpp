#include <cmath>
#include <limits>

#include "doctest.h"

#include "flexarm/chain_kinematics.hpp"
#include "flexarm/unified_controller.hpp"
#include "flexarm/verification.hpp"

using namespace flexarm;

namespace {

struct Setup {
  Matrix J_T;
  Matrix Jp;
  Mat2 Ke = Mat2::Zero();
  Gains gains = Gains::Benchmark();
};

Setup BenchmarkSetup(std::uint64_t seed) {
  const ChainParams c = ChainParams::Benchmark();
  const JacobianSet jac = ComputeJacobians(c, verify::RandomJointState(c, seed));
  Setup s;
  s.J_T = jac.J_gamma;
  s.Jp = jac.Jp_gamma;
  s.Ke << 0.009, 0.001, 0.001, 0.006;
  return s;
}

// Residual of v after projection onto the column space of A.
double RangeResidual(const Matrix& A, const Vector& v) {
  const Vector fit = A * A.completeOrthogonalDecomposition().solve(v);
  return (v - fit).norm() / std::max(v.norm(), 1e-300);
}

}  // namespace

TEST_CASE("sigma") {
  CHECK(Sigma(Vec2::Zero(), 0.3) == 0.0);
  CHECK(Sigma(Vec2(0.0, 2.0), 0.3) == doctest::Approx(0.6));
  const Vec2 eta(0.3, -0.7);
  CHECK(Sigma(2.0 * eta, 0.3) == doctest::Approx(2.0 * Sigma(eta, 0.3)));
}

TEST_CASE("deadband") {
  CHECK(ApplyDeadband(Vec2(0.02, 0.0), 0.03) == Vec2::Zero());
  CHECK(ApplyDeadband(Vec2(0.03, 0.0), 0.03) == Vec2(0.03, 0.0));
  CHECK(ApplyDeadband(Vec2(0.5, -0.2), 0.0) == Vec2(0.5, -0.2));
}

TEST_CASE("equilibrium produces no motion") {
  const Setup s = BenchmarkSetup(1);
  const ControlOutput out =
      ControlStep({}, Vec3::Zero(), Vec2::Zero(), s.J_T, s.Jp, s.Ke, s.gains);
  CHECK(out.gamma_dot.norm() == 0.0);
  CHECK(out.xi_dot.norm() == 0.0);
  CHECK(out.q_r_dot.norm() == 0.0);
}

TEST_CASE("without a force error the reference stays put") {
  const Setup s = BenchmarkSetup(2);
  ControllerState st;
  st.xi = {0.01, -0.02, 0.003};
  const Vec3 e(0.004, -0.01, 0.05);
  // Inside the deadband counts as no force error.
  for (const Vec2& eta : {Vec2(0.0, 0.0), Vec2(0.01, -0.02)}) {
    const ControlOutput out = ControlStep(st, e, eta, s.J_T, s.Jp, s.Ke, s.gains);
    CHECK(out.q_r_dot.norm() == 0.0);
    CHECK(out.eta == Vec2::Zero());
    const Vector pure = s.gains.K_gamma.asDiagonal() *
                        (s.J_T.transpose() * (s.gains.K_P.asDiagonal() * e +
                                              s.gains.K_I.asDiagonal() * st.xi));
    CHECK((out.gamma_dot - pure).norm() <= 1e-14 * pure.norm());
  }
}

TEST_CASE("single-joint case against scalar arithmetic") {
  const double j = 0.37, jp = -0.21, ke = 0.011;
  const double e = 0.013, eta = 0.8, xi = -0.004;
  Gains g = Gains::Benchmark();
  g.K_gamma = Vector::Constant(1, 150.0);
  g.K_eta = Vector::Constant(1, 12.0);
  g.K_gamma_eta = Vector::Constant(1, 162.0);
  g.eta_t = 0.0;
  Matrix J_T = Matrix::Zero(3, 1), Jp = Matrix::Zero(2, 1);
  J_T(0, 0) = j;
  Jp(0, 0) = jp;
  Mat2 Ke = Mat2::Zero();
  Ke(0, 0) = ke;
  Ke(1, 1) = 0.005;
  ControllerState st;
  st.xi = {xi, 0.0, 0.0};

  const ControlOutput out = ControlStep(st, Vec3(e, 0, 0), Vec2(eta, 0), J_T, Jp, Ke, g);

  const double kP = g.K_P(0), kI = g.K_I(0), kxi = g.K_xi(0);
  const double kg = 150.0, keta = 12.0, kge = 162.0, sigma = g.sigma_p * std::abs(eta);
  const double xi_dot = -kxi * xi + kI * j * kg * (j * kP * e + jp * ke * eta);
  const double gamma_dot = kg * j * (kP * e + kI * xi) + keta * jp * ke * eta;
  const double q_r_dot = j * kge * jp * ke * eta - sigma * kP * e;
  CHECK(out.xi_dot(0) == doctest::Approx(xi_dot).epsilon(1e-15));
  CHECK(out.gamma_dot(0) == doctest::Approx(gamma_dot).epsilon(1e-15));
  CHECK(out.q_r_dot(0) == doctest::Approx(q_r_dot).epsilon(1e-15));
  CHECK(out.xi_dot.tail<2>().norm() == 0.0);
  CHECK(out.q_r_dot(2) == 0.0);
  CHECK(out.sigma == doctest::Approx(sigma));
}

TEST_CASE("loop terms lie in their Jacobian ranges") {
  const Setup s = BenchmarkSetup(4);
  ControllerState st;
  st.xi = {0.002, 0.001, -0.01};
  // Force loop alone (e = 0, xi = 0). K_eta is uniform, so the term is in
  // the range of Jp^T itself.
  const ControlOutput force =
      ControlStep({}, Vec3::Zero(), Vec2(0.4, -1.1), s.J_T, s.Jp, s.Ke, s.gains);
  CHECK(RangeResidual(s.Jp.transpose(), force.gamma_dot) < 1e-12);
  // Position loop alone, un-weighted by the diagonal K_gamma.
  const ControlOutput pos =
      ControlStep(st, Vec3(0.01, 0.02, -0.1), Vec2::Zero(), s.J_T, s.Jp, s.Ke, s.gains);
  const Vector unweighted = s.gains.K_gamma.cwiseInverse().asDiagonal() * pos.gamma_dot;
  CHECK(RangeResidual(s.J_T.transpose(), unweighted) < 1e-12);
}

TEST_CASE("non-finite inputs are rejected") {
  const Setup s = BenchmarkSetup(3);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(ControlStep({}, Vec3(nan, 0, 0), Vec2::Zero(), s.J_T, s.Jp, s.Ke, s.gains),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      ControlStep({}, Vec3::Zero(), Vec2(0, INFINITY), s.J_T, s.Jp, s.Ke, s.gains),
      std::invalid_argument);
}

TEST_CASE("gain validation") {
  Gains g = Gains::Benchmark();
  CHECK(g.Validate(4).empty());
  CHECK(g.K_gamma_eta.isApprox(g.K_gamma + g.K_eta));
  g.K_eta = Vector::Constant(3, 1.0);
  g.K_P(1) = 0.0;
  g.eta_t = -1.0;
  CHECK(g.Validate(4).size() == 3u);
}

TEST_CASE("Euler integration of the controller") {
  ControllerState st;
  st.xi = {0.1, 0.2, 0.3};
  st.q_r = {0.2, 0.1, 0.5};
  SUBCASE("zero rates keep the state") {
    const ControllerState next = IntegrateController(st, ControlOutput{}, 0.025);
    CHECK(next.xi == st.xi);
    CHECK(next.q_r == st.q_r);
  }
  SUBCASE("one step follows the Euler definition") {
    ControlOutput out;
    out.xi_dot = {1.0, -2.0, 0.5};
    out.q_r_dot = {0.01, 0.0, -0.2};
    const ControllerState next = IntegrateController(st, out, 0.025);
    CHECK(next.xi.isApprox(st.xi + 0.025 * out.xi_dot));
    CHECK(next.q_r.isApprox(st.q_r + 0.025 * out.q_r_dot));
    CHECK(next.f_r == st.f_r);
  }
  SUBCASE("two half steps differ from one full step by O(dt^2)") {
    const Setup s = BenchmarkSetup(5);
    const Vec3 q(0.18, 0.12, 0.45);
    const Vec2 eta(0.0, 0.5);
    auto step = [&](const ControllerState& x, double dt) {
      return IntegrateController(x, ControlStep(x, x.q_r - q, eta, s.J_T, s.Jp, s.Ke, s.gains),
                                 dt);
    };
    auto gap = [&](double dt) {
      const ControllerState full = step(st, dt);
      const ControllerState half = step(step(st, dt / 2), dt / 2);
      return (full.xi - half.xi).norm() + (full.q_r - half.q_r).norm();
    };
    const double ratio = gap(0.01) / gap(0.005);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.05));
  }
}
