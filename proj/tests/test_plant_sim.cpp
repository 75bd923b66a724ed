#include <cmath>

#include "doctest.h"

#include "flexarm/plant_sim.hpp"
#include "flexarm/runner.hpp"
#include "flexarm/scenario.hpp"

using namespace flexarm;

namespace {

const Vector kGamma0 = (Vector(4) << 0.7, -0.4, 0.9, -0.5).finished();

}  // namespace

TEST_CASE("zero command is a fixed point") {
  const ChainParams c = ChainParams::Benchmark();
  const PlantState s0 = InitialPlantState(c, nullptr, kGamma0);
  PlantState s = s0;
  for (int i = 0; i < 25; ++i) s = PlantStep(s, Vector::Zero(4), nullptr, c, 1e-3);
  CHECK(s.gamma == s0.gamma);
  CHECK(s.delta == s0.delta);
  CHECK(s.p == s0.p);
  CHECK(s.t == doctest::Approx(0.025));
}

TEST_CASE("free-space ramp follows the rigid-plus-sag pose") {
  ChainParams c = ChainParams::Benchmark();
  c.g0 = {0.0, -9.81};
  for (auto& j : c.compound) j.k *= 20.0;
  const Vector gd = (Vector(4) << 0.2, -0.1, 0.05, 0.3).finished();
  PlantState s = InitialPlantState(c, nullptr, kGamma0);
  for (int i = 1; i <= 500; ++i) {
    s = PlantStep(s, gd, nullptr, c, 1e-3);
    if (i % 100 != 0) continue;
    const Vector gamma = kGamma0 + (i * 1e-3) * gd;
    const Vector delta = SolveStaticDeflection(c, nullptr, gamma, Vector::Zero(3)).delta;
    const TaskPose expected = ForwardKinematics(c, {gamma, delta});
    CHECK((s.gamma - gamma).norm() < 1e-13);
    CHECK((s.p - expected.p).norm() < 1e-12);
    CHECK(s.alpha == doctest::Approx(expected.alpha).epsilon(1e-12));
  }
}

TEST_CASE("force grows linearly with penetration") {
  const ChainParams c = ChainParams::Benchmark();
  ContactParams cp;
  // Interface just above the straight-down approach of the tip.
  const Vector gamma0 = (Vector(4) << 1.2, -0.3, -0.3, -0.5).finished();
  const PlantState free = InitialPlantState(c, nullptr, gamma0);
  cp.normal = {0.0, -1.0};
  cp.rest_point = free.p + Vec2(0.0, 0.004);
  // Joint rate that moves the rigid tip along -n.
  const JacobianSet jac = ComputeJacobians(c, {gamma0, Vector::Zero(3)});
  const Vector gd = jac.Jp_gamma.completeOrthogonalDecomposition().solve(Vec2(0.0, 0.01));
  PlantState s = InitialPlantState(c, &cp, gamma0);
  int in_contact = 0;
  for (int i = 0; i < 1500; ++i) {
    s = PlantStep(s, gd, &cp, c, 1e-3);
    if (!s.contact_active || s.tangential_scale != 1.0) continue;
    ++in_contact;
    const double penetration = -cp.normal.dot(s.p - cp.rest_point);
    CHECK(penetration >= 0.0);
    CHECK(-s.f_true.dot(cp.normal) == doctest::Approx(cp.ke_normal * penetration));
    CHECK(s.f_true.dot(cp.normal) <= 0.0);  // compression points along -n
  }
  CHECK(in_contact > 100);
}

TEST_CASE("sensor") {
  const ChainParams c = ChainParams::Benchmark();
  ContactParams cp;
  PlantState s = InitialPlantState(c, nullptr, kGamma0);
  s.f_true = {0.3, -1.2};

  SUBCASE("fidelity off reports the truth") {
    Sensor sensor(c, FidelityOptions{}, 1);
    const Measurement m = sensor.Measure(s);
    CHECK(m.gamma == s.gamma);
    CHECK(m.delta == s.delta);
    CHECK(m.f == s.f_true);
    CHECK((m.q.head<2>() - s.p).norm() < 1e-15);
  }
  SUBCASE("quantized encoders") {
    FidelityOptions fid;
    fid.SetEnabled(true);
    Sensor sensor(c, fid, 1);
    const Measurement m = sensor.Measure(s);
    for (int i = 0; i < 4; ++i) {
      const double steps = m.gamma(i) / 0.0052;
      CHECK(std::abs(steps - std::round(steps)) < 1e-9);
      CHECK(std::abs(m.gamma(i) - s.gamma(i)) <= 0.0026 + 1e-12);
    }
  }
  SUBCASE("same seed, same noise") {
    FidelityOptions fid;
    fid.SetEnabled(true);
    Sensor a(c, fid, 42), b(c, fid, 42), other(c, fid, 43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const Vec2 fa = a.Measure(s).f, fb = b.Measure(s).f, fo = other.Measure(s).f;
      CHECK(fa == fb);
      differs = differs || fa != fo;
    }
    CHECK(differs);
  }
  SUBCASE("noise level") {
    FidelityOptions fid;
    fid.force_noise = true;
    Sensor sensor(c, fid, 7);
    double sum2 = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) sum2 += (sensor.Measure(s).f - s.f_true).squaredNorm();
    CHECK(std::sqrt(sum2 / (2 * n)) == doctest::Approx(0.005).epsilon(0.03));
  }
}

TEST_CASE("quantization rounds to the nearest step") {
  const Vector q = Quantize((Vector(3) << 0.0027, -0.0025, 0.0104).finished(), 0.0052);
  CHECK(q(0) == doctest::Approx(0.0052));
  CHECK(q(1) == 0.0);
  CHECK(q(2) == doctest::Approx(0.0104));
}

TEST_CASE("halving the plant step leaves the closed-loop end state unchanged") {
  Scenario s = BenchmarkForceScenario();
  s.duration = 10.0;
  RunOptions opt;
  opt.measure_time = false;
  const RunResult a = Run(s, opt);
  s.fidelity.plant_dt = 5e-4;
  const RunResult b = Run(s, opt);
  REQUIRE(a.completed);
  REQUIRE(b.completed);
  const LogRecord& ra = a.log.records.back();
  const LogRecord& rb = b.log.records.back();
  CHECK((ra.gamma - rb.gamma).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((ra.delta - rb.delta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((ra.f_true - rb.f_true).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("fidelity validation") {
  FidelityOptions f;
  CHECK(f.Validate().empty());
  CHECK(f.control_dt() == doctest::Approx(0.025));
  f.plant_dt = 0.0;
  f.measurement_rate = -1.0;
  CHECK(f.Validate().size() >= 2u);
}
