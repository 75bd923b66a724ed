#include "doctest.h"

#include "flexarm/export.hpp"
#include "flexarm/runner.hpp"
#include "flexarm/scenario.hpp"

using namespace flexarm;

namespace {

RunOptions Quiet() {
  RunOptions o;
  o.measure_time = false;
  return o;
}

}  // namespace

TEST_CASE("mixed scenario settles the force during the press") {
  const Scenario s = BenchmarkMixedScenario();
  const RunResult r = Run(s, Quiet());
  REQUIRE(r.completed);
  CHECK(r.ok());
  const auto& recs = r.log.records;
  // Last record of the force phase.
  std::size_t last_force = 0;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].phase == 1) last_force = i;
  }
  REQUIRE(last_force > 0);
  CHECK(recs[last_force].eta.norm() < 0.05);
  CHECK(recs.back().phase == 2);
  CHECK(recs.back().t == doctest::Approx(s.duration).epsilon(1e-9));
}

TEST_CASE("pure position regulation reaches the waypoint") {
  const RunResult r = Run(BenchmarkPositionScenario(), Quiet());
  REQUIRE(r.ok());
  const LogRecord& last = r.log.records.back();
  CHECK(last.e.head<2>().norm() < 1e-3);
  CHECK((last.q_r.head<2>() - last.p).norm() < 1e-3);
  CHECK_FALSE(last.contact);
  CHECK(last.f_true.norm() == 0.0);
}

TEST_CASE("same seed, same log") {
  Scenario s = BenchmarkMixedScenario();
  s.duration = 30.0;
  const RunResult a = Run(s, Quiet());
  const RunResult b = Run(s, Quiet());
  CHECK(LogHash(a.log) == LogHash(b.log));
  s.seed = 2;
  CHECK(LogHash(Run(s, Quiet()).log) != LogHash(a.log));
}

TEST_CASE("triggers move to the next phase early") {
  Scenario s = BenchmarkPositionScenario();
  const Vector target = s.phases[0].target;
  Phase second;
  second.name = "second";
  second.target = target + Vector::Unit(3, 0) * 0.01;
  second.start_time = 50.0;
  second.trigger = PhaseTrigger{TriggerMetric::kPositionError, 2e-3, 1.0};
  s.phases.push_back(second);
  const RunResult r = Run(s, Quiet());
  REQUIRE(r.ok());
  double entered = -1.0;
  for (const LogRecord& rec : r.log.records) {
    if (rec.phase == 1) {
      entered = rec.t;
      break;
    }
  }
  CHECK(entered > 0.0);
  CHECK(entered < 50.0);
}

TEST_CASE("a diverging deflection solve aborts and keeps the partial log") {
  Scenario s = BenchmarkMixedScenario();
  s.solver.method = DeflectionMethod::kFixedPoint;
  const RunResult r = Run(s, Quiet());
  CHECK_FALSE(r.completed);
  CHECK_FALSE(r.ok());
  CHECK(r.abort_reason.find("did not converge") != std::string::npos);
  CHECK_FALSE(r.log.records.empty());
  CHECK(r.log.records.back().t < s.duration);
}

TEST_CASE("invalid scenarios are rejected before running") {
  Scenario s = BenchmarkForceScenario();
  s.duration = -1.0;
  CHECK_THROWS_AS(Run(s), ScenarioError);
}

TEST_CASE("in-run monitors stay quiet on the force scenario") {
  const RunResult r = Run(BenchmarkForceScenario(), Quiet());
  REQUIRE(r.completed);
  CHECK(r.violations.empty());
  CHECK(r.V_monitor_active);
  CHECK(r.max_V_increase <= 1e-6 * std::max(r.V0, 1.0));
  CHECK(r.max_det_error <= 1e-14);
  CHECK(r.max_projection_correction <= 0.0);
  for (const LogRecord& rec : r.log.records) {
    CHECK(rec.ke_hat_normal >= 0.004);
    CHECK(rec.ke_hat_normal <= 0.012);
  }
}
