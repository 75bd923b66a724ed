#include "flexarm/verification.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include "flexarm/export.hpp"

namespace flexarm::verify {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

std::string Fmt(const char* format, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

Matrix Stack(const std::vector<Matrix>& slices) {
  if (slices.empty()) return {};
  Matrix out(slices[0].rows(), slices[0].cols() * slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    out.middleCols(i * slices[0].cols(), slices[0].cols()) = slices[i];
  }
  return out;
}

struct ScenarioRun {
  Scenario scenario;
  RunResult result;
  double seconds = 0.0;
};

ScenarioRun Execute(const Scenario& s) {
  ScenarioRun run{s, {}, 0.0};
  const auto t0 = Clock::now();
  run.result = Run(s);
  run.seconds = Seconds(t0);
  return run;
}

// ---------------------------------------------------------------- 1 -----
CriterionResult JacobianCriterion(const AcceptanceOptions& opt) {
  CriterionResult r{1, "Jacobian correctness", false, "", 0.0};
  const auto t0 = Clock::now();
  const ChainParams chain = ChainParams::Benchmark();
  double worst = 0.0;
  for (int i = 0; i < opt.jacobian_poses; ++i) {
    const JointState js = RandomJointState(chain, opt.seed * 7919 + i);
    worst = std::max(worst, CompareJacobians(chain, js).max());
  }
  r.seconds = Seconds(t0);
  r.passed = worst < 1e-6 && r.seconds < 10.0;
  r.detail = Fmt("%.0f poses, max rel err %.2e (< 1e-6), %.2f s (< 10 s)",
                 opt.jacobian_poses, worst, r.seconds);
  return r;
}

// ---------------------------------------------------------------- 2 -----
CriterionResult FlexCriterion(const AcceptanceOptions& opt) {
  CriterionResult r{2, "Flex-model consistency", false, "", 0.0};
  const auto t0 = Clock::now();
  std::mt19937_64 rng(opt.seed * 104729 + 2);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < opt.flex_configurations; ++i) {
    ChainParams chain = ChainParams::Benchmark();
    chain.g0 = Vec2(unit(rng), unit(rng)).normalized() * 9.81;
    JointState js = RandomJointState(chain, rng());
    js.delta *= 0.2;
    const Vec2 p = ForwardKinematics(chain, js).p;
    ContactParams contact;
    contact.normal = Vec2(unit(rng), unit(rng)).normalized();
    const Vec2 tangent(-contact.normal.y(), contact.normal.x());
    // Rest point beyond the tip, so the tip penetrates by 1-20 mm.
    contact.rest_point = p + contact.normal * (0.0105 + 0.0095 * unit(rng)) +
                         tangent * 0.02 * unit(rng);
    contact.ke_normal = 110.0 + 90.0 * unit(rng);
    contact.ke_tangential = 110.0 + 90.0 * unit(rng);
    Vector gamma_dot(chain.num_actuated());
    for (Eigen::Index k = 0; k < gamma_dot.size(); ++k) gamma_dot[k] = unit(rng);
    const Vector oracle = FrozenDeflectionRate(chain, contact, js, gamma_dot);
    const Vector model = ModelDeflectionRate(chain, contact, js, gamma_dot);
    worst = std::max(worst, RelativeError(model, oracle));
  }
  r.seconds = Seconds(t0);
  r.passed = worst < 1e-3;
  r.detail = Fmt("%.0f contact configurations, max rel err %.2e (< 1e-3)",
                 opt.flex_configurations, worst);
  return r;
}

// ---------------------------------------------------------------- 3 -----
CriterionResult LyapunovCriterion(const ScenarioRun& run) {
  CriterionResult r{3, "Lyapunov certificate", false, "", run.seconds};
  const auto& recs = run.result.log.records;
  const double slack = 1e-6 * std::max(run.result.V0, 1.0);
  double max_increase = -1e300, max_vdot = -1e300;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    max_vdot = std::max(max_vdot, recs[i].Vdot_bound);
    if (i > 0) max_increase = std::max(max_increase, recs[i].V - recs[i - 1].V);
  }
  const bool fidelity_off = !run.scenario.fidelity.quantization &&
                            !run.scenario.fidelity.force_noise;
  r.passed = run.result.completed && fidelity_off && max_increase <= slack &&
             max_vdot <= 0.0 && run.seconds < 30.0;
  r.detail = Fmt("max step increase of V %.3g (slack %.3g), max Vdot bound %.3g",
                 max_increase, slack, max_vdot) +
             Fmt(", %.2f s for %.0f s simulated (< 30 s)", run.seconds,
                 run.scenario.duration);
  return r;
}

// ---------------------------------------------------------------- 4 -----
CriterionResult ForceCriterion(const ScenarioRun& run) {
  CriterionResult r{4, "Force regulation", false, "", 0.0};
  const RunLog& log = run.result.log;
  const double settled = SettlingTime(log, 0, log.records.size(), 0.02, true);
  const LogRecord& last = log.records.back();
  const Vec2 err = last.f_r - last.f_true;
  const bool multi_axis = (last.f_r.array().abs() > 0.0).all();
  r.passed = run.result.completed && settled >= 0.0 && settled <= 30.0 && multi_axis &&
             std::abs(err.x()) < 0.02 && std::abs(err.y()) < 0.02;
  r.detail = Fmt("|eta| < 0.02 N from t = %.3f s (<= 30 s); final component errors "
                 "(%.2e, %.2e) N",
                 settled, err.x(), err.y());
  return r;
}

// ---------------------------------------------------------------- 5 -----
CriterionResult ProjectionCriterion(const std::vector<const ScenarioRun*>& runs) {
  CriterionResult r{5, "Projection invariance", false, "", 0.0};
  double worst_corr = -1e300;
  long out_of_bounds = 0, steps = 0;
  for (const ScenarioRun* run : runs) {
    const AdaptationParams& a = run->scenario.adaptation;
    for (const LogRecord& rec : run->result.log.records) {
      ++steps;
      out_of_bounds += !a.bounds_normal.Contains(rec.ke_hat_normal) ||
                       !a.bounds_tangential.Contains(rec.ke_hat_tangential);
      worst_corr = std::max(worst_corr, rec.projection_correction);
    }
  }
  r.passed = out_of_bounds == 0 && worst_corr <= 0.0;
  r.detail = Fmt("%.0f runs, %.0f steps: %.0f estimates out of bounds", runs.size(),
                 steps, out_of_bounds) +
             Fmt(", max projection correction %.3g (<= 0)", worst_corr);
  return r;
}

// ---------------------------------------------------------------- 6 -----
CriterionResult UnifyingCriterion(const ScenarioRun& run) {
  CriterionResult r{6, "Unifying property", false, "", 0.0};
  const auto& recs = run.result.log.records;
  const Scenario& s = run.scenario;
  // Phase order as executed.
  std::vector<int> order;
  for (const LogRecord& rec : recs) {
    if (order.empty() || order.back() != rec.phase) order.push_back(rec.phase);
  }
  std::vector<int> expected(s.phases.size());
  for (std::size_t i = 0; i < expected.size(); ++i) expected[i] = static_cast<int>(i);
  bool sequence = order == expected;
  for (std::size_t i = 0; i < s.phases.size() && sequence; ++i) {
    const bool force = s.phases[i].kind == PhaseKind::kForceRegulation;
    sequence = force == (i == 1);
  }
  sequence = sequence && s.phases.size() == 3;

  // q_r frozen whenever the deadband removes the force error in a
  // position phase.
  long frozen_checked = 0, frozen_broken = 0;
  for (std::size_t i = 0; i + 1 < recs.size(); ++i) {
    if (recs[i].phase != recs[i + 1].phase) continue;
    if (s.phases[recs[i].phase].kind != PhaseKind::kPositionWaypoint) continue;
    if (!(recs[i].eta.norm() < s.gains.eta_t)) continue;
    ++frozen_checked;
    frozen_broken += recs[i + 1].q_r != recs[i].q_r;
  }

  double contact_eta = 1e300;
  double force_end = -1.0;
  for (const LogRecord& rec : recs) {
    if (rec.phase == 1) force_end = rec.t;
  }
  if (force_end >= 0.0) {
    contact_eta = 0.0;
    for (const LogRecord& rec : recs) {
      if (rec.phase == 1 && rec.t > force_end - 1.0) {
        contact_eta = std::max(contact_eta, rec.eta.norm());
      }
    }
  }
  const LogRecord& last = recs.back();
  const double position_error = (last.q_r.head<2>() - last.p).norm();
  const bool fidelity_on = s.fidelity.quantization && s.fidelity.force_noise;
  r.passed = run.result.completed && sequence && fidelity_on && frozen_broken == 0 &&
             frozen_checked > 0 && position_error < 1e-3 && contact_eta < 0.05;
  r.detail = std::string(sequence ? "position -> force -> position" : "phase order broken") +
             Fmt("; q_r frozen on %.0f/%.0f deadband steps", frozen_checked - frozen_broken,
                 frozen_checked) +
             Fmt("; final position error %.3f mm (< 1 mm); contact |eta| %.4f N over the "
                 "last second of pressing (< 0.05 N)",
                 position_error * 1e3, contact_eta);
  return r;
}

// ---------------------------------------------------------------- 7 -----
CriterionResult EquilibriumCriterion() {
  CriterionResult r{7, "Equilibrium exactness", false, "", 0.0};
  const Scenario s = BenchmarkForceScenario();
  const ChainParams& chain = s.chain;
  const ContactParams& contact = *s.contact;
  const Vector gamma = s.initial_gamma;
  // Settle the plant in contact, then use the exact force as reference.
  ContactParams pressed = contact;
  const Vec2 tangent(-contact.normal.y(), contact.normal.x());
  pressed.rest_point = ForwardKinematics(chain, {gamma, Vector::Zero(chain.num_flexible())}).p +
                       0.01 * contact.normal + 0.01 * tangent;
  const StaticDeflection sd =
      SolveStaticDeflection(chain, &pressed, gamma, Vector::Zero(chain.num_flexible()));
  const JointState js{gamma, sd.delta};
  const TaskPose pose = ForwardKinematics(chain, js);
  const JacobianSet jac = ComputeJacobians(chain, js);
  const Matrix jfg = ComputeJfg(chain, &pressed, sd.contact_active, pose.p, jac);
  const Matrix theta = ThetaFrom(chain.stiffness(), pressed.ke_normal,
                                 pressed.ke_tangential);
  const StiffnessMatrix Ke = MakeStiffness(pressed);
  ControllerState state;
  state.q_r = pose.q();
  state.f_r = sd.force;
  const Vec3 e = state.q_r - pose.q();
  const Vec2 eta = state.f_r - sd.force;
  const ControlOutput out = ControlStep(state, e, eta,
                                        EstimatedTaskJacobian(jac, theta, jfg),
                                        jac.Jp_gamma, Ke.Ke, s.gains);
  AdaptationParams adapt = s.adaptation;
  AdaptiveState est{theta, pressed.ke_normal, pressed.ke_tangential};
  adapt.bounds_normal = {pressed.ke_normal / 2, pressed.ke_normal * 2};
  adapt.bounds_tangential = {pressed.ke_tangential / 2, pressed.ke_tangential * 2};
  const Matrix theta_dot =
      ThetaUpdate(jfg, out.gamma_dot, e, s.gains.K_P, jac.J_delta, adapt.Gamma_theta);
  const KeRates rates = KeUpdate(out.eta, ComputeProjectors(pressed.normal),
                                 jac.Jp_gamma, out.gamma_dot, adapt, est);
  auto zero = [](const auto& m) { return (m.array() == 0.0).all(); };
  r.passed = sd.contact_active && zero(out.gamma_dot) && zero(out.xi_dot) &&
             zero(out.q_r_dot) && zero(theta_dot) && rates.normal == 0.0 &&
             rates.tangential == 0.0;
  r.detail = Fmt("in contact, |f| = %.3f N: max |gamma_dot| %.1e, |q_r_dot| %.1e", sd.force.norm(),
                 out.gamma_dot.cwiseAbs().maxCoeff(), out.q_r_dot.cwiseAbs().maxCoeff()) +
             Fmt(", |Theta_dot| %.1e, |ke_dot| %.1e", theta_dot.cwiseAbs().maxCoeff(),
                 std::max(std::abs(rates.normal), std::abs(rates.tangential)));
  return r;
}

// ---------------------------------------------------------------- 8 -----
CriterionResult DeterminismCriterion(const ScenarioRun& run) {
  CriterionResult r{8, "Determinism", false, "", 0.0};
  const ScenarioRun again = Execute(run.scenario);
  Scenario other = run.scenario;
  other.seed += 1;
  const ScenarioRun reseeded = Execute(other);
  const std::uint64_t h1 = LogHash(run.result.log);
  const std::uint64_t h2 = LogHash(again.result.log);
  const std::uint64_t h3 = LogHash(reseeded.result.log);
  r.passed = h1 == h2 && h1 != h3;
  std::ostringstream d;
  d << "seed " << run.scenario.seed << " twice: " << std::hex << h1 << " / " << h2
    << "; seed " << std::dec << other.seed << " differs: " << (h1 != h3 ? "yes" : "no");
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------- 9 -----
CriterionResult PerformanceCriterion(const std::vector<const ScenarioRun*>& runs) {
  CriterionResult r{9, "Performance budget", false, "", 0.0};
  double p99 = 0.0, p50 = 0.0;
  for (const ScenarioRun* run : runs) {
    const StepTimeStats st = ComputeStepTimes(run->result.log);
    p99 = std::max(p99, st.p99);
    p50 = std::max(p50, st.p50);
  }
  r.passed = p99 < 250.0;
  r.detail = Fmt("p99 control step %.1f us (< 250 us), p50 %.1f us", p99, p50);
  return r;
}

// ---------------------------------------------------------------- 10 ----
CriterionResult DeterminantCriterion(const std::vector<const ScenarioRun*>& runs) {
  CriterionResult r{10, "det(Ke_hat) identity", false, "", 0.0};
  double worst = 0.0;
  long steps = 0;
  for (const ScenarioRun* run : runs) {
    const Projectors proj = ComputeProjectors(
        run->scenario.contact ? run->scenario.contact->normal : Vec2(0.0, -1.0));
    for (const LogRecord& rec : run->result.log.records) {
      const Mat2 Ke = rec.ke_hat_normal * proj.normal + rec.ke_hat_tangential * proj.tangential;
      const StiffnessMatrix sm{Ke, rec.ke_hat_normal, rec.ke_hat_tangential};
      worst = std::max(worst, std::abs(Ke.determinant() - sm.ClosedFormDeterminant()));
      ++steps;
    }
  }
  r.passed = worst <= 1e-14 && steps > 0;
  r.detail = Fmt("%.0f logged steps, max |det - k_t k_n| %.2e (<= 1e-14)", steps, worst);
  return r;
}

}  // namespace

Matrix FiniteDifference(const std::function<Vector(const Vector&)>& f, const Vector& x,
                        double h) {
  Matrix out;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Vector col = (f(xp) - f(xm)) / (2.0 * h);
    if (k == 0) out.resize(col.size(), x.size());
    out.col(k) = col;
  }
  return out;
}

double RelativeError(const Matrix& a, const Matrix& b, double floor) {
  return (a - b).norm() / std::max(b.norm(), floor);
}

JointState RandomJointState(const ChainParams& params, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> deflection(-0.5, 0.5);
  JointState js{Vector(params.num_actuated()), Vector(params.num_flexible())};
  for (Eigen::Index i = 0; i < js.gamma.size(); ++i) js.gamma[i] = angle(rng);
  for (Eigen::Index i = 0; i < js.delta.size(); ++i) js.delta[i] = deflection(rng);
  return js;
}

double JacobianErrors::max() const {
  return std::max({J, J_cg_delta, dJp_delta_dgamma, dJcg_delta_dgamma});
}

JacobianErrors CompareJacobians(const ChainParams& params, const JointState& js,
                                double h) {
  const int N = params.num_actuated();
  const int M = params.num_flexible();
  const JacobianSet jac = ComputeJacobians(params, js);
  auto split = [N, M](const Vector& theta) {
    return JointState{theta.head(N), theta.tail(M)};
  };
  Vector theta(N + M);
  theta << js.gamma, js.delta;

  JacobianErrors err;
  const Matrix J_fd = FiniteDifference(
      [&](const Vector& th) { return Vector(ForwardKinematics(params, split(th)).q()); },
      theta, h);
  err.J = RelativeError(jac.J, J_fd);
  const Matrix cg_fd = FiniteDifference(
      [&](const Vector& d) {
        return Vector(ComputeCenterOfMass(params, {js.gamma, d}).position);
      },
      js.delta, h);
  err.J_cg_delta = RelativeError(jac.J_cg_delta, cg_fd);

  std::vector<Matrix> dJp_fd, dJcg_fd;
  for (int k = 0; k < N; ++k) {
    auto at = [&](double h) {
      JointState s = js;
      s.gamma[k] += h;
      return ComputeJacobians(params, s);
    };
    const JacobianSet plus = at(h), minus = at(-h);
    dJp_fd.push_back((plus.Jp_delta - minus.Jp_delta) / (2 * h));
    dJcg_fd.push_back((plus.J_cg_delta - minus.J_cg_delta) / (2 * h));
  }
  err.dJp_delta_dgamma = RelativeError(Stack(jac.dJp_delta_dgamma), Stack(dJp_fd));
  err.dJcg_delta_dgamma = RelativeError(Stack(jac.dJcg_delta_dgamma), Stack(dJcg_fd));
  return err;
}

Vector FrozenDeflectionRate(const ChainParams& params, const ContactParams& contact,
                            const JointState& js, const Vector& gamma_dot, double h) {
  const Vector K = params.stiffness();
  const Mat2 Ke = MakeStiffness(contact).Ke;
  auto deflection = [&](double s) {
    const JointState moved{js.gamma + s * gamma_dot, js.delta};
    const JacobianSet jac = ComputeJacobians(params, moved);
    const Vec2 p = ForwardKinematics(params, moved).p;
    const Vector load = -jac.Jp_delta.transpose() * (Ke * (p - contact.rest_point)) +
                        GravityTorque(params, jac);
    return Vector(load.cwiseQuotient(K));
  };
  return (deflection(h) - deflection(-h)) / (2.0 * h);
}

Vector ModelDeflectionRate(const ChainParams& params, const ContactParams& contact,
                           const JointState& js, const Vector& gamma_dot) {
  const JacobianSet jac = ComputeJacobians(params, js);
  const Vec2 p = ForwardKinematics(params, js).p;
  const Matrix jfg = ComputeJfg(params, &contact, true, p, jac);
  const Matrix theta = ThetaFrom(params.stiffness(), contact.ke_normal,
                                 contact.ke_tangential);
  return -theta.transpose() * jfg * gamma_dot;
}

std::vector<CriterionResult> RunAcceptance(const AcceptanceOptions& opt) {
  std::vector<CriterionResult> results;
  results.push_back(JacobianCriterion(opt));
  results.push_back(FlexCriterion(opt));

  Scenario force = BenchmarkForceScenario();
  force.seed = opt.seed;
  const ScenarioRun force_run = Execute(force);
  results.push_back(LyapunovCriterion(force_run));
  results.push_back(ForceCriterion(force_run));

  Scenario mixed = BenchmarkMixedScenario();
  mixed.seed = opt.seed;
  const ScenarioRun mixed_run = Execute(mixed);
  Scenario position = BenchmarkPositionScenario();
  position.seed = opt.seed;
  const ScenarioRun position_run = Execute(position);

  std::vector<ScenarioRun> noise_runs;
  noise_runs.reserve(opt.noise_runs);
  for (int i = 0; i < opt.noise_runs; ++i) {
    Scenario s = BenchmarkMixedScenario();
    s.seed = opt.seed + 1000 + i;
    noise_runs.push_back(Execute(s));
  }
  std::vector<const ScenarioRun*> all = {&force_run, &mixed_run, &position_run};
  for (const ScenarioRun& run : noise_runs) all.push_back(&run);

  results.push_back(ProjectionCriterion(all));
  results.push_back(UnifyingCriterion(mixed_run));
  results.push_back(EquilibriumCriterion());
  results.push_back(DeterminismCriterion(mixed_run));
  results.push_back(PerformanceCriterion({&force_run, &mixed_run}));
  results.push_back(DeterminantCriterion(all));
  return results;
}

std::string FormatResult(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-24s ", r.passed ? "PASS" : "FAIL", r.id,
                r.name.c_str());
  return head + r.detail;
}

}  // namespace flexarm::verify
