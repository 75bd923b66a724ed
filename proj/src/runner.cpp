#include "flexarm/runner.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

namespace flexarm {
namespace {

// |Theta_hat| may grow to this multiple of its initial envelope.
constexpr double kThetaEnvelopeFactor = 10.0;

class Monitors {
 public:
  explicit Monitors(RunResult* result, int cap) : result_(result), cap_(cap) {}

  void Fail(const std::string& monitor, double t, const std::string& detail) {
    if (++counts_[monitor] > cap_) return;
    std::ostringstream line;
    line << monitor << " t=" << t << ": " << detail;
    result_->violations.push_back(line.str());
  }

 private:
  RunResult* result_;
  int cap_;
  std::map<std::string, int> counts_;
};

std::string Str(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

Vector Flatten(const Matrix& m) {
  Vector out(m.size());
  int k = 0;
  for (int r = 0; r < m.rows(); ++r) {
    for (int c = 0; c < m.cols(); ++c) out[k++] = m(r, c);
  }
  return out;
}

// Entry-wise envelope of Theta_hat implied by the initial Lyapunov level:
// V(t) <= V(0) keeps |Theta_tilde_ij| <= sqrt(2 V(0) Gamma_i).
Matrix LyapunovEnvelope(const Matrix& theta0, const Vector& Gamma_theta, double V0) {
  Matrix env = theta0.cwiseAbs();
  for (int i = 0; i < env.rows(); ++i) {
    env.row(i).array() += std::sqrt(2.0 * std::max(V0, 1.0) * Gamma_theta[i]);
  }
  return env;
}

class PhaseSequencer {
 public:
  explicit PhaseSequencer(const std::vector<Phase>& phases) : phases_(phases) {}

  int current() const { return current_; }

  /// Advances when the next phase's start time has passed or its trigger
  /// has held long enough. Returns true on a transition.
  bool Update(double t, double dt, double position_error, double force_error) {
    if (current_ + 1 >= static_cast<int>(phases_.size())) return false;
    const Phase& next = phases_[current_ + 1];
    bool go = t >= next.start_time - 1e-9;
    if (!go && next.trigger) {
      const double metric = next.trigger->metric == TriggerMetric::kPositionError
                                ? position_error
                                : force_error;
      held_ = metric < next.trigger->threshold ? held_ + dt : 0.0;
      // Must also have spent at least one step in the current phase.
      go = held_ >= next.trigger->hold && held_ > 0.0;
    }
    if (go) {
      ++current_;
      held_ = 0.0;
    }
    return go;
  }

 private:
  const std::vector<Phase>& phases_;
  int current_ = 0;
  double held_ = 0.0;
};

void EnterPhase(const Phase& phase, const Vec3& q_now, bool first,
                ControllerState* state) {
  if (phase.kind == PhaseKind::kPositionWaypoint) {
    state->q_r = phase.target.head<3>();
    state->f_r.setZero();
  } else {
    if (first) state->q_r = q_now;
    state->f_r = phase.target.head<2>();
  }
}

}  // namespace

RunResult Run(const Scenario& scenario, const RunOptions& options) {
  const std::vector<std::string> issues = scenario.Validate();
  if (!issues.empty()) throw ScenarioError(issues);

  RunResult result;
  Monitors monitors(&result, options.max_violations_per_monitor);
  const ChainParams& chain = scenario.chain;
  const ContactParams* contact = scenario.contact_ptr();
  const Gains& gains = scenario.gains;
  const AdaptationParams& adapt = scenario.adaptation;
  const FidelityOptions& fid = scenario.fidelity;
  const int N = chain.num_actuated();
  const int M = chain.num_flexible();

  const double dt = fid.control_dt();
  const int substeps = std::max(1, static_cast<int>(std::lround(dt / fid.plant_dt)));
  const double plant_dt = dt / substeps;
  const int steps = static_cast<int>(std::floor(scenario.duration / dt + 1e-9));

  result.log.num_actuated = N;
  result.log.num_flexible = M;
  result.log.control_dt = dt;
  result.log.records.reserve(steps + 1);
  result.V_monitor_active = !fid.quantization && !fid.force_noise;

  // Ground truth, only used by the certificate.
  const Vec2 ke_true = contact ? Vec2(contact->ke_normal, contact->ke_tangential)
                               : Vec2::Zero();
  const Matrix theta_true = ThetaFrom(chain.stiffness(), ke_true.x(), ke_true.y());
  const Vec2 n = contact ? contact->normal : Vec2(0.0, -1.0);
  const Projectors proj = ComputeProjectors(n);

  Sensor sensor(chain, fid, scenario.seed);
  AdaptiveState adaptive = InitialAdaptiveState(chain.stiffness(), adapt);
  const Matrix theta0 = adaptive.theta_hat;
  Matrix envelope;

  PlantState plant;
  try {
    plant = InitialPlantState(chain, contact, scenario.initial_gamma, scenario.solver);
  } catch (const DeflectionDivergence& err) {
    result.abort_reason = err.what();
    return result;
  }

  ControllerState ctrl;
  PhaseSequencer sequencer(scenario.phases);
  {
    const Measurement m0 = sensor.Measure(plant);
    EnterPhase(scenario.phases.front(), m0.q, true, &ctrl);
    // The sensor is re-created so that step 0 sees the first noise draw.
    sensor = Sensor(chain, fid, scenario.seed);
  }

  double last_position_error = 1e300;
  double last_force_error = 1e300;
  double V_prev = 0.0;
  const auto clock_now = [] { return std::chrono::steady_clock::now(); };

  for (int step = 0; step <= steps; ++step) {
    const double t = step * dt;
    // A new phase moves the references, so V may jump at that step.
    bool transition = false;
    if (step > 0 &&
        sequencer.Update(t, dt, last_position_error, last_force_error)) {
      EnterPhase(scenario.phases[sequencer.current()], Vec3::Zero(), false, &ctrl);
      transition = true;
    }

    const auto t0 = clock_now();
    const Measurement meas = sensor.Measure(plant);
    const JointState js_meas{meas.gamma, meas.delta};
    const JacobianSet jac = ComputeJacobians(chain, js_meas);
    const Vec3 e = ctrl.q_r - meas.q;
    const Vec2 eta_meas = ctrl.f_r - meas.f;
    const bool contact_detected = contact != nullptr && meas.f.norm() > gains.eta_t;
    const Matrix jfg =
        ComputeJfg(chain, contact, contact_detected, meas.q.head<2>(), jac);
    const Matrix J_T_hat = EstimatedTaskJacobian(jac, adaptive.theta_hat, jfg);
    const StiffnessMatrix Ke_hat =
        MakeStiffness(n, adaptive.ke_hat_normal, adaptive.ke_hat_tangential);

    const ControlOutput out = ControlStep(ctrl, e, eta_meas, J_T_hat, jac.Jp_gamma,
                                          Ke_hat.Ke, gains);
    const Matrix theta_dot = ThetaUpdate(jfg, out.gamma_dot, e, gains.K_P,
                                         jac.J_delta, adapt.Gamma_theta);
    const KeRates ke_rates =
        KeUpdate(out.eta, proj, jac.Jp_gamma, out.gamma_dot, adapt, adaptive);

    // Certificate on the true error state.
    const Vec3 e_true = ctrl.q_r - Vec3(plant.p.x(), plant.p.y(), plant.alpha);
    const Vec2 eta_true = ctrl.f_r - plant.f_true;
    const Vec2 ke_tilde(ke_true.x() - adaptive.ke_hat_normal,
                        ke_true.y() - adaptive.ke_hat_tangential);
    const Certificate cert =
        LyapunovValue(StackState(ctrl.xi, e_true, eta_true),
                      theta_true - adaptive.theta_hat, ke_tilde, gains, adapt);
    const double vdot = VdotBound(ctrl.xi, e, out.eta, J_T_hat, jac.Jp_gamma,
                                  Ke_hat.Ke, gains, out.sigma);
    const double proj_corr = ProjectionCorrection(ke_tilde, ke_rates, adapt);

    LogRecord rec;
    rec.t = t;
    rec.phase = sequencer.current();
    rec.gamma = plant.gamma;
    rec.delta = plant.delta;
    rec.p = plant.p;
    rec.alpha = plant.alpha;
    rec.q_r = ctrl.q_r;
    rec.f_r = ctrl.f_r;
    rec.f_true = plant.f_true;
    rec.f_meas = meas.f;
    rec.eta = eta_meas;
    rec.e = e;
    rec.xi = ctrl.xi;
    rec.ke_hat_normal = adaptive.ke_hat_normal;
    rec.ke_hat_tangential = adaptive.ke_hat_tangential;
    rec.theta_hat = Flatten(adaptive.theta_hat);
    rec.V = cert.V;
    rec.Vdot_bound = vdot;
    rec.projection_correction = proj_corr;
    rec.contact = plant.contact_active;
    if (options.measure_time) {
      rec.step_us =
          std::chrono::duration<double, std::micro>(clock_now() - t0).count();
    }
    result.log.records.push_back(std::move(rec));

    // Monitors.
    if (step == 0) result.V0 = cert.V;
    if (step > 0 && !transition) {
      const double increase = cert.V - V_prev;
      result.max_V_increase = std::max(result.max_V_increase, increase);
      if (result.V_monitor_active &&
          increase > 1e-6 * std::max(result.V0, 1.0)) {
        monitors.Fail("lyapunov_decrease", t, "V rose by " + Str(increase));
      }
    }
    V_prev = cert.V;
    if (vdot > 0.0) monitors.Fail("vdot_bound", t, "bound " + Str(vdot));
    const double det_err =
        std::abs(Ke_hat.Ke.determinant() - Ke_hat.ClosedFormDeterminant());
    result.max_det_error = std::max(result.max_det_error, det_err);
    if (det_err > 1e-14) monitors.Fail("det_identity", t, Str(det_err));
    result.max_projection_correction =
        std::max(result.max_projection_correction, proj_corr);
    if (proj_corr > 0.0) {
      monitors.Fail("projection_correction", t, "term " + Str(proj_corr));
    }
    const double residual =
        StaticResidual(chain, contact, {plant.gamma, plant.delta})
            .lpNorm<Eigen::Infinity>();
    // The grazing branch carries a partial tangential load by construction.
    if (plant.tangential_scale == 1.0) {
      result.max_static_residual = std::max(result.max_static_residual, residual);
      if (residual > 1e-9) monitors.Fail("static_residual", t, Str(residual));
    }
    if (step == 0) {
      envelope = LyapunovEnvelope(theta0, adapt.Gamma_theta, cert.V);
    }
    const double ratio = adaptive.theta_hat.cwiseAbs().cwiseQuotient(envelope).maxCoeff();
    result.max_theta_ratio = std::max(result.max_theta_ratio, ratio);
    if (ratio > kThetaEnvelopeFactor) {
      monitors.Fail("theta_bounded", t, "ratio " + Str(ratio));
    }

    last_position_error = e.head<2>().norm();
    last_force_error = eta_meas.norm();
    if (step == steps) break;

    ctrl = IntegrateController(ctrl, out, dt);
    adaptive = IntegrateAdaptation(adaptive, theta_dot, ke_rates, dt, adapt);
    if (!adapt.bounds_normal.Contains(adaptive.ke_hat_normal) ||
        !adapt.bounds_tangential.Contains(adaptive.ke_hat_tangential)) {
      monitors.Fail("ke_bounds", t, "estimate left its bounds");
    }
    try {
      for (int s = 0; s < substeps; ++s) {
        plant = PlantStep(plant, out.gamma_dot, contact, chain, plant_dt,
                          scenario.solver);
      }
    } catch (const DeflectionDivergence& err) {
      result.abort_reason = err.what();
      return result;
    }
    // Keep the plant clock on the control grid.
    plant.t = (step + 1) * dt;
    if (!plant.gamma.allFinite() || !ctrl.q_r.allFinite() ||
        !ctrl.xi.allFinite() || !adaptive.theta_hat.allFinite()) {
      result.abort_reason = "non-finite state at t=" + Str(t + dt);
      return result;
    }
  }
  result.completed = true;
  return result;
}

}  // namespace flexarm
