#pragma once

#include <string>
#include <vector>

#include "flexarm/lyapunov_analysis.hpp"
#include "flexarm/scenario.hpp"

namespace flexarm {

/// One control step (40 Hz by default). Quantities are sampled before the
/// controller and adaptive states are advanced.
struct LogRecord {
  double t = 0.0;
  int phase = 0;
  Vector gamma;
  Vector delta;
  Vec2 p = Vec2::Zero();
  double alpha = 0.0;
  Vec3 q_r = Vec3::Zero();
  Vec2 f_r = Vec2::Zero();
  Vec2 f_true = Vec2::Zero();
  Vec2 f_meas = Vec2::Zero();
  Vec2 eta = Vec2::Zero();  // f_r - f_meas, before the deadband
  Vec3 e = Vec3::Zero();    // q_r - q_meas
  Vec3 xi = Vec3::Zero();
  double ke_hat_normal = 0.0;
  double ke_hat_tangential = 0.0;
  Vector theta_hat;  // row-major 3M x M
  double V = 0.0;
  double Vdot_bound = 0.0;
  double projection_correction = 0.0;
  bool contact = false;
  double step_us = 0.0;  // wall clock, excluded from determinism checks
};

struct RunLog {
  int num_actuated = 0;
  int num_flexible = 0;
  double control_dt = 0.0;
  std::vector<LogRecord> records;
};

/// In-run invariant monitors. Each entry of `violations` is one
/// machine-readable line "<monitor> t=<time>: <detail>".
struct RunResult {
  RunLog log;
  bool completed = false;
  std::string abort_reason;
  std::vector<std::string> violations;
  // Monitor summaries.
  double max_V_increase = 0.0;
  double V0 = 0.0;
  double max_static_residual = 0.0;
  double max_det_error = 0.0;
  double max_projection_correction = 0.0;
  double max_theta_ratio = 0.0;  // max |Theta_hat| over its initial envelope
  bool V_monitor_active = false;

  bool ok() const { return completed && violations.empty(); }
};

struct RunOptions {
  /// Disable per-step wall-clock timing.
  bool measure_time = true;
  /// Stop monitoring V once this many violations are recorded per monitor.
  int max_violations_per_monitor = 20;
};

/// Runs plant substeps, control, adaptation and certification for the whole
/// scenario. Divergence of the deflection solve or a non-finite state aborts
/// the run; the partial log is kept.
RunResult Run(const Scenario& scenario, const RunOptions& options = {});

}  // namespace flexarm
