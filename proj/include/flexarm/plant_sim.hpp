#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "flexarm/flex_deflection.hpp"

namespace flexarm {

/// Sensor/actuator imperfections of the benchmark rig.
struct FidelityOptions {
  bool quantization = false;
  double servo_quantization = 0.0052;  // rad
  bool force_noise = false;
  double force_noise_std = 0.005;      // N, per axis
  double measurement_rate = 40.0;      // Hz, also the control rate
  double plant_dt = 1e-3;              // s

  /// All degradations switched on or off; rates are kept.
  void SetEnabled(bool on) {
    quantization = on;
    force_noise = on;
  }
  double control_dt() const { return 1.0 / measurement_rate; }

  std::vector<std::string> Validate(const std::string& prefix = "fidelity") const;
};

/// Ground truth of the quasi-static plant.
struct PlantState {
  Vector gamma;
  Vector delta;
  Vec2 p = Vec2::Zero();
  double alpha = 0.0;
  Vec2 f_true = Vec2::Zero();  // end effector on environment
  bool contact_active = false;
  double tangential_scale = 1.0;
  double t = 0.0;
};

/// Plant at rest at `gamma0`, deflection solved.
PlantState InitialPlantState(const ChainParams& params, const ContactParams* contact,
                             const Vector& gamma0,
                             const DeflectionSolveOptions& solve = {});

/// gamma += dt * gamma_dot_cmd, then deflection, pose and contact force are
/// re-solved. Propagates DeflectionDivergence.
PlantState PlantStep(const PlantState& state, const Vector& gamma_dot_cmd,
                     const ContactParams* contact, const ChainParams& params,
                     double dt, const DeflectionSolveOptions& solve = {});

struct Measurement {
  Vector gamma;
  Vector delta;
  Vec3 q = Vec3::Zero();
  Vec2 f = Vec2::Zero();
};

/// Quantized joint encoders and a noisy force sensor. Same seed, same
/// noise sequence.
class Sensor {
 public:
  Sensor(const ChainParams& params, const FidelityOptions& options,
         std::uint64_t seed);

  Measurement Measure(const PlantState& state);

 private:
  ChainParams params_;
  FidelityOptions options_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_{0.0, 1.0};
};

/// Encoder quantization: nearest multiple of `resolution`.
Vector Quantize(const Vector& angles, double resolution);

}  // namespace flexarm
