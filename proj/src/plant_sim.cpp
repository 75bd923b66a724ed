#include "flexarm/plant_sim.hpp"

#include <cmath>

namespace flexarm {
namespace {

PlantState Resolve(PlantState s, const ContactParams* contact,
                   const ChainParams& params, const DeflectionSolveOptions& solve) {
  const StaticDeflection sol = SolveStaticDeflection(
      params, contact, s.gamma, s.delta, s.contact_active, solve);
  s.delta = sol.delta;
  s.f_true = sol.force;
  s.contact_active = sol.contact_active;
  s.tangential_scale = sol.tangential_scale;
  const TaskPose pose = ForwardKinematics(params, {s.gamma, s.delta});
  s.p = pose.p;
  s.alpha = pose.alpha;
  return s;
}

}  // namespace

std::vector<std::string> FidelityOptions::Validate(const std::string& prefix) const {
  std::vector<std::string> errors;
  if (!(servo_quantization > 0.0)) {
    errors.push_back(prefix + ".servo_quantization must be > 0");
  }
  if (!(force_noise_std >= 0.0)) {
    errors.push_back(prefix + ".force_noise_std must be >= 0");
  }
  if (!(measurement_rate > 0.0)) {
    errors.push_back(prefix + ".measurement_rate must be > 0");
  }
  if (!(plant_dt > 0.0)) {
    errors.push_back(prefix + ".plant_dt must be > 0");
  } else if (measurement_rate > 0.0 && plant_dt > 1.0 / measurement_rate) {
    errors.push_back(prefix + ".plant_dt must not exceed 1/measurement_rate");
  }
  return errors;
}

PlantState InitialPlantState(const ChainParams& params, const ContactParams* contact,
                             const Vector& gamma0,
                             const DeflectionSolveOptions& solve) {
  PlantState s;
  s.gamma = gamma0;
  s.delta = Vector::Zero(params.num_flexible());
  if (contact != nullptr) {
    const TaskPose rigid = ForwardKinematics(params, {s.gamma, s.delta});
    s.contact_active = IsPenetrating(*contact, rigid.p);
  }
  return Resolve(std::move(s), contact, params, solve);
}

PlantState PlantStep(const PlantState& state, const Vector& gamma_dot_cmd,
                     const ContactParams* contact, const ChainParams& params,
                     double dt, const DeflectionSolveOptions& solve) {
  if (!(dt > 0.0)) throw std::invalid_argument("plant step: dt must be > 0");
  PlantState next = state;
  next.gamma += dt * gamma_dot_cmd;
  next.t += dt;
  return Resolve(std::move(next), contact, params, solve);
}

Vector Quantize(const Vector& angles, double resolution) {
  return (angles.array() / resolution).round() * resolution;
}

Sensor::Sensor(const ChainParams& params, const FidelityOptions& options,
               std::uint64_t seed)
    : params_(params), options_(options), rng_(seed) {}

Measurement Sensor::Measure(const PlantState& state) {
  Measurement m;
  m.gamma = options_.quantization
                ? Quantize(state.gamma, options_.servo_quantization)
                : state.gamma;
  m.delta = state.delta;
  m.q = ForwardKinematics(params_, {m.gamma, m.delta}).q();
  m.f = state.f_true;
  if (options_.force_noise) {
    // Both draws happen unconditionally so the sequence does not depend on
    // the contact history.
    const double nx = noise_(rng_);
    const double ny = noise_(rng_);
    m.f += options_.force_noise_std * Vec2(nx, ny);
  }
  return m;
}

}  // namespace flexarm
