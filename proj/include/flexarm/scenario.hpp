#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexarm/adaptation.hpp"
#include "flexarm/plant_sim.hpp"
#include "flexarm/unified_controller.hpp"

namespace flexarm {

enum class PhaseKind { kPositionWaypoint, kForceRegulation };
enum class TriggerMetric { kPositionError, kForceError };

/// Early entry into a phase once the running phase's error metric has
/// stayed below `threshold` for `hold` seconds.
struct PhaseTrigger {
  TriggerMetric metric = TriggerMetric::kPositionError;
  double threshold = 1e-3;
  double hold = 0.0;
};

/// One mission segment. Position phases set q_r := target (x, y, alpha) and
/// f_r := 0; force phases set f_r := target and leave q_r to the controller.
/// `start_time` is the time-based entry, and the timeout fallback when a
/// trigger is set.
struct Phase {
  std::string name;
  PhaseKind kind = PhaseKind::kPositionWaypoint;
  Vector target;
  double start_time = 0.0;
  std::optional<PhaseTrigger> trigger;
};

struct Scenario {
  std::string name = "benchmark_mixed";
  ChainParams chain = ChainParams::Benchmark();
  std::optional<ContactParams> contact = ContactParams{};
  Gains gains = Gains::Benchmark();
  AdaptationParams adaptation = AdaptationParams::Benchmark();
  FidelityOptions fidelity;
  DeflectionSolveOptions solver;
  Vector initial_gamma;
  std::vector<Phase> phases;
  double duration = 60.0;
  std::uint64_t seed = 1;

  const ContactParams* contact_ptr() const {
    return contact ? &*contact : nullptr;
  }

  /// Every invariant violation, not only the first.
  std::vector<std::string> Validate() const;
};

/// Approach waypoint, press with f_r = (0, 2) N, retreat; fidelity on.
Scenario BenchmarkMixedScenario();
/// Start near the interface and regulate f_r = (-1, 1.5) N; noise free.
Scenario BenchmarkForceScenario();
/// Free-space waypoint regulation without an interface.
Scenario BenchmarkPositionScenario();

/// Parse or validation failure. `issues` lists every problem found.
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// JSON text to a validated scenario. Absent fields take the benchmark
/// defaults; an empty document yields the benchmark mixed scenario. Chain
/// lengths are read in cm and masses in g unless "units" is "si".
Scenario ParseScenario(const std::string& text);
Scenario LoadScenario(const std::filesystem::path& path);

/// SI-unit JSON; ParseScenario(SerializeScenario(s).dump()) reproduces s.
nlohmann::json SerializeScenario(const Scenario& scenario);

}  // namespace flexarm
