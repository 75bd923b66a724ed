#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexarm/runner.hpp"

namespace flexarm {

class ExportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Column names of the run log for N actuated and M flexible joints.
std::vector<std::string> CsvHeader(int num_actuated, int num_flexible);

/// One header line and one line per record. Numbers use 17 significant
/// digits, so reading the file back is lossless.
void WriteCsv(const RunLog& log, std::ostream& out, bool include_timing = true);
void WriteCsv(const RunLog& log, const std::filesystem::path& path);

/// Inverse of WriteCsv. Throws ExportError on a malformed file.
RunLog ReadCsv(std::istream& in);
RunLog ReadCsv(const std::filesystem::path& path);

/// Hash of the CSV without the wall-clock column.
std::uint64_t LogHash(const RunLog& log);

struct StepTimeStats {
  double p50 = 0.0;
  double p90 = 0.0;
  double p99 = 0.0;
  double max = 0.0;
};

/// Nearest-rank percentiles of the per-step compute time, microseconds.
StepTimeStats ComputeStepTimes(const RunLog& log);

/// First time after which `metric` stays below `threshold` for the rest of
/// [begin, end) of the log; negative when it never settles.
double SettlingTime(const RunLog& log, std::size_t begin, std::size_t end,
                    double threshold, bool force_metric);

/// Convergence per phase, V statistics, final errors and step-time
/// percentiles. `result` may be null when only a log is available.
nlohmann::json Summarize(const RunLog& log, const std::vector<std::string>& phase_names,
                         const RunResult* result = nullptr);

/// force.svg (force tracking and the stiffness estimates), pose.svg (pose
/// and references) and theta.svg (Theta_hat entries). Returns the paths.
std::vector<std::filesystem::path> WritePlots(const RunLog& log,
                                              const std::filesystem::path& dir);

}  // namespace flexarm
