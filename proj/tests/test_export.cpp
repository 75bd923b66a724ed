#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "flexarm/export.hpp"
#include "flexarm/scenario.hpp"

using namespace flexarm;
namespace fs = std::filesystem;

namespace {

RunResult ShortRun(Scenario s, double duration) {
  s.duration = duration;
  return Run(s);
}

std::string Csv(const RunLog& log, bool timing) {
  std::ostringstream out;
  WriteCsv(log, out, timing);
  return out.str();
}

fs::path TempDir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("flexarm_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("CSV header follows the log schema") {
  const std::vector<std::string> h = CsvHeader(4, 3);
  // t, phase, 4 gamma, 3 delta, pose 3, q_r 3, f_r 2, f_true 2, f_meas 2,
  // eta 2, e 3, xi 3, two k_e estimates, 27 Theta entries, V, Vdot bound,
  // projection correction, contact flag, step time.
  CHECK(h.size() == 2u + 4 + 3 + 3 + 3 + 2 + 2 + 2 + 2 + 3 + 3 + 2 + 27 + 5);
  CHECK(h.front() == "t");
  CHECK(h[2] == "gamma_1");
  CHECK(h[6] == "delta_1");
  CHECK(std::find(h.begin(), h.end(), "theta_9_3") != h.end());
  CHECK(h.back() == "step_us");

  const RunResult r = ShortRun(BenchmarkForceScenario(), 0.5);
  std::istringstream in(Csv(r.log, true));
  std::string first;
  std::getline(in, first);
  std::string joined;
  for (std::size_t i = 0; i < h.size(); ++i) joined += (i ? "," : "") + h[i];
  CHECK(first == joined);
}

TEST_CASE("log schema matches the golden first record") {
  const RunResult r = ShortRun(BenchmarkMixedScenario(), 0.05);
  std::istringstream produced(Csv(r.log, false));
  std::ifstream golden(FLEXARM_TEST_DATA "/../golden/mixed_first_record.csv");
  REQUIRE(golden.good());
  for (int line = 0; line < 2; ++line) {
    std::string a, b;
    std::getline(produced, a);
    std::getline(golden, b);
    CHECK(a == b);
  }
}

TEST_CASE("CSV round trip is lossless") {
  const RunResult r = ShortRun(BenchmarkMixedScenario(), 1.0);
  const std::string text = Csv(r.log, true);
  std::istringstream in(text);
  const RunLog back = ReadCsv(in);
  CHECK(back.records.size() == r.log.records.size());
  CHECK(back.num_actuated == 4);
  CHECK(back.num_flexible == 3);
  CHECK(Csv(back, true) == text);
  CHECK(LogHash(back) == LogHash(r.log));
}

TEST_CASE("malformed logs are rejected") {
  std::istringstream empty("");
  CHECK_THROWS_AS(ReadCsv(empty), ExportError);
  std::istringstream bad_header("t,phase,nonsense\n0,0,1\n");
  CHECK_THROWS_AS(ReadCsv(bad_header), ExportError);

  const RunResult r = ShortRun(BenchmarkForceScenario(), 0.1);
  std::string text = Csv(r.log, true);
  const auto second_line = text.find('\n') + 1;
  text.insert(second_line, "x");
  std::istringstream corrupt(text);
  CHECK_THROWS_AS(ReadCsv(corrupt), ExportError);
  CHECK_THROWS_AS(ReadCsv(fs::path("/nonexistent/log.csv")), ExportError);
}

TEST_CASE("step-time percentiles use the nearest rank") {
  RunLog log;
  for (int i = 1; i <= 200; ++i) {
    LogRecord rec;
    rec.step_us = i;
    log.records.push_back(rec);
  }
  const StepTimeStats st = ComputeStepTimes(log);
  CHECK(st.p50 == 100.0);
  CHECK(st.p90 == 180.0);
  CHECK(st.p99 == 198.0);
  CHECK(st.max == 200.0);
}

TEST_CASE("summary reports convergence and the p99 step time") {
  const Scenario s = BenchmarkForceScenario();
  const RunResult r = Run(s);
  std::vector<std::string> names;
  for (const Phase& p : s.phases) names.push_back(p.name);
  const nlohmann::json j = Summarize(r.log, names, &r);
  REQUIRE(j.contains("step_time_us"));
  CHECK(j["step_time_us"]["p99"].get<double>() > 0.0);
  CHECK(j["step_time_us"]["p99"].get<double>() == ComputeStepTimes(r.log).p99);
  CHECK(j["phases"].size() == 1u);
  CHECK(j["phases"][0]["name"] == "press");
  CHECK(j["phases"][0]["metric"] == "force_error");
  CHECK_FALSE(j["phases"][0]["converged_at"].is_null());
  CHECK(j["completed"] == true);
}

TEST_CASE("settling time") {
  RunLog log;
  const double eta[] = {1.0, 0.01, 0.2, 0.01, 0.01, 0.01};
  for (int i = 0; i < 6; ++i) {
    LogRecord rec;
    rec.t = i;
    rec.eta = Vec2(eta[i], 0.0);
    log.records.push_back(rec);
  }
  CHECK(SettlingTime(log, 0, 6, 0.05, true) == 3.0);
  CHECK(SettlingTime(log, 0, 3, 0.05, true) < 0.0);
}

TEST_CASE("three plots, one per panel group") {
  const RunResult r = ShortRun(BenchmarkMixedScenario(), 2.0);
  const fs::path dir = TempDir("plots");
  const auto paths = WritePlots(r.log, dir);
  REQUIRE(paths.size() == 3u);
  const char* expected[] = {"force.svg", "pose.svg", "theta.svg"};
  const char* titles[] = {"Adaptive contact parameters", "End-effector orientation",
                          "gravity rows"};
  for (int i = 0; i < 3; ++i) {
    CHECK(paths[i].filename() == expected[i]);
    std::ifstream in(paths[i]);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str().rfind("<svg", 0) == 0);
    CHECK(text.str().find(titles[i]) != std::string::npos);
    CHECK(text.str().find("<polyline") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("writing into a missing directory fails cleanly") {
  const RunResult r = ShortRun(BenchmarkForceScenario(), 0.1);
  CHECK_THROWS_AS(WriteCsv(r.log, fs::path("/nonexistent/dir/log.csv")), ExportError);
}
