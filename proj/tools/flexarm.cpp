// Command-line front end: simulate, check, sweep, export.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"

#include "flexarm/export.hpp"
#include "flexarm/runner.hpp"
#include "flexarm/scenario.hpp"
#include "flexarm/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace flexarm;

namespace {

constexpr int kExitRunFailed = 1;
constexpr int kExitUsage = 2;

Scenario ResolveScenario(const std::string& config) {
  if (config == "@mixed") return BenchmarkMixedScenario();
  if (config == "@force") return BenchmarkForceScenario();
  if (config == "@position") return BenchmarkPositionScenario();
  return LoadScenario(config);
}

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> duration;
  std::string fidelity;  // "", "on" or "off"

  void Apply(Scenario* s) const {
    if (seed) s->seed = *seed;
    if (duration) s->duration = *duration;
    if (fidelity == "on") s->fidelity.SetEnabled(true);
    if (fidelity == "off") s->fidelity.SetEnabled(false);
  }
};

void WriteJson(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ExportError(path.string() + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

std::vector<std::string> PhaseNames(const Scenario& s) {
  std::vector<std::string> names;
  for (const Phase& p : s.phases) names.push_back(p.name);
  return names;
}

json FailureReport(const Scenario& s, const RunResult& r) {
  return {{"scenario", s.name},
          {"seed", s.seed},
          {"completed", r.completed},
          {"abort_reason", r.abort_reason},
          {"violations", r.violations}};
}

int Simulate(const std::string& config, const Overrides& ov, const fs::path& out_dir,
             bool plots) {
  Scenario s = ResolveScenario(config);
  ov.Apply(&s);
  if (const auto issues = s.Validate(); !issues.empty()) throw ScenarioError(issues);

  fs::create_directories(out_dir);
  const RunResult result = Run(s);
  WriteJson(out_dir / "scenario.json", SerializeScenario(s));
  if (!result.log.records.empty()) {
    WriteCsv(result.log, out_dir / "log.csv");
    WriteJson(out_dir / "summary.json", Summarize(result.log, PhaseNames(s), &result));
    if (plots) WritePlots(result.log, out_dir);
  }

  const fs::path failure = out_dir / "failure.json";
  if (result.ok()) {
    fs::remove(failure);
    std::printf("%s: completed %zu steps, all monitors passed\n", s.name.c_str(),
                result.log.records.size());
    return 0;
  }
  WriteJson(failure, FailureReport(s, result));
  std::fprintf(stderr, "%s: %s\n", s.name.c_str(),
               result.completed ? "monitor violations" : result.abort_reason.c_str());
  for (const std::string& v : result.violations) std::fprintf(stderr, "  %s\n", v.c_str());
  return kExitRunFailed;
}

int Check(int noise_runs, std::uint64_t seed) {
  verify::AcceptanceOptions opt;
  opt.noise_runs = noise_runs;
  opt.seed = seed;
  bool all = true;
  for (const verify::CriterionResult& r : verify::RunAcceptance(opt)) {
    std::printf("%s\n", verify::FormatResult(r).c_str());
    all = all && r.passed;
  }
  return all ? 0 : kExitRunFailed;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      seeds.push_back(std::stoull(item));
    } else {
      const std::uint64_t a = std::stoull(item.substr(0, dash));
      const std::uint64_t b = std::stoull(item.substr(dash + 1));
      if (b < a) throw std::invalid_argument("bad seed range " + item);
      for (std::uint64_t v = a; v <= b; ++v) seeds.push_back(v);
    }
  }
  return seeds;
}

struct SweepRow {
  std::uint64_t seed = 0;
  double ke_scale = 1.0;
  RunResult result;
};

int Sweep(const std::string& config, const Overrides& ov, const std::string& seeds_arg,
          std::vector<double> ke_scales, unsigned jobs, const fs::path& out_dir) {
  Scenario base = ResolveScenario(config);
  ov.Apply(&base);
  const std::vector<std::uint64_t> seeds = ParseSeeds(seeds_arg);
  if (ke_scales.empty()) ke_scales = {1.0};

  std::vector<SweepRow> rows;
  for (double scale : ke_scales) {
    for (std::uint64_t seed : seeds) rows.push_back({seed, scale, {}});
  }
  std::vector<Scenario> scenarios;
  for (const SweepRow& row : rows) {
    Scenario s = base;
    s.seed = row.seed;
    if (s.contact) {
      s.contact->ke_normal *= row.ke_scale;
      s.contact->ke_tangential *= row.ke_scale;
    }
    if (const auto issues = s.Validate(); !issues.empty()) throw ScenarioError(issues);
    scenarios.push_back(std::move(s));
  }

  // Each worker owns the runs it picks; results land in distinct slots.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      RunOptions options;
      options.measure_time = false;
      rows[i].result = Run(scenarios[i], options);
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(rows.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();

  fs::create_directories(out_dir);
  std::ofstream csv(out_dir / "sweep.csv");
  if (!csv) throw ExportError((out_dir / "sweep.csv").string() + ": cannot open");
  csv << "seed,ke_scale,completed,violations,final_position_error,final_force_error,"
         "max_V_increase,log_hash\n";
  int failed = 0;
  json failures = json::array();
  for (const SweepRow& row : rows) {
    const RunResult& r = row.result;
    const LogRecord* last = r.log.records.empty() ? nullptr : &r.log.records.back();
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%d,%zu,%.17g,%.17g,%.17g,%016llx\n",
                  static_cast<unsigned long long>(row.seed), row.ke_scale, r.completed ? 1 : 0,
                  r.violations.size(), last ? last->e.head<2>().norm() : -1.0,
                  last ? last->eta.norm() : -1.0, r.max_V_increase,
                  static_cast<unsigned long long>(LogHash(r.log)));
    csv << buf;
    if (!r.ok()) {
      ++failed;
      json f = FailureReport(base, r);
      f["seed"] = row.seed;
      f["ke_scale"] = row.ke_scale;
      failures.push_back(f);
    }
  }
  std::printf("%zu runs, %d failed\n", rows.size(), failed);
  const fs::path failure = out_dir / "failure.json";
  if (failed == 0) {
    fs::remove(failure);
    return 0;
  }
  WriteJson(failure, failures);
  return kExitRunFailed;
}

int Export(const fs::path& log_path, const std::string& format, const fs::path& out_dir) {
  const RunLog log = ReadCsv(log_path);
  if (log.records.empty()) throw ExportError(log_path.string() + ": no records");
  fs::create_directories(out_dir);
  const bool all = format == "all";
  if (all || format == "csv") WriteCsv(log, out_dir / "log.csv");
  if (all || format == "summary") WriteJson(out_dir / "summary.json", Summarize(log, {}));
  if (all || format == "svg") WritePlots(log, out_dir);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive force/motion control of a flexible-joint planar arm"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config;
  std::string out = "out";
  auto add_overrides = [&](CLI::App* cmd) {
    cmd->add_option("--seed", ov.seed, "Noise seed");
    cmd->add_option("--duration", ov.duration, "Simulated time [s]")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--fidelity", ov.fidelity, "Sensor quantization and noise")
        ->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--out", out, "Output directory");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one scenario");
  simulate->add_option("config", config,
                       "Scenario JSON, or @mixed, @force, @position for the built-ins")
      ->required();
  bool no_plots = false;
  simulate->add_flag("--no-plots", no_plots, "Skip the SVG plots");
  add_overrides(simulate);

  auto* check = app.add_subcommand("check", "Acceptance suite on the built-in scenarios");
  int noise_runs = 100;
  std::uint64_t check_seed = 1;
  check->add_option("--noise-runs", noise_runs, "Seeded noisy mixed runs")
      ->check(CLI::NonNegativeNumber);
  check->add_option("--seed", check_seed, "Base seed");

  auto* sweep = app.add_subcommand("sweep", "Batch over seeds and contact stiffness");
  sweep->add_option("config", config, "Scenario JSON or built-in name")->required();
  std::string seeds = "1-10";
  std::vector<double> ke_scales;
  unsigned jobs = 0;
  sweep->add_option("--seeds", seeds, "Seeds, e.g. 1-20 or 1,5,9");
  sweep->add_option("--ke-scale", ke_scales, "Factors on the true contact moduli")
      ->delimiter(',');
  sweep->add_option("--jobs", jobs, "Worker threads (0: one per core)");
  add_overrides(sweep);

  auto* exporter = app.add_subcommand("export", "Summary and plots from a run log");
  std::string log_path;
  std::string format = "all";
  exporter->add_option("log", log_path, "CSV run log")->required()->check(CLI::ExistingFile);
  exporter->add_option("--format", format, "csv, summary, svg or all")
      ->check(CLI::IsMember({"csv", "summary", "svg", "all"}));
  exporter->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return Simulate(config, ov, out, !no_plots);
    if (*check) return Check(noise_runs, check_seed);
    if (*sweep) return Sweep(config, ov, seeds, ke_scales, jobs, out);
    if (*exporter) return Export(log_path, format, out);
  } catch (const ScenarioError& err) {
    std::fprintf(stderr, "%s\n", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return kExitUsage;
  }
  return kExitUsage;
}
