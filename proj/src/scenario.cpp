#include "flexarm/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace flexarm {
namespace {

using nlohmann::json;

constexpr double kCm = 0.01;
constexpr double kGram = 0.001;

std::string Join(const std::vector<std::string>& issues) {
  std::string out = "invalid scenario:";
  for (const auto& s : issues) out += "\n  " + s;
  return out;
}

// Collects every problem in the document instead of stopping at the first.
class Reader {
 public:
  std::vector<std::string> issues;

  void Fail(const std::string& path, const std::string& what) {
    issues.push_back(path + ": " + what);
  }

  void AllowedKeys(const json& obj, const std::string& path,
                   std::initializer_list<const char*> keys) {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : obj.items()) {
      if (!allowed.count(key)) Fail(Child(path, key), "unknown field");
    }
  }

  // Sub-object or nullptr when absent or of the wrong type.
  const json* Object(const json& obj, const std::string& path, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) return nullptr;
    if (!it->is_object()) {
      Fail(Child(path, key), "expected an object");
      return nullptr;
    }
    return &*it;
  }

  void Number(const json& obj, const std::string& path, const char* key,
              double* out, double scale = 1.0) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) {
      Fail(Child(path, key), "expected a number");
      return;
    }
    *out = it->get<double>() * scale;
  }

  void Bool(const json& obj, const std::string& path, const char* key, bool* out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_boolean()) {
      Fail(Child(path, key), "expected true or false");
      return;
    }
    *out = it->get<bool>();
  }

  void String(const json& obj, const std::string& path, const char* key,
              std::string* out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_string()) {
      Fail(Child(path, key), "expected a string");
      return;
    }
    *out = it->get<std::string>();
  }

  void Unsigned(const json& obj, const std::string& path, const char* key,
                std::uint64_t* out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_unsigned()) {
      Fail(Child(path, key), "expected a non-negative integer");
      return;
    }
    *out = it->get<std::uint64_t>();
  }

  void Int(const json& obj, const std::string& path, const char* key, int* out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number_integer()) {
      Fail(Child(path, key), "expected an integer");
      return;
    }
    *out = it->get<int>();
  }

  // Array of numbers of any length (expected_size < 0) or a fixed length.
  bool Array(const json& value, const std::string& path, Vector* out,
             int expected_size = -1) {
    if (!value.is_array()) {
      Fail(path, "expected an array of numbers");
      return false;
    }
    if (expected_size >= 0 && static_cast<int>(value.size()) != expected_size) {
      Fail(path, "expected " + std::to_string(expected_size) + " entries, got " +
                     std::to_string(value.size()));
      return false;
    }
    Vector v(static_cast<Eigen::Index>(value.size()));
    bool ok = true;
    for (std::size_t i = 0; i < value.size(); ++i) {
      if (!value[i].is_number()) {
        Fail(path + "[" + std::to_string(i) + "]", "expected a number");
        ok = false;
      } else {
        v[static_cast<Eigen::Index>(i)] = value[i].get<double>();
      }
    }
    if (ok) *out = v;
    return ok;
  }

  void Array(const json& obj, const std::string& path, const char* key, Vector* out,
             int expected_size = -1) {
    auto it = obj.find(key);
    if (it != obj.end()) Array(*it, Child(path, key), out, expected_size);
  }

  template <int R>
  void Fixed(const json& obj, const std::string& path, const char* key,
             Eigen::Matrix<double, R, 1>* out) {
    Vector v;
    auto it = obj.find(key);
    if (it != obj.end() && Array(*it, Child(path, key), &v, R)) *out = v;
  }

  static std::string Child(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

void ReadCompound(Reader& r, const json& j, const std::string& path, double len,
                  double mass, CompoundJoint* c) {
  r.AllowedKeys(j, path, {"l", "L", "l_cg", "L_cg", "m", "M", "k"});
  r.Number(j, path, "l", &c->l, len);
  r.Number(j, path, "L", &c->L, len);
  r.Number(j, path, "l_cg", &c->l_cg, len);
  r.Number(j, path, "L_cg", &c->L_cg, len);
  r.Number(j, path, "m", &c->m, mass);
  r.Number(j, path, "M", &c->M, mass);
  r.Number(j, path, "k", &c->k);
}

void ReadChain(Reader& r, const json& j, double len, double mass, ChainParams* chain) {
  const std::string path = "chain";
  r.AllowedKeys(j, path, {"compound", "ee", "g0"});
  if (auto it = j.find("compound"); it != j.end()) {
    if (it->is_array()) {
      chain->compound.assign(it->size(), CompoundJoint{});
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string p = path + ".compound[" + std::to_string(i) + "]";
        if (!(*it)[i].is_object()) {
          r.Fail(p, "expected an object");
          continue;
        }
        ReadCompound(r, (*it)[i], p, len, mass, &chain->compound[i]);
      }
    } else if (it->is_object()) {
      // One set of values shared by every compound joint.
      CompoundJoint shared;
      ReadCompound(r, *it, path + ".compound", len, mass, &shared);
      for (auto& c : chain->compound) c = shared;
    } else {
      r.Fail(path + ".compound", "expected an array or an object");
    }
  }
  if (const json* ee = r.Object(j, path, "ee")) {
    r.AllowedKeys(*ee, path + ".ee", {"l", "l_cg", "m"});
    r.Number(*ee, path + ".ee", "l", &chain->ee.l, len);
    r.Number(*ee, path + ".ee", "l_cg", &chain->ee.l_cg, len);
    r.Number(*ee, path + ".ee", "m", &chain->ee.m, mass);
  }
  r.Fixed(j, path, "g0", &chain->g0);
}

void ReadContact(Reader& r, const json& j, ContactParams* c) {
  const std::string path = "contact";
  r.AllowedKeys(j, path, {"normal", "rest_point", "ke_normal", "ke_tangential"});
  r.Fixed(j, path, "normal", &c->normal);
  r.Fixed(j, path, "rest_point", &c->rest_point);
  r.Number(j, path, "ke_normal", &c->ke_normal);
  r.Number(j, path, "ke_tangential", &c->ke_tangential);
}

void ReadGains(Reader& r, const json& j, Gains* g) {
  const std::string path = "gains";
  r.AllowedKeys(j, path, {"K_P", "K_I", "K_xi", "K_gamma", "K_eta", "K_gamma_eta",
                          "sigma_p", "eta_t"});
  r.Fixed(j, path, "K_P", &g->K_P);
  r.Fixed(j, path, "K_I", &g->K_I);
  r.Fixed(j, path, "K_xi", &g->K_xi);
  r.Array(j, path, "K_gamma", &g->K_gamma);
  r.Array(j, path, "K_eta", &g->K_eta);
  if (j.contains("K_gamma_eta")) {
    r.Array(j, path, "K_gamma_eta", &g->K_gamma_eta);
  } else if (g->K_gamma.size() == g->K_eta.size()) {
    g->K_gamma_eta = g->K_gamma + g->K_eta;
  }
  r.Number(j, path, "sigma_p", &g->sigma_p);
  r.Number(j, path, "eta_t", &g->eta_t);
}

void ReadBounds(Reader& r, const json& j, const std::string& path,
                ParameterBounds* b) {
  r.AllowedKeys(j, path, {"min", "max"});
  r.Number(j, path, "min", &b->min);
  r.Number(j, path, "max", &b->max);
}

void ReadAdaptation(Reader& r, const json& j, int M, AdaptationParams* a) {
  const std::string path = "adaptation";
  r.AllowedKeys(j, path, {"Gamma_theta", "Gamma_ke_normal", "Gamma_ke_tangential",
                          "bounds_normal", "bounds_tangential", "beta"});
  Vector gt;
  if (auto it = j.find("Gamma_theta"); it != j.end() &&
                                       r.Array(*it, path + ".Gamma_theta", &gt)) {
    if (gt.size() == 2 * M || gt.size() == 3 * M) {
      a->Gamma_theta = AdaptationParams::ExpandGammaTheta(gt, M);
    } else {
      r.Fail(path + ".Gamma_theta",
             "expected " + std::to_string(2 * M) + " or " + std::to_string(3 * M) +
                 " entries, got " + std::to_string(gt.size()));
    }
  }
  r.Number(j, path, "Gamma_ke_normal", &a->Gamma_ke_normal);
  r.Number(j, path, "Gamma_ke_tangential", &a->Gamma_ke_tangential);
  if (const json* b = r.Object(j, path, "bounds_normal")) {
    ReadBounds(r, *b, path + ".bounds_normal", &a->bounds_normal);
  }
  if (const json* b = r.Object(j, path, "bounds_tangential")) {
    ReadBounds(r, *b, path + ".bounds_tangential", &a->bounds_tangential);
  }
  r.Number(j, path, "beta", &a->beta);
}

void ReadFidelity(Reader& r, const json& j, FidelityOptions* f) {
  const std::string path = "fidelity";
  r.AllowedKeys(j, path, {"enabled", "quantization", "servo_quantization",
                          "force_noise", "force_noise_std", "measurement_rate",
                          "plant_dt"});
  bool enabled = false;
  if (j.contains("enabled")) {
    r.Bool(j, path, "enabled", &enabled);
    f->SetEnabled(enabled);
  }
  r.Bool(j, path, "quantization", &f->quantization);
  r.Number(j, path, "servo_quantization", &f->servo_quantization);
  r.Bool(j, path, "force_noise", &f->force_noise);
  r.Number(j, path, "force_noise_std", &f->force_noise_std);
  r.Number(j, path, "measurement_rate", &f->measurement_rate);
  r.Number(j, path, "plant_dt", &f->plant_dt);
}

void ReadSolver(Reader& r, const json& j, DeflectionSolveOptions* s) {
  const std::string path = "solver";
  r.AllowedKeys(j, path, {"method", "tolerance", "max_iterations"});
  std::string method;
  r.String(j, path, "method", &method);
  if (method == "newton") {
    s->method = DeflectionMethod::kNewton;
  } else if (method == "fixed_point") {
    s->method = DeflectionMethod::kFixedPoint;
  } else if (!method.empty()) {
    r.Fail(path + ".method", "expected \"newton\" or \"fixed_point\"");
  }
  r.Number(j, path, "tolerance", &s->tolerance);
  r.Int(j, path, "max_iterations", &s->max_iterations);
}

Phase ReadPhase(Reader& r, const json& j, const std::string& path) {
  Phase ph;
  r.AllowedKeys(j, path, {"name", "kind", "target", "start_time", "trigger"});
  r.String(j, path, "name", &ph.name);
  std::string kind;
  r.String(j, path, "kind", &kind);
  if (kind == "position_waypoint") {
    ph.kind = PhaseKind::kPositionWaypoint;
  } else if (kind == "force_regulation") {
    ph.kind = PhaseKind::kForceRegulation;
  } else {
    r.Fail(path + ".kind",
           kind.empty() ? "missing; expected \"position_waypoint\" or "
                          "\"force_regulation\""
                        : "unknown kind \"" + kind + "\"");
  }
  if (j.contains("target")) {
    r.Array(j, path, "target", &ph.target);
  } else {
    r.Fail(path + ".target", "missing");
  }
  r.Number(j, path, "start_time", &ph.start_time);
  if (const json* t = r.Object(j, path, "trigger")) {
    const std::string tp = path + ".trigger";
    r.AllowedKeys(*t, tp, {"metric", "threshold", "hold"});
    PhaseTrigger trig;
    std::string metric;
    r.String(*t, tp, "metric", &metric);
    if (metric == "position_error") {
      trig.metric = TriggerMetric::kPositionError;
    } else if (metric == "force_error") {
      trig.metric = TriggerMetric::kForceError;
    } else {
      r.Fail(tp + ".metric", "expected \"position_error\" or \"force_error\"");
    }
    r.Number(*t, tp, "threshold", &trig.threshold);
    r.Number(*t, tp, "hold", &trig.hold);
    ph.trigger = trig;
  }
  return ph;
}

std::string ParseErrorLocation(const std::string& text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

json VecJson(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::vector<std::string> FiniteCheck(const Vector& v, const std::string& path) {
  if (v.allFinite()) return {};
  return {path + ": entries must be finite"};
}

// Task pose for actuated angles `gamma` with the arm undeflected.
Vec3 RigidPose(const ChainParams& chain, const Vector& gamma) {
  return ForwardKinematics(chain, {gamma, Vector::Zero(chain.num_flexible())}).q();
}

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error(Join(issues)), issues_(std::move(issues)) {}

std::vector<std::string> Scenario::Validate() const {
  std::vector<std::string> issues = chain.Validate("chain");
  const int N = chain.num_actuated();
  const int M = chain.num_flexible();
  auto append = [&issues](std::vector<std::string> more) {
    issues.insert(issues.end(), more.begin(), more.end());
  };
  if (contact) append(contact->Validate("contact"));
  append(gains.Validate(N, "gains"));
  append(adaptation.Validate(M, "adaptation"));
  append(fidelity.Validate("fidelity"));
  if (!(solver.tolerance > 0.0)) issues.push_back("solver.tolerance: must be > 0");
  if (solver.max_iterations < 1) {
    issues.push_back("solver.max_iterations: must be >= 1");
  }
  if (initial_gamma.size() != N) {
    issues.push_back("initial_gamma: expected " + std::to_string(N) +
                     " entries, got " + std::to_string(initial_gamma.size()));
  } else {
    append(FiniteCheck(initial_gamma, "initial_gamma"));
  }
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    issues.push_back("duration: must be > 0");
  }
  if (phases.empty()) issues.push_back("phases: at least one phase is required");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const Phase& ph = phases[i];
    const std::string path = "phases[" + std::to_string(i) + "]";
    const int want = ph.kind == PhaseKind::kPositionWaypoint ? kTaskDim : kPosDim;
    if (ph.target.size() != want) {
      issues.push_back(path + ".target: expected " + std::to_string(want) +
                       " entries, got " + std::to_string(ph.target.size()));
    } else {
      append(FiniteCheck(ph.target, path + ".target"));
    }
    if (ph.kind == PhaseKind::kForceRegulation && !contact) {
      issues.push_back(path + ": force regulation needs a contact interface");
    }
    if (!std::isfinite(ph.start_time) || ph.start_time < 0.0) {
      issues.push_back(path + ".start_time: must be finite and >= 0");
    }
    if (i > 0 && !(ph.start_time > phases[i - 1].start_time)) {
      issues.push_back(path + ".start_time: phase times must be strictly increasing");
    }
    if (ph.trigger) {
      if (!(ph.trigger->threshold > 0.0)) {
        issues.push_back(path + ".trigger.threshold: must be > 0");
      }
      if (!(ph.trigger->hold >= 0.0)) {
        issues.push_back(path + ".trigger.hold: must be >= 0");
      }
    }
  }
  return issues;
}

Scenario BenchmarkMixedScenario() {
  Scenario s;
  s.name = "benchmark_mixed";
  s.fidelity.SetEnabled(true);
  // Flexible joints lined up under the tip, so the pressing force loads
  // them along their links.
  s.initial_gamma = Vector::Zero(4);
  s.initial_gamma << 2.205044, -1.505917, 2.593289, -2.257735;
  const Vec3 q0 = RigidPose(s.chain, s.initial_gamma);
  // Interface 1 cm above the start; the approach stops 2 mm short of it.
  s.contact->normal = Vec2(0.0, -1.0);
  s.contact->rest_point = q0.head<2>() + Vec2(0.0, 0.01);
  Vector approach(3), retreat(3), press(2);
  approach << q0.x(), q0.y() + 0.008, q0.z();
  retreat << q0.x(), q0.y() - 0.01, q0.z();
  press << 0.0, 2.0;
  s.phases = {
      {"approach", PhaseKind::kPositionWaypoint, approach, 0.0, std::nullopt},
      {"press", PhaseKind::kForceRegulation, press, 20.0,
       PhaseTrigger{TriggerMetric::kPositionError, 1e-3, 1.0}},
      {"retreat", PhaseKind::kPositionWaypoint, retreat, 50.0,
       PhaseTrigger{TriggerMetric::kForceError, 0.05, 2.0}},
  };
  s.duration = 80.0;
  return s;
}

Scenario BenchmarkForceScenario() {
  Scenario s;
  s.name = "benchmark_force";
  s.initial_gamma = Vector::Zero(4);
  s.initial_gamma << 2.601934, -1.030097, 1.384112, -1.175737;
  const Vec3 q0 = RigidPose(s.chain, s.initial_gamma);
  s.contact->normal = Vec2(0.0, -1.0);
  s.contact->rest_point = q0.head<2>() + Vec2(0.0, 0.001);
  s.gains.eta_t = 0.0;
  Vector press(2);
  press << -1.0, 1.5;
  s.phases = {{"press", PhaseKind::kForceRegulation, press, 0.0, std::nullopt}};
  s.duration = 60.0;
  return s;
}

Scenario BenchmarkPositionScenario() {
  Scenario s;
  s.name = "benchmark_position";
  s.contact.reset();
  s.initial_gamma = Vector::Zero(4);
  s.initial_gamma << 0.9, -0.5, -0.5, -0.4;
  const Vec3 q0 = RigidPose(s.chain, s.initial_gamma);
  Vector target(3);
  target << q0.x() - 0.03, q0.y() + 0.02, q0.z() + 0.1;
  s.phases = {{"reach", PhaseKind::kPositionWaypoint, target, 0.0, std::nullopt}};
  s.duration = 60.0;
  return s;
}

Scenario ParseScenario(const std::string& text) {
  json doc;
  const bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& err) {
      throw ScenarioError({"parse error at " + ParseErrorLocation(text, err.byte) +
                           ": " + err.what()});
    }
    if (!doc.is_object()) throw ScenarioError({"document: expected an object"});
  } else {
    doc = json::object();
  }

  Reader r;
  r.AllowedKeys(doc, "", {"name", "units", "seed", "duration", "chain", "contact",
                          "gains", "adaptation", "fidelity", "solver",
                          "initial_gamma", "phases"});
  Scenario s = BenchmarkMixedScenario();
  r.String(doc, "", "name", &s.name);
  std::string units = "cgs";
  r.String(doc, "", "units", &units);
  double len = kCm, mass = kGram;
  if (units == "si") {
    len = mass = 1.0;
  } else if (units != "cgs") {
    r.Fail("units", "expected \"cgs\" (cm, g) or \"si\" (m, kg)");
  }
  r.Unsigned(doc, "", "seed", &s.seed);
  r.Number(doc, "", "duration", &s.duration);
  if (const json* j = r.Object(doc, "", "chain")) ReadChain(r, *j, len, mass, &s.chain);
  if (auto it = doc.find("contact"); it != doc.end()) {
    if (it->is_null()) {
      s.contact.reset();
    } else if (it->is_object()) {
      ReadContact(r, *it, &*s.contact);
    } else {
      r.Fail("contact", "expected an object or null");
    }
  }
  if (const json* j = r.Object(doc, "", "gains")) ReadGains(r, *j, &s.gains);
  if (const json* j = r.Object(doc, "", "adaptation")) {
    ReadAdaptation(r, *j, s.chain.num_flexible(), &s.adaptation);
  }
  if (const json* j = r.Object(doc, "", "fidelity")) ReadFidelity(r, *j, &s.fidelity);
  if (const json* j = r.Object(doc, "", "solver")) ReadSolver(r, *j, &s.solver);
  r.Array(doc, "", "initial_gamma", &s.initial_gamma);
  if (auto it = doc.find("phases"); it != doc.end()) {
    if (!it->is_array()) {
      r.Fail("phases", "expected an array");
    } else {
      s.phases.clear();
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string path = "phases[" + std::to_string(i) + "]";
        if (!(*it)[i].is_object()) {
          r.Fail(path, "expected an object");
          continue;
        }
        s.phases.push_back(ReadPhase(r, (*it)[i], path));
      }
    }
  }

  // Structural problems first, then invariant violations of what was read.
  std::vector<std::string> issues = std::move(r.issues);
  const std::vector<std::string> invalid = s.Validate();
  issues.insert(issues.end(), invalid.begin(), invalid.end());
  if (!issues.empty()) throw ScenarioError(issues);
  return s;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError({path.string() + ": cannot open file"});
  std::ostringstream text;
  text << in.rdbuf();
  return ParseScenario(text.str());
}

json SerializeScenario(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["units"] = "si";
  doc["seed"] = s.seed;
  doc["duration"] = s.duration;

  json compound = json::array();
  for (const CompoundJoint& c : s.chain.compound) {
    compound.push_back({{"l", c.l}, {"L", c.L}, {"l_cg", c.l_cg}, {"L_cg", c.L_cg},
                        {"m", c.m}, {"M", c.M}, {"k", c.k}});
  }
  doc["chain"] = {
      {"compound", compound},
      {"ee", {{"l", s.chain.ee.l}, {"l_cg", s.chain.ee.l_cg}, {"m", s.chain.ee.m}}},
      {"g0", VecJson(s.chain.g0)}};

  if (s.contact) {
    doc["contact"] = {{"normal", VecJson(s.contact->normal)},
                      {"rest_point", VecJson(s.contact->rest_point)},
                      {"ke_normal", s.contact->ke_normal},
                      {"ke_tangential", s.contact->ke_tangential}};
  } else {
    doc["contact"] = nullptr;
  }

  const Gains& g = s.gains;
  doc["gains"] = {{"K_P", VecJson(g.K_P)},         {"K_I", VecJson(g.K_I)},
                  {"K_xi", VecJson(g.K_xi)},       {"K_gamma", VecJson(g.K_gamma)},
                  {"K_eta", VecJson(g.K_eta)},     {"K_gamma_eta", VecJson(g.K_gamma_eta)},
                  {"sigma_p", g.sigma_p},          {"eta_t", g.eta_t}};

  const AdaptationParams& a = s.adaptation;
  doc["adaptation"] = {
      {"Gamma_theta", VecJson(a.Gamma_theta)},
      {"Gamma_ke_normal", a.Gamma_ke_normal},
      {"Gamma_ke_tangential", a.Gamma_ke_tangential},
      {"bounds_normal", {{"min", a.bounds_normal.min}, {"max", a.bounds_normal.max}}},
      {"bounds_tangential",
       {{"min", a.bounds_tangential.min}, {"max", a.bounds_tangential.max}}},
      {"beta", a.beta}};

  const FidelityOptions& f = s.fidelity;
  doc["fidelity"] = {{"quantization", f.quantization},
                     {"servo_quantization", f.servo_quantization},
                     {"force_noise", f.force_noise},
                     {"force_noise_std", f.force_noise_std},
                     {"measurement_rate", f.measurement_rate},
                     {"plant_dt", f.plant_dt}};
  doc["solver"] = {
      {"method", s.solver.method == DeflectionMethod::kNewton ? "newton" : "fixed_point"},
      {"tolerance", s.solver.tolerance},
      {"max_iterations", s.solver.max_iterations}};
  doc["initial_gamma"] = VecJson(s.initial_gamma);

  json phases = json::array();
  for (const Phase& ph : s.phases) {
    json p = {{"name", ph.name},
              {"kind", ph.kind == PhaseKind::kPositionWaypoint ? "position_waypoint"
                                                               : "force_regulation"},
              {"target", VecJson(ph.target)},
              {"start_time", ph.start_time}};
    if (ph.trigger) {
      p["trigger"] = {{"metric", ph.trigger->metric == TriggerMetric::kPositionError
                                     ? "position_error"
                                     : "force_error"},
                      {"threshold", ph.trigger->threshold},
                      {"hold", ph.trigger->hold}};
    }
    phases.push_back(p);
  }
  doc["phases"] = phases;
  return doc;
}

}  // namespace flexarm
