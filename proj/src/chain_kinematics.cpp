#include "flexarm/chain_kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace flexarm {
namespace {

struct Link {
  double length;
  double cg;
  double mass;
};

// Links in chain order; link c is carried by joint c.
std::vector<Link> Links(const ChainParams& params) {
  std::vector<Link> links;
  links.reserve(params.num_joints());
  for (const auto& cj : params.compound) {
    links.push_back({cj.l, cj.l_cg, cj.m});
    links.push_back({cj.L, cj.L_cg, cj.M});
  }
  links.push_back({params.ee.l, params.ee.l_cg, params.ee.m});
  return links;
}

int GammaIndex(int i) { return 2 * i; }
int DeltaIndex(int j) { return 2 * j + 1; }

struct Geometry {
  std::vector<Vec2> origin;  // joint positions
  std::vector<Vec2> cg;      // link centres of mass
  std::vector<double> mass;
  Vec2 tip = Vec2::Zero();
  double alpha = 0.0;
  double total_mass = 0.0;
};

void CheckDimensions(const ChainParams& params, const JointState& js) {
  if (js.gamma.size() != params.num_actuated() ||
      js.delta.size() != params.num_flexible()) {
    throw std::invalid_argument(
        "joint state dimensions (" + std::to_string(js.gamma.size()) + ", " +
        std::to_string(js.delta.size()) + ") do not match chain (" +
        std::to_string(params.num_actuated()) + ", " +
        std::to_string(params.num_flexible()) + ")");
  }
}

Geometry Evaluate(const ChainParams& params, const JointState& js) {
  CheckDimensions(params, js);
  const auto links = Links(params);
  const int n = static_cast<int>(links.size());
  Geometry g;
  g.origin.resize(n);
  g.cg.resize(n);
  g.mass.resize(n);
  Vec2 pos = Vec2::Zero();
  double phi = 0.0;
  for (int c = 0; c < n; ++c) {
    phi += (c % 2 == 0) ? js.gamma[c / 2] : js.delta[c / 2];
    const Vec2 dir(std::cos(phi), std::sin(phi));
    g.origin[c] = pos;
    g.cg[c] = pos + links[c].cg * dir;
    g.mass[c] = links[c].mass;
    g.total_mass += links[c].mass;
    pos += links[c].length * dir;
  }
  g.tip = pos;
  g.alpha = phi;
  return g;
}

// d/dθ_k of the Jp column of joint j: -(tip - o_max(j,k)).
Vec2 dJpColumn(const Geometry& g, int j, int k) {
  return -(g.tip - g.origin[std::max(j, k)]);
}

// d/dθ_k of the J_cg column of joint j.
Vec2 dJcgColumn(const Geometry& g, int j, int k) {
  const int a = std::max(j, k);
  Vec2 acc = Vec2::Zero();
  for (int i = a; i < static_cast<int>(g.cg.size()); ++i) {
    acc -= g.mass[i] * (g.cg[i] - g.origin[a]);
  }
  return acc / g.total_mass;
}

Vec2 JcgColumn(const Geometry& g, int j) {
  Vec2 acc = Vec2::Zero();
  for (int i = j; i < static_cast<int>(g.cg.size()); ++i) {
    acc += g.mass[i] * rot90(g.cg[i] - g.origin[j]);
  }
  return acc / g.total_mass;
}

}  // namespace

ChainParams ChainParams::Benchmark() {
  ChainParams p;
  p.compound.assign(3, CompoundJoint{});
  return p;
}

double ChainParams::total_mass() const {
  double m_total = ee.m;
  for (const auto& cj : compound) m_total += cj.m + cj.M;
  return m_total;
}

Vector ChainParams::stiffness() const {
  Vector k(num_flexible());
  for (int i = 0; i < num_flexible(); ++i) k[i] = compound[i].k;
  return k;
}

std::vector<std::string> ChainParams::Validate(const std::string& prefix) const {
  std::vector<std::string> errors;
  auto positive = [&](double v, const std::string& name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      errors.push_back(prefix + "." + name + " must be > 0 (got " +
                       std::to_string(v) + ")");
    }
  };
  auto within = [&](double cg, double len, const std::string& name) {
    if (cg > len) {
      errors.push_back(prefix + "." + name + " exceeds its link length");
    }
  };
  if (compound.empty()) {
    errors.push_back(prefix + ".compound must hold at least one joint");
  }
  for (size_t i = 0; i < compound.size(); ++i) {
    const auto& c = compound[i];
    const std::string at = "compound[" + std::to_string(i) + "].";
    positive(c.l, at + "l");
    positive(c.L, at + "L");
    positive(c.l_cg, at + "l_cg");
    positive(c.L_cg, at + "L_cg");
    positive(c.m, at + "m");
    positive(c.M, at + "M");
    positive(c.k, at + "k");
    within(c.l_cg, c.l, at + "l_cg");
    within(c.L_cg, c.L, at + "L_cg");
  }
  positive(ee.l, "l_ee");
  positive(ee.l_cg, "l_cg_ee");
  positive(ee.m, "m_ee");
  within(ee.l_cg, ee.l, "l_cg_ee");
  if (!g0.allFinite()) errors.push_back(prefix + ".g0 must be finite");
  return errors;
}

TaskPose ForwardKinematics(const ChainParams& params, const JointState& js) {
  const Geometry g = Evaluate(params, js);
  return {g.tip, g.alpha};
}

CenterOfMass ComputeCenterOfMass(const ChainParams& params,
                                 const JointState& js) {
  const Geometry g = Evaluate(params, js);
  Vec2 acc = Vec2::Zero();
  for (size_t i = 0; i < g.cg.size(); ++i) acc += g.mass[i] * g.cg[i];
  return {acc / g.total_mass, g.total_mass};
}

JacobianSet ComputeJacobians(const ChainParams& params, const JointState& js) {
  const Geometry g = Evaluate(params, js);
  const int N = params.num_actuated();
  const int M = params.num_flexible();

  JacobianSet jac;
  jac.J.resize(kTaskDim, N + M);
  jac.J_cg_delta.resize(kPosDim, M);
  for (int i = 0; i < N; ++i) {
    const int c = GammaIndex(i);
    jac.J.col(i) << rot90(g.tip - g.origin[c]), 1.0;
  }
  for (int j = 0; j < M; ++j) {
    const int c = DeltaIndex(j);
    jac.J.col(N + j) << rot90(g.tip - g.origin[c]), 1.0;
    jac.J_cg_delta.col(j) = JcgColumn(g, c);
  }
  jac.J_gamma = jac.J.leftCols(N);
  jac.J_delta = jac.J.rightCols(M);
  jac.Jp_gamma = jac.J_gamma.topRows(kPosDim);
  jac.Jp_delta = jac.J_delta.topRows(kPosDim);
  jac.Jalpha_gamma = jac.J_gamma.bottomRows(1);
  jac.Jalpha_delta = jac.J_delta.bottomRows(1);

  jac.dJp_delta_dgamma.assign(N, Matrix(kPosDim, M));
  jac.dJcg_delta_dgamma.assign(N, Matrix(kPosDim, M));
  for (int i = 0; i < N; ++i) {
    const int k = GammaIndex(i);
    for (int j = 0; j < M; ++j) {
      jac.dJp_delta_dgamma[i].col(j) = dJpColumn(g, DeltaIndex(j), k);
      jac.dJcg_delta_dgamma[i].col(j) = dJcgColumn(g, DeltaIndex(j), k);
    }
  }
  return jac;
}

void DeltaDerivatives(const ChainParams& params, const JointState& js,
                      std::vector<Matrix>* dJp_delta_ddelta,
                      std::vector<Matrix>* dJcg_delta_ddelta) {
  const Geometry g = Evaluate(params, js);
  const int M = params.num_flexible();
  dJp_delta_ddelta->assign(M, Matrix(kPosDim, M));
  dJcg_delta_ddelta->assign(M, Matrix(kPosDim, M));
  for (int i = 0; i < M; ++i) {
    const int k = DeltaIndex(i);
    for (int j = 0; j < M; ++j) {
      (*dJp_delta_ddelta)[i].col(j) = dJpColumn(g, DeltaIndex(j), k);
      (*dJcg_delta_ddelta)[i].col(j) = dJcgColumn(g, DeltaIndex(j), k);
    }
  }
}

RankMargins ComputeRankMargins(const JacobianSet& jac) {
  Eigen::JacobiSVD<Matrix> svd_j(jac.J);
  Eigen::JacobiSVD<Matrix> svd_p(jac.Jp_gamma);
  return {svd_j.singularValues().minCoeff(), svd_p.singularValues().minCoeff()};
}

}  // namespace flexarm
