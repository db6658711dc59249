#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "tpdg/dg/mesh.hpp"
#include "tpdg/solve/time_step.hpp"

namespace tpdg {

enum class CaseId { advection, euler_vortex, euler_periodic_3d };
enum class Integrator { backward_euler, dirk3, rk4 };

inline const char* case_name(CaseId c) {
  switch (c) {
    case CaseId::advection: return "advection";
    case CaseId::euler_vortex: return "euler_vortex";
    case CaseId::euler_periodic_3d: return "euler_periodic_3d";
  }
  return "?";
}

struct ExperimentConfig {
  CaseId case_id = CaseId::advection;
  char advection_field = 'a';
  MeshSpec mesh;
  double gamma = 1.4;
  std::vector<int> p_list;
  std::vector<double> dt_list;
  Integrator integrator = Integrator::backward_euler;
  int steps = 1;
  std::vector<PrecondKind> preconditioners;
  GmresConfig gmres;
  NewtonConfig newton;
  KsvdConfig ksvd;
  std::uint64_t seed = 0;
  bool residual_history = false;

  void validate() const {
    if (p_list.empty()) throw ConfigError("config: p list must not be empty");
    if (dt_list.empty()) throw ConfigError("config: dt list must not be empty");
    if (preconditioners.empty()) throw ConfigError("config: preconditioner list must not be empty");
    for (int p : p_list)
      if (p < 1) throw ConfigError("config: polynomial degrees must be >= 1");
    for (double dt : dt_list)
      if (!(dt > 0.0)) throw ConfigError("config: time steps must be positive");
    if (steps < 1) throw ConfigError("config: steps must be >= 1");
    mesh.validate();
    gmres.validate();
    newton.validate();
  }
};

namespace config_detail {

inline CaseId parse_case(const std::string& s) {
  if (s == "advection") return CaseId::advection;
  if (s == "euler_vortex") return CaseId::euler_vortex;
  if (s == "euler_periodic_3d") return CaseId::euler_periodic_3d;
  throw ConfigError("config: unknown case '" + s + "'");
}

inline Integrator parse_integrator(const std::string& s) {
  if (s == "backward_euler") return Integrator::backward_euler;
  if (s == "dirk3") return Integrator::dirk3;
  if (s == "rk4") return Integrator::rk4;
  throw ConfigError("config: unknown integrator '" + s + "'");
}

inline PrecondKind parse_precond(const std::string& s) {
  if (s == "jacobi_full") return PrecondKind::jacobi_full;
  if (s == "jacobi_small") return PrecondKind::jacobi_small;
  if (s == "ksvd_full") return PrecondKind::ksvd_full;
  if (s == "ksvd_small") return PrecondKind::ksvd_small;
  throw ConfigError("config: unknown preconditioner '" + s + "'");
}

inline MeshKind parse_mesh_kind(const std::string& s) {
  if (s == "cartesian") return MeshKind::cartesian;
  if (s == "perturbed") return MeshKind::perturbed;
  if (s == "scaled") return MeshKind::scaled;
  throw ConfigError("config: unknown mesh kind '" + s + "'");
}

inline MeshSpec parse_mesh(const nlohmann::json& j) {
  MeshSpec spec;
  if (j.contains("kind")) spec.kind = parse_mesh_kind(j.at("kind").get<std::string>());
  const auto counts = j.at("counts").get<std::vector<int>>();
  spec.dim = int(counts.size());
  for (int a = 0; a < spec.dim; ++a) spec.counts[a] = counts[a];
  if (j.contains("lo")) {
    const auto lo = j.at("lo").get<std::vector<double>>();
    for (int a = 0; a < spec.dim; ++a) spec.lo[a] = lo.at(a);
  }
  if (j.contains("hi")) {
    const auto hi = j.at("hi").get<std::vector<double>>();
    for (int a = 0; a < spec.dim; ++a) spec.hi[a] = hi.at(a);
  }
  if (j.contains("scale")) {
    const auto sc = j.at("scale").get<std::vector<double>>();
    for (int a = 0; a < spec.dim; ++a) spec.scale[a] = sc.at(a);
  }
  spec.amplitude = j.value("amplitude", 0.0);
  spec.seed = j.value("seed", std::uint64_t(0));
  spec.periodic = j.value("periodic", false);
  return spec;
}

} // namespace config_detail

/// Parse a versioned experiment configuration document.
inline ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  if (!doc.contains("version")) throw ConfigError("config: missing 'version' field");
  if (doc.at("version").get<int>() != 1) throw ConfigError("config: unsupported version");
  ExperimentConfig cfg;
  cfg.case_id = config_detail::parse_case(doc.at("case").get<std::string>());
  if (doc.contains("field")) {
    const std::string f = doc.at("field").get<std::string>();
    if (f.size() != 1 || f[0] < 'a' || f[0] > 'c') throw ConfigError("config: field must be a, b, or c");
    cfg.advection_field = f[0];
  }
  cfg.mesh = config_detail::parse_mesh(doc.at("mesh"));
  cfg.gamma = doc.value("gamma", 1.4);
  cfg.p_list = doc.at("p").get<std::vector<int>>();
  cfg.dt_list = doc.at("dt").get<std::vector<double>>();
  if (doc.contains("integrator"))
    cfg.integrator = config_detail::parse_integrator(doc.at("integrator").get<std::string>());
  cfg.steps = doc.value("steps", 1);
  for (const auto& s : doc.at("preconditioners")) cfg.preconditioners.push_back(config_detail::parse_precond(s.get<std::string>()));
  if (doc.contains("gmres")) {
    const auto& g = doc.at("gmres");
    cfg.gmres.tol = g.value("tol", cfg.gmres.tol);
    cfg.gmres.restart = g.value("restart", cfg.gmres.restart);
    cfg.gmres.max_iterations = g.value("max_iterations", cfg.gmres.max_iterations);
    if (g.contains("side")) {
      const std::string side = g.at("side").get<std::string>();
      if (side == "left")
        cfg.gmres.side = PrecondSide::left;
      else if (side == "right")
        cfg.gmres.side = PrecondSide::right;
      else
        throw ConfigError("config: gmres side must be left or right");
    }
  }
  if (doc.contains("newton")) {
    const auto& nw = doc.at("newton");
    cfg.newton.tol = nw.value("tol", cfg.newton.tol);
    cfg.newton.max_iterations = nw.value("max_iterations", cfg.newton.max_iterations);
  }
  if (doc.contains("ksvd")) {
    const auto& k = doc.at("ksvd");
    cfg.ksvd.terms = k.value("terms", cfg.ksvd.terms);
    cfg.ksvd.lanczos.max_iterations = k.value("max_lanczos_iterations", 0);
    cfg.ksvd.lanczos.seed = k.value("lanczos_seed", cfg.ksvd.lanczos.seed);
  }
  cfg.seed = doc.value("seed", std::uint64_t(0));
  cfg.residual_history = doc.value("residual_history", false);
  cfg.validate();
  return cfg;
}

} // namespace tpdg
