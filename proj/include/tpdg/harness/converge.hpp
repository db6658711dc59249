#pragma once

#include <cmath>
#include <fstream>

#include "tpdg/harness/experiment.hpp"

namespace tpdg {

struct ConvergeConfig {
  ExperimentConfig base;   // case, mesh, integrator, solver settings
  std::string mode = "p";  // "p": sweep degrees at fixed dt; "dt": sweep steps
  double final_time = 0.1;

  void validate() const {
    if (mode != "p" && mode != "dt") throw ConfigError("converge: mode must be 'p' or 'dt'");
    if (!(final_time >= 0.0)) throw ConfigError("converge: final_time must be >= 0");
  }
};

inline ConvergeConfig parse_converge_config(const nlohmann::json& doc) {
  ConvergeConfig cfg;
  cfg.base = parse_experiment_config(doc);
  cfg.mode = doc.value("mode", std::string("p"));
  cfg.final_time = doc.value("final_time", 0.1);
  cfg.validate();
  return cfg;
}

struct ConvergeRow {
  int p = 0;
  double dt = 0.0;
  double l2_error = 0.0;
  double observed_order = std::nan("");
};

/// L2 error of the leading component against the exact solution at the final
/// time, for each p (mode "p") or each dt (mode "dt"). Observed orders are
/// reported between consecutive rows.
inline std::vector<ConvergeRow> run_convergence_study(const ConvergeConfig& cfg) {
  cfg.validate();
  if (cfg.base.case_id == CaseId::advection)
    throw ConfigError("run_convergence_study: the case must provide an exact solution");
  std::vector<ConvergeRow> rows;

  auto advance = [&](const Discretization& sys, StateVector u, double dt) {
    ImplicitConfig icfg;
    icfg.gmres = cfg.base.gmres;
    icfg.newton = cfg.base.newton;
    icfg.ksvd = cfg.base.ksvd;
    icfg.precond = cfg.base.preconditioners.front();
    double t = 0.0;
    const int steps = cfg.final_time > 0.0 ? std::max(1, int(std::llround(cfg.final_time / dt))) : 0;
    for (int s = 0; s < steps; ++s, t += dt) {
      switch (cfg.base.integrator) {
        case Integrator::backward_euler: u = step_backward_euler(sys, u, t, dt, icfg); break;
        case Integrator::dirk3: u = step_dirk3(sys, u, t, dt, icfg); break;
        case Integrator::rk4: u = step_rk4(sys, u, t, dt); break;
      }
    }
    return std::pair{std::move(u), t};
  };

  if (cfg.mode == "p") {
    const double dt = cfg.base.dt_list.front();
    for (int p : cfg.base.p_list) {
      const CaseSetup setup = build_case(cfg.base, p);
      auto [u, t] = advance(setup.sys, setup.u0, dt);
      ConvergeRow row;
      row.p = p;
      row.dt = dt;
      row.l2_error = l2_error(setup.sys, u, t)[0];
      rows.push_back(row);
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
      rows[i].observed_order = std::log(rows[i - 1].l2_error / rows[i].l2_error) /
                               std::log(double(rows[i].p + 1) / double(rows[i - 1].p + 1));
  } else {
    const int p = cfg.base.p_list.front();
    const CaseSetup setup = build_case(cfg.base, p);
    for (double dt : cfg.base.dt_list) {
      auto [u, t] = advance(setup.sys, setup.u0, dt);
      ConvergeRow row;
      row.p = p;
      row.dt = dt;
      row.l2_error = l2_error(setup.sys, u, t)[0];
      rows.push_back(row);
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
      rows[i].observed_order =
          std::log(rows[i - 1].l2_error / rows[i].l2_error) / std::log(rows[i - 1].dt / rows[i].dt);
  }
  return rows;
}

inline void write_converge_csv(const std::vector<ConvergeRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_converge_csv: cannot open " + path);
  out << "p,dt,l2_error,observed_order\n";
  out.precision(12);
  for (const auto& r : rows) {
    out << r.p << ',' << r.dt << ',' << r.l2_error << ',';
    if (std::isfinite(r.observed_order)) out << r.observed_order;
    out << '\n';
  }
}

} // namespace tpdg
