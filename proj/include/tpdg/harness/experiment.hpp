#pragma once

#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "tpdg/harness/config.hpp"
#include "tpdg/laws/cases.hpp"
#include "tpdg/ops/discretization.hpp"

namespace tpdg {

struct ReportRow {
  std::string case_id;
  int p = 0;
  double dt = 0.0;
  std::string precond;
  double avg_gmres = 0.0;
  long total_gmres = 0;
  int newton_steps = 0;
  double form_seconds = 0.0;
  double pc_apply_seconds = 0.0;
  double total_seconds = 0.0;
  double l2_error = std::nan("");
  std::string status = "ok";
  std::string failure_code;
  std::vector<int> gmres_per_solve;
};

inline const char* report_csv_header() {
  return "case,p,dt,precond,avg_gmres_iters,total_gmres_iters,newton_steps,form_seconds,"
         "pc_apply_seconds,total_seconds,l2_error,status,failure_code";
}

inline std::string report_row_csv(const ReportRow& r) {
  std::ostringstream os;
  os.precision(12);
  os << r.case_id << ',' << r.p << ',' << r.dt << ',' << r.precond << ',' << r.avg_gmres << ','
     << r.total_gmres << ',' << r.newton_steps << ',' << r.form_seconds << ',' << r.pc_apply_seconds
     << ',' << r.total_seconds << ',';
  if (std::isfinite(r.l2_error)) os << r.l2_error;
  os << ',' << r.status << ',' << r.failure_code;
  return os.str();
}

/// Case assembly: build the discretization and the initial state for one
/// polynomial degree.
struct CaseSetup {
  Discretization sys;
  StateVector u0;
};

inline CaseSetup build_case(const ExperimentConfig& cfg, int p) {
  ReferenceElement ref = build_reference(p);
  MeshGeometry mesh = generate_mesh(cfg.mesh, ref);
  switch (cfg.case_id) {
    case CaseId::advection: {
      const AdvectionField field = cfg.advection_field == 'a'   ? AdvectionField::a
                                   : cfg.advection_field == 'b' ? AdvectionField::b
                                                                : AdvectionField::c;
      AdvectionCase ac{field};
      Discretization sys = make_discretization(std::move(ref), std::move(mesh), ac.law());
      StateVector u0 = interpolate(sys, [&](const double* x, double* u) { u[0] = ac.initial(x); });
      return {std::move(sys), std::move(u0)};
    }
    case CaseId::euler_vortex: {
      EulerVortexCase vc;
      vc.gamma = cfg.gamma;
      Discretization sys = make_discretization(std::move(ref), std::move(mesh), vc.law());
      StateVector u0 = interpolate(sys, [&](const double* x, double* u) { vc.exact_state(x, 0.0, u); });
      return {std::move(sys), std::move(u0)};
    }
    case CaseId::euler_periodic_3d: {
      PeriodicEuler3DCase pc;
      pc.gamma = cfg.gamma;
      Discretization sys = make_discretization(std::move(ref), std::move(mesh), pc.law());
      StateVector u0 = interpolate(sys, [&](const double* x, double* u) { pc.exact_state(x, 0.0, u); });
      return {std::move(sys), std::move(u0)};
    }
  }
  throw ConfigError("build_case: unhandled case");
}

inline const char* failure_code_for(const std::exception& e) {
  if (dynamic_cast<const GmresFailure*>(&e)) return "gmres_max_iterations";
  if (dynamic_cast<const StateError*>(&e)) return "non_physical_state";
  if (dynamic_cast<const SingularError*>(&e)) return "singular_block";
  if (dynamic_cast<const ConvergenceError*>(&e)) return "nonlinear_divergence";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "internal_error";
}

struct ExperimentReport {
  std::vector<ReportRow> rows;
  int failures = 0;
};

/// Execute the (p, dt, preconditioner) grid of the configured case. Each
/// cell advances `steps` time steps from the case's initial condition and
/// records iteration counts, timers, and (when available) the L2 density
/// error against the exact solution.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg,
                                       std::vector<std::pair<std::string, std::vector<double>>>*
                                           residual_histories = nullptr) {
  cfg.validate();
  ExperimentReport report;
  for (int p : cfg.p_list) {
    const CaseSetup setup = build_case(cfg, p);
    for (double dt : cfg.dt_list)
      for (PrecondKind pk : cfg.preconditioners) {
        ReportRow row;
        row.case_id = case_name(cfg.case_id);
        if (cfg.case_id == CaseId::advection) row.case_id += std::string("_") + cfg.advection_field;
        row.p = p;
        row.dt = dt;
        row.precond = precond_name(pk);
        const auto t0 = std::chrono::steady_clock::now();
        try {
          ImplicitConfig icfg;
          icfg.gmres = cfg.gmres;
          icfg.newton = cfg.newton;
          icfg.ksvd = cfg.ksvd;
          if (cfg.seed != 0) icfg.ksvd.lanczos.seed = cfg.seed;
          icfg.precond = pk;
          StepStats stats;
          stats.keep_residual_history = cfg.residual_history;
          StateVector u = setup.u0;
          double t = 0.0;
          for (int s = 0; s < cfg.steps; ++s, t += dt) {
            switch (cfg.integrator) {
              case Integrator::backward_euler: u = step_backward_euler(setup.sys, u, t, dt, icfg, &stats); break;
              case Integrator::dirk3: u = step_dirk3(setup.sys, u, t, dt, icfg, &stats); break;
              case Integrator::rk4: u = step_rk4(setup.sys, u, t, dt); break;
            }
          }
          row.avg_gmres = stats.average_gmres();
          row.total_gmres = 0;
          for (int v : stats.gmres_per_solve) row.total_gmres += v;
          row.gmres_per_solve = stats.gmres_per_solve;
          row.newton_steps = stats.newton_steps;
          row.form_seconds = stats.form_seconds;
          row.pc_apply_seconds = stats.pc_apply_seconds;
          if (setup.sys.law.exact) row.l2_error = l2_error(setup.sys, u, t)[0];
          if (residual_histories && cfg.residual_history) {
            for (std::size_t k = 0; k < stats.residual_histories.size(); ++k) {
              std::ostringstream name;
              name << row.case_id << "_p" << p << "_dt" << dt << "_" << row.precond << "_solve" << k;
              residual_histories->push_back({name.str(), stats.residual_histories[k]});
            }
          }
        } catch (const std::exception& e) {
          row.status = "failed";
          row.failure_code = failure_code_for(e);
          ++report.failures;
        }
        row.total_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rows.push_back(std::move(row));
      }
  }
  return report;
}

inline void write_report_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("write_report_csv: cannot open " + path);
  out << report_csv_header() << '\n';
  for (const auto& row : report.rows) out << report_row_csv(row) << '\n';
}

inline nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["failures"] = report.failures;
  auto& rows = doc["rows"] = nlohmann::json::array();
  for (const auto& r : report.rows) {
    nlohmann::json j{{"case", r.case_id},
                     {"p", r.p},
                     {"dt", r.dt},
                     {"precond", r.precond},
                     {"avg_gmres_iters", r.avg_gmres},
                     {"total_gmres_iters", r.total_gmres},
                     {"gmres_per_solve", r.gmres_per_solve},
                     {"newton_steps", r.newton_steps},
                     {"form_seconds", r.form_seconds},
                     {"pc_apply_seconds", r.pc_apply_seconds},
                     {"total_seconds", r.total_seconds},
                     {"status", r.status},
                     {"failure_code", r.failure_code}};
    if (std::isfinite(r.l2_error)) j["l2_error"] = r.l2_error;
    rows.push_back(std::move(j));
  }
  return doc;
}

} // namespace tpdg
