// Experiment runner: executes declarative case configs, timing scans, and
// convergence studies, writing CSV/JSON reports.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "tpdg/common/parallel.hpp"
#include "tpdg/harness/converge.hpp"
#include "tpdg/harness/experiment.hpp"
#include "tpdg/harness/scan.hpp"

namespace {

int log_level() {
  // TPDG_LOG = quiet | info | debug
  const char* env = std::getenv("TPDG_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tpdg::ConfigError("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw tpdg::ConfigError(std::string("config parse error in ") + path + ": " + e.what());
  }
  return doc;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw tpdg::ConfigError("cannot open output file: " + path);
  out << text;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"tensor-product DG experiment harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int threads = 1;
  std::string precond_override;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "configuration JSON")->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed_override, "override the config RNG seed")
        ->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--threads", threads, "worker threads for element loops");
    cmd->add_option("--precond", precond_override,
                    "restrict to one preconditioner (jacobi_full|jacobi_small|ksvd_full|ksvd_small)");
  };

  auto* run_cmd = app.add_subcommand("run", "run a case over its (p, dt, preconditioner) grid");
  add_common(run_cmd);
  auto* scan_cmd = app.add_subcommand("scan", "time preconditioner form/apply over a p sweep");
  add_common(scan_cmd);
  auto* conv_cmd = app.add_subcommand("converge", "error study against the exact solution");
  add_common(conv_cmd);
  auto* val_cmd = app.add_subcommand("validate-config", "parse and validate a configuration");
  val_cmd->add_option("--config", config_path, "configuration JSON")->required();

  CLI11_PARSE(app, argc, argv);
  const int verbosity = log_level();
  tpdg::thread_count() = std::max(1, threads);

  try {
    std::filesystem::create_directories(out_dir);
    if (val_cmd->parsed()) {
      const auto doc = load_json(config_path);
      if (doc.contains("scan"))
        tpdg::parse_scan_config(doc);
      else if (doc.contains("mode") || doc.contains("final_time"))
        tpdg::parse_converge_config(doc);
      else
        tpdg::parse_experiment_config(doc);
      std::cout << "config ok: " << config_path << "\n";
      return 0;
    }

    if (run_cmd->parsed()) {
      auto cfg = tpdg::parse_experiment_config(load_json(config_path));
      if (seed_set) cfg.seed = seed_override;
      if (!precond_override.empty())
        cfg.preconditioners = {tpdg::config_detail::parse_precond(precond_override)};
      std::vector<std::pair<std::string, std::vector<double>>> histories;
      const auto report = tpdg::run_experiment(cfg, &histories);
      tpdg::write_report_csv(report, out_dir + "/report.csv");
      write_text(out_dir + "/report.json", tpdg::report_to_json(report).dump(2) + "\n");
      for (const auto& [name, hist] : histories) {
        std::ostringstream os;
        os.precision(12);
        for (std::size_t i = 0; i < hist.size(); ++i) os << i + 1 << ',' << hist[i] << '\n';
        write_text(out_dir + "/residuals_" + name + ".csv", os.str());
      }
      if (verbosity >= 1) {
        std::cout << tpdg::report_csv_header() << "\n";
        for (const auto& row : report.rows) std::cout << tpdg::report_row_csv(row) << "\n";
      }
      if (report.failures > 0) {
        std::cerr << report.failures << " row(s) failed; see report.csv\n";
        return 1;
      }
      return 0;
    }

    if (scan_cmd->parsed()) {
      const auto cfg = tpdg::parse_scan_config(load_json(config_path));
      const auto report = tpdg::run_scaling_scan(cfg);
      tpdg::write_scan_csv(report, out_dir + "/scan.csv");
      write_text(out_dir + "/scan.json", tpdg::scan_to_json(report).dump(2) + "\n");
      if (verbosity >= 1) {
        std::cout << "slopes: ksvd_form=" << report.ksvd_form_slope
                  << " ksvd_apply=" << report.ksvd_apply_slope
                  << " jacobi_form=" << report.jacobi_form_slope
                  << " jacobi_apply=" << report.jacobi_apply_slope << "\n";
      }
      return 0;
    }

    if (conv_cmd->parsed()) {
      const auto cfg = tpdg::parse_converge_config(load_json(config_path));
      const auto rows = tpdg::run_convergence_study(cfg);
      tpdg::write_converge_csv(rows, out_dir + "/converge.csv");
      if (verbosity >= 1)
        for (const auto& r : rows)
          std::cout << "p=" << r.p << " dt=" << r.dt << " l2=" << r.l2_error
                    << (std::isfinite(r.observed_order)
                            ? " order=" + std::to_string(r.observed_order)
                            : "")
                    << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
