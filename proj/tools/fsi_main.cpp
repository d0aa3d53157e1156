// Command line front end. Subcommands:
//   run          integrate a configured problem, write timeseries + summary
//   sweep-kappa  existence-time sweep over regularization strengths
//   relax-bound  epsilon-uniform bound probe for the damped solid update
//   check-compat residuals of the interface compatibility conditions
//   mms          manufactured-solution convergence rates
//   verify       full acceptance gate
//
// Exit codes: 0 success, 1 the requested check or run did not hold up,
// 2 bad usage or a config file problem.

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fsi/acceptance.hpp"
#include "fsi/compat.hpp"
#include "fsi/config.hpp"
#include "fsi/experiments.hpp"
#include "fsi/io.hpp"
#include "fsi/presets.hpp"
#include "fsi/stepper.hpp"

namespace {

using namespace fsi;

struct Problem {
  RunConfig cfg;
  PhaseMesh mesh;
  NodalField u0;
  std::unique_ptr<Forcing> forcing;
  ElasticityTensor c;
  std::optional<CompatData> data;
  std::optional<HierarchyTerms> hier;
};

Problem load_problem(const std::string& path, bool want_hierarchy) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    // an unreadable config file is a usage problem, not a failed experiment
    throw ConfigError(e.what());
  }
  RunConfig cfg = parse_config(text);
  PhaseMesh mesh = build_mesh(cfg.geometry);
  NodalField u0 = make_initial_data(mesh, cfg.geometry, cfg.initial, cfg.amplitude);
  auto f = make_forcing(cfg.geometry, cfg.forcing, cfg.forcing_amplitude);
  ElasticityTensor c(cfg.solver.lambda, cfg.solver.mu, mesh.dim);
  Problem p{std::move(cfg), std::move(mesh), std::move(u0), std::move(f), c, {}, {}};
  if (want_hierarchy) {
    p.data = build_compat_data(p.mesh, p.u0, *p.forcing, p.cfg.solver.nu, p.c);
    p.hier = make_hierarchy_terms(p.mesh, *p.data, p.c);
  }
  return p;
}

CsvWriter timeseries_csv(const std::vector<DiagnosticsRecord>& recs) {
  CsvWriter csv;
  csv.columns = {"step",  "t",            "e_kin",   "e_el",         "e_total",
                 "v_h1",  "disp_h2_solid", "q_l2",    "div_residual", "min_det",
                 "newton_iters", "newton_residual", "z_proxy"};
  for (const auto& d : recs)
    csv.rows.push_back({double(d.step), d.t, d.e_kin, d.e_el, d.e_total, d.v_h1,
                        d.disp_h2_solid, d.q_l2, d.div_residual, d.min_det,
                        double(d.newton_iters), d.newton_residual, d.z_proxy});
  return csv;
}

int cmd_run(const std::string& path, const std::string& out_dir, double kappa, bool quiet) {
  Problem p = load_problem(path, /*want_hierarchy=*/false);
  if (!std::isnan(kappa)) p.cfg.solver.kappa = kappa;
  if (p.cfg.use_hierarchy) {
    p.data = build_compat_data(p.mesh, p.u0, *p.forcing, p.cfg.solver.nu, p.c);
    p.hier = make_hierarchy_terms(p.mesh, *p.data, p.c);
  }
  RunOptions o;
  o.t_end = p.cfg.t_end;
  o.record_every = p.cfg.record_every;
  RunResult res = run_simulation(p.mesh, p.cfg.solver, p.u0, p.forcing.get(),
                                 p.hier ? &*p.hier : nullptr, o);

  ensure_dir(out_dir);
  write_file(out_dir + "/timeseries.csv", timeseries_csv(res.records).render());
  SummaryWriter sw;
  sw.add("config", path);
  sw.add("dim", long(p.mesh.dim));
  sw.add("dofs", long(p.mesh.n_nodes * p.mesh.dim));
  sw.add("kappa", p.cfg.solver.kappa);
  sw.add("eps", p.cfg.solver.eps);
  sw.add("dt", p.cfg.solver.dt);
  sw.add("t_star", res.t_star);
  sw.add("completed", res.completed ? "true" : "false");
  sw.add("stop_reason", res.stop_reason);
  if (!res.records.empty()) {
    sw.add("e_total_initial", res.records.front().e_total);
    sw.add("e_total_final", res.records.back().e_total);
    sw.add("min_det_final", res.records.back().min_det);
  }
  write_file(out_dir + "/summary.txt", sw.render());

  if (!quiet) {
    std::cout << "t* = " << format_double(res.t_star) << " (" << res.stop_reason << "), "
              << res.records.size() << " records -> " << out_dir << "/timeseries.csv\n";
  }
  return res.completed ? 0 : 1;
}

int cmd_sweep(const std::string& path, const std::string& out_dir,
              std::vector<double> kappas, bool quiet) {
  Problem p = load_problem(path, /*want_hierarchy=*/true);
  if (kappas.empty()) kappas = {1e-1, 1e-2, 1e-3, 1e-4};
  RunOptions o;
  o.t_end = p.cfg.t_end;
  o.record_every = p.cfg.record_every;
  KappaSweep sw = kappa_sweep(p.mesh, p.cfg.solver, p.u0, p.forcing.get(),
                              p.cfg.use_hierarchy ? &*p.hier : nullptr, kappas, o);

  SummaryWriter out;
  bool all_end = true;
  for (const auto& run : sw.runs) {
    all_end = all_end && run.completed;
    std::string line = format_double(run.t_star) + " (" + run.stop_reason + ")";
    out.add("t_star[kappa=" + format_double(run.kappa) + "]", line);
    if (!quiet) std::cout << "kappa " << format_double(run.kappa) << ": t* = " << line << "\n";
  }
  out.add("t_star_ratio", sw.ratio);
  ensure_dir(out_dir);
  write_file(out_dir + "/kappa_sweep.txt", out.render());
  if (!quiet) std::cout << "min/max t* ratio = " << format_double(sw.ratio) << "\n";
  return (all_end || sw.ratio >= 0.5) ? 0 : 1;
}

int cmd_relax(const std::string& path, std::vector<double> epss, double dt, double t_end,
              bool quiet) {
  Problem p = load_problem(path, /*want_hierarchy=*/true);
  if (epss.empty()) epss = {1.0, 1e-2, 1e-4, 1e-6};
  auto g = hierarchy_relax_data(p.mesh, p.c, *p.data);
  bool ok = true;
  for (double eps : epss) {
    RelaxationTrial tr = relaxation_trial(p.mesh, p.c, p.u0, g, eps, dt, t_end);
    double slack = tr.bound + 1e-8 - tr.sup_y;
    ok = ok && slack >= 0;
    if (!quiet)
      std::cout << "eps " << format_double(eps) << ": sup |L(u)| = " << format_double(tr.sup_y)
                << ", bound = " << format_double(tr.bound)
                << (slack >= 0 ? " (ok)" : " (EXCEEDED)") << "\n";
  }
  return ok ? 0 : 1;
}

int cmd_compat(const std::string& path, double tol, bool quiet) {
  Problem p = load_problem(path, /*want_hierarchy=*/true);
  CompatReport rep = check_compatibility(p.mesh, *p.data, *p.forcing, p.cfg.solver.nu, p.c);
  if (!quiet) {
    std::cout << "tangential strain      " << format_double(rep.c1_tangential_strain) << "\n"
              << "w1 outer trace         " << format_double(rep.c1_w1_outer) << "\n"
              << "w2 outer trace         " << format_double(rep.c1_w2_outer) << "\n"
              << "acceleration mismatch  " << format_double(rep.c1_accel_mismatch) << "\n"
              << "traction rate          " << format_double(rep.c2_traction_rate) << "\n"
              << "traction second rate   " << format_double(rep.c3_traction_rate2) << "\n"
              << "second velocity gap    " << format_double(rep.c4_velocity2) << "\n"
              << "interface w1 gap       " << format_double(p.data->mismatch_w1) << "\n"
              << "interface w2 gap       " << format_double(p.data->mismatch_w2) << "\n";
  }
  bool ok = rep.compatible(tol);
  std::cout << (ok ? "compatible" : "NOT compatible") << " at tol " << format_double(tol)
            << "\n";
  return ok ? 0 : 1;
}

int cmd_mms(const std::string& which, bool quiet) {
  bool ok = true;
  if (which == "time" || which == "both") {
    RateFit t = mms_time_rate(8, 0.2, {0.02, 0.01, 0.005}, 3.0, 1e-2);
    if (!quiet)
      for (size_t i = 0; i < t.hs.size(); ++i)
        std::cout << "dt " << format_double(t.hs[i]) << ": error " << format_double(t.errors[i])
                  << "\n";
    std::cout << "temporal rate " << format_double(t.rate) << "\n";
    ok = ok && t.rate >= 0.8 && t.rate <= 1.2;
  }
  if (which == "space" || which == "both") {
    RateFit s = mms_space_rate({16, 32, 64}, 2.0, 1.0);
    if (!quiet)
      for (size_t i = 0; i < s.hs.size(); ++i)
        std::cout << "h " << format_double(s.hs[i]) << ": error " << format_double(s.errors[i])
                  << "\n";
    std::cout << "spatial rate " << format_double(s.rate) << "\n";
    ok = ok && s.rate >= 1.8;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lagrangian-frame fluid-structure interaction solver"};
  app.require_subcommand(1);
  // inherited by the subcommands, so global flags parse after the subcommand
  // name as well as before it
  app.fallthrough();

  std::string config_path, out_dir = "out", mms_which = "both";
  double kappa = std::nan("");
  double relax_dt = 1e-2, relax_t_end = 1.0, compat_tol = 1e-8;
  std::vector<double> kappas, epss;
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "suppress progress output");

  CLI::App* run = app.add_subcommand("run", "integrate a configured problem");
  run->add_option("-c,--config", config_path, "problem config (ini)")->required();
  run->add_option("-o,--out", out_dir, "output directory");
  run->add_option("--kappa", kappa, "override the regularization strength");

  CLI::App* sweep = app.add_subcommand("sweep-kappa", "existence time vs regularization");
  sweep->add_option("-c,--config", config_path, "problem config (ini)")->required();
  sweep->add_option("-o,--out", out_dir, "output directory");
  sweep->add_option("--kappas", kappas, "values to sweep (default 1e-1..1e-4)");

  CLI::App* relax = app.add_subcommand("relax-bound", "damped-update uniform bound probe");
  relax->alias("lemma-key");
  relax->add_option("-c,--config", config_path, "problem config (ini)")->required();
  relax->add_option("--eps", epss, "relaxation scales (default 1,1e-2,1e-4,1e-6)");
  relax->add_option("--dt", relax_dt, "probe step size");
  relax->add_option("--t-end", relax_t_end, "probe horizon");

  CLI::App* compat = app.add_subcommand("check-compat", "interface compatibility residuals");
  compat->add_option("-c,--config", config_path, "problem config (ini)")->required();
  compat->add_option("--tol", compat_tol, "acceptance tolerance");

  CLI::App* mms = app.add_subcommand("mms", "manufactured convergence rates");
  mms->add_option("which", mms_which, "time | space | both")
      ->check(CLI::IsMember({"time", "space", "both"}));

  app.add_subcommand("verify", "run the full acceptance gate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, kappa, quiet);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, kappas, quiet);
    if (relax->parsed()) return cmd_relax(config_path, epss, relax_dt, relax_t_end, quiet);
    if (compat->parsed()) return cmd_compat(config_path, compat_tol, quiet);
    if (mms->parsed()) return cmd_mms(mms_which, quiet);
    // verify
    std::vector<CriterionResult> rs = run_acceptance(std::cout);
    return all_passed(rs) ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
