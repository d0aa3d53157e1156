#pragma once
#include <functional>
#include <string>
#include <vector>

#include "fsi/compat.hpp"
#include "fsi/stepper.hpp"

namespace fsi {

// Least-squares slope of log(error) against log(h). Positive for errors that
// shrink with h; the convergence studies report this as the observed order.
double fit_rate(const std::vector<double>& hs, const std::vector<double>& errors);

// Number of worker threads for a batch of independent runs: capped by the
// FSI_THREADS environment variable when set, by the hardware otherwise.
int thread_budget(int njobs);

// Exact one-step integrator for eps y' + y = g with g linear on the step.
// The update is a convex combination of y0, g0, g1, which is what makes the
// sup bound of the relaxation trial hold without an eps-dependent constant.
double relax_update(double y0, double g0, double g1, double dt, double eps);

// March y under eps y' + y = g(t) from y(0) = strong elastic operator of u0,
// recording the solid L2 norm of y and of the sampled data. `bound` is the
// data-only majorant max(|y(0)|, max_n |g(t_n)|); `sup_y` may exceed it only
// by rounding, for every eps.
struct RelaxationTrial {
  std::vector<double> times;
  std::vector<double> y_l2;
  std::vector<double> g_l2;
  double sup_y = 0;
  double bound = 0;
  NodalField y_final;
};
RelaxationTrial relaxation_trial(const PhaseMesh& m, const ElasticityTensor& c,
                                 const NodalField& u0,
                                 const std::function<NodalField(double)>& g, double eps,
                                 double dt, double t_end);

// Canonical data for the trial: the velocity jet u0 + t w1 + t^2/2 w2 pushed
// through the strong elastic operator on the solid. Borrows the mesh.
std::function<NodalField(double)> hierarchy_relax_data(const PhaseMesh& m,
                                                       const ElasticityTensor& c,
                                                       const CompatData& data);

struct KappaRun {
  double kappa = 0;
  double t_star = 0;
  bool completed = false;
  std::string stop_reason;
};
struct KappaSweep {
  std::vector<KappaRun> runs;
  double min_t_star = 0;
  double max_t_star = 0;
  double ratio = 0;  // min / max
};
// Identical runs at each kappa; t_star is the last accepted time before
// breakdown (t_end when the run completes). Runs execute in parallel.
KappaSweep kappa_sweep(const PhaseMesh& m, const SolverParams& base, const NodalField& u0,
                       const Forcing* f, const HierarchyTerms* hier,
                       const std::vector<double>& kappas, const RunOptions& opts);

struct KappaConvergence {
  double kappa_ref = 0;
  std::vector<double> kappas;
  std::vector<double> distances;  // L2-in-time H1 distance to the reference run
  bool strictly_decreasing = false;
};
// Trajectory distance to the kappa_ref run for each kappa, in the order given
// (pass them decreasing toward kappa_ref). Throws if any run breaks down, as
// the distance is only meaningful over the full window.
KappaConvergence kappa_convergence(const PhaseMesh& m, const SolverParams& base,
                                   const NodalField& u0, const Forcing* f,
                                   const HierarchyTerms* hier, const std::vector<double>& kappas,
                                   double kappa_ref, const RunOptions& opts);

struct PerturbationStudy {
  std::vector<double> deltas;
  std::vector<double> ratios;  // sup_t |v_delta - v|_L2 / delta
  double max_ratio = 0;
  double min_ratio = 0;
  std::string csv;  // canonical table; identical reruns render identical bytes
};
// Sensitivity of the trajectory to u0 + delta * direction for each delta.
PerturbationStudy perturbation_study(const PhaseMesh& m, const SolverParams& p,
                                     const NodalField& u0, const NodalField& direction,
                                     const Forcing* f, const HierarchyTerms* hier,
                                     const std::vector<double>& deltas, const RunOptions& opts);

struct EnergyCheck {
  bool non_increasing = true;
  double max_rise = 0;  // largest positive step-to-step jump in e_total
  double e0 = 0;
  int first_bad_step = -1;
};
// Per-record energy monotonicity with slack rel_tol * e_total(0).
EnergyCheck check_energy(const std::vector<DiagnosticsRecord>& recs, double rel_tol);

struct RateFit {
  std::vector<double> hs;  // step sizes or mesh sizes, matching `errors`
  std::vector<double> errors;
  double rate = 0;
};

// Backward-Euler error against a manufactured in-time solution on a pure
// fluid mesh; the defect force enters through the extra-load hook so the
// spatial operators stay untouched. Errors are |v_N - v*(T)|_L2.
RateFit mms_time_rate(int ncells, double t_end, const std::vector<double>& dts, double omega,
                      double eps);

// Static elastic solve against a manufactured displacement on the solid of a
// unit-square mesh, one grid per entry of ns. Errors are L2 over the solid.
RateFit mms_space_rate(const std::vector<int>& ns, double lambda, double mu);

}  // namespace fsi
