#pragma once
#include <functional>
#include <string>
#include <vector>

#include "fsi/compat.hpp"
#include "fsi/fields.hpp"
#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"
#include "fsi/operators.hpp"

namespace fsi {

struct SolverParams {
  double nu = 1.0;
  double lambda = 2.0, mu = 1.0;
  double kappa = 1e-2;   // solid velocity regularization weight
  double eps = 1e-4;     // divergence penalty
  double dt = 1e-3;
  bool include_hg = true;  // apply the hierarchy-derived solid forcing pair
  NewtonOptions newton;
  double det_floor = 1e-8;  // stop when min det(grad eta) drops this low
  double z_ceiling = 1e8;   // stop when the z functional blows past this
};

struct DeformationState {
  double t = 0;
  NodalField eta;               // configuration
  NodalField v;                 // velocity
  std::vector<double> q_cell;   // fluid pressure per cell (accepted step)
};

struct StepReport {
  NewtonReport newton;
  double min_det = 1.0;  // over all quadrature points after the step
  bool accepted = false;
};

struct DiagnosticsRecord {
  int step = 0;
  double t = 0;
  double e_kin = 0, e_el = 0, e_total = 0;
  double v_h1 = 0;           // full H1 norm over the whole domain
  double disp_h2_solid = 0;  // nodal-FD H2 norm of eta - id over the solid
  double q_l2 = 0;
  double div_residual = 0;  // L2 of the cellwise-averaged lagrangian divergence
  double min_det = 1.0;
  int newton_iters = 0;
  double newton_residual = 0;
  double z_proxy = 0;  // running sum dt |v|_H1^2 + sup |disp|_H2^2 + sup |q|_L2^2
};

// Hierarchy-derived terms the stepper consumes: cellwise averages of the
// pressure jet and the solid forcing pair. Built once per run.
struct HierarchyTerms {
  std::vector<double> qbar0, qbar1, qbar2;  // per cell, zero on solid cells
  HgForcing hg;
  bool has_pressure = false;
  bool has_hg = false;
};

HierarchyTerms make_hierarchy_terms(const PhaseMesh& m, const CompatData& data,
                                    const ElasticityTensor& c);

// Extra load subtracted from the weak residual at the given time; the
// manufactured-solution drivers inject their defect forces through this.
using ExtraLoad = std::function<NodalField(double t)>;

class Stepper {
 public:
  Stepper(const PhaseMesh& m, const SolverParams& p);

  // Optional couplings; pointers are borrowed and must outlive the stepper.
  void set_forcing(const Forcing* f) { frc = f; }
  void set_hierarchy(const HierarchyTerms* h) { hier = h; }
  void set_extra_load(ExtraLoad f) { extra = std::move(f); }

  const SolverParams& params() const { return prm; }
  const ElasticityTensor& elasticity() const { return elast; }
  const SpMat& mass_matrix() const { return mass; }

  // Initial state at t = 0: identity configuration, v = u0 (walls zeroed),
  // pressure from the penalty closure evaluated on u0.
  DeformationState initial_state(const NodalField& u0) const;

  // One backward-Euler step; the state advances only when Newton converges.
  StepReport step(DeformationState& s);

  // Instantaneous diagnostics (step index and z_proxy left to the caller).
  DiagnosticsRecord measure(const DeformationState& s) const;

  // weak residual and jacobian of the implicit step at trial velocity w
  DVec residual(const DVec& w, const DeformationState& s) const;
  SpMat jacobian(const DVec& w, const DeformationState& s) const;

 private:
  std::vector<double> qbar_at(double t) const;  // per fluid cell, empty if none
  void pressure_closure(const NodalField& w, const NodalField& eta_new, double t_new,
                        std::vector<double>& q_cell) const;

  const PhaseMesh& m;
  SolverParams prm;
  ElasticityTensor elast;
  const Forcing* frc = nullptr;
  const HierarchyTerms* hier = nullptr;
  ExtraLoad extra;

  SpMat mass;                                       // consistent, both phases
  SpMat kappa_stiffness;                            // kappa-scaled solid term
  std::vector<Eigen::Triplet<double>> fixed_trips;  // mass/dt + kappa + wall rows
  std::vector<uint8_t> dof_pinned;
};

struct RunOptions {
  double t_end = 0.5;
  int record_every = 1;
  bool keep_states = false;  // retain the full trajectory (memory!)
};

struct RunResult {
  std::vector<DiagnosticsRecord> records;
  DeformationState final_state;
  std::vector<DeformationState> states;  // filled when keep_states
  double t_star = 0;         // last time reached before breakdown (t_end if none)
  bool completed = false;
  std::string stop_reason;   // "end", "newton", "det", "blowup"
};

RunResult run_simulation(const PhaseMesh& m, const SolverParams& p, const NodalField& u0,
                         const Forcing* f, const HierarchyTerms* hier, const RunOptions& opts,
                         ExtraLoad extra = {});

// Z functional over a recorded trajectory: sum of dt |v|_H1^2, plus the sups
// of |eta - id|_H2(solid)^2 and |q|_L2^2, optionally with the backward
// difference quotient members. Requires at least 4 states.
struct ZtNorm {
  double v_h1_sq_time = 0;    // sum dt |v|_H1^2
  double sup_disp_h2_sq = 0;
  double sup_q_l2_sq = 0;
  double quot_v_sq_time = 0;  // sum dt |dv/dt|_L2^2 (difference quotients)
  double sup_quot_q_sq = 0;   // sup |dq/dt|_L2^2
  double total = 0;
};
ZtNorm zt_norm(const PhaseMesh& m, const std::vector<DeformationState>& states,
               bool with_quotients);

}  // namespace fsi
