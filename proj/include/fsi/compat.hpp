#pragma once
#include <functional>
#include <vector>

#include "fsi/fields.hpp"
#include "fsi/linalg.hpp"
#include "fsi/mesh.hpp"
#include "fsi/operators.hpp"

namespace fsi {

// Body force with the time and space derivatives the data hierarchy consumes.
// Presets override the derivative members with closed forms; the defaults fall
// back to finite differences of f itself (time members) or of the stated
// analytic member (space members), good enough for smooth test forcings.
class Forcing {
 public:
  explicit Forcing(int d) : dim(d) {}
  virtual ~Forcing() = default;

  virtual Vec f(double t, const Vec& x) const = 0;
  virtual Vec f_t(double t, const Vec& x) const;
  virtual Vec f_tt(double t, const Vec& x) const;
  virtual Vec f_ttt(double t, const Vec& x) const;

  // spatial Jacobians, grad_f(i,j) = df^i/dx_j
  virtual Mat grad_f(double t, const Vec& x) const;
  virtual Mat grad_f_t(double t, const Vec& x) const;
  // second directional derivative: sum_jk d_j d_k f^i u_j u_k
  virtual Vec hess_quad(double t, const Vec& x, const Vec& u) const;

  int dim;
};

// Mixed elliptic solve on the fluid region: Laplace q = volume_rhs with
// Dirichlet values on interface nodes and a flux datum dq/dN on the outer
// boundary. The data are passed explicitly so manufactured problems can be
// injected through the same core the hierarchy builders use. With no solid
// present the pure Neumann problem is grounded by pinning one node to zero.
struct FluidPoissonProblem {
  NodalField volume_rhs;  // scalar per node, interpolated at quadrature points
  NodalField dirichlet;   // scalar per node, read at interface nodes only
  // flux at outer-boundary quadrature points; the facet gives the normal
  std::function<double(const OuterFacet&, const Vec& x)> neumann;
};

NodalField solve_fluid_poisson(const PhaseMesh& m, const FluidPoissonProblem& p,
                               SolveReport* rep = nullptr);

// Unit outward-from-fluid normal per interface node, averaged over the node's
// facets (corner nodes get the normalized diagonal). Zero for other nodes.
std::vector<Vec> interface_node_normals(const PhaseMesh& m);

struct CompatData {
  NodalField u0;                    // initial velocity, global
  NodalField w1, w2, w3;            // merged: fluid formula on fluid nodes,
                                    // solid formula on solid-only nodes
  NodalField w1_solid, w2_solid, w3_solid;  // solid formula on solid nodes
  NodalField q0, q1, q2;            // nodal pressures, supported on fluid nodes
  double mismatch_w1 = 0;           // max interface gap between the two sides
  double mismatch_w2 = 0;
  double mismatch_w3 = 0;
  SolveReport q0_solve, q1_solve, q2_solve;
};

// First-order conditions: tangential interface strain of u0, decay of w1 and
// w2 at the outer wall, and the fluid/solid acceleration match at the
// interface. c2/c3 are the tangential traction-rate matches at first and
// second order; c4 is the second-order velocity match. All are sup norms over
// interface facets or nodes, reported as measured, zero meaning compatible.
struct CompatReport {
  double c1_tangential_strain = 0;
  double c1_w1_outer = 0;
  double c1_w2_outer = 0;
  double c1_accel_mismatch = 0;
  double c2_traction_rate = 0;
  double c3_traction_rate2 = 0;
  double c4_velocity2 = 0;
  bool compatible(double tol) const {
    return c1_tangential_strain <= tol && c1_w1_outer <= tol && c1_w2_outer <= tol &&
           c1_accel_mismatch <= tol && c2_traction_rate <= tol && c3_traction_rate2 <= tol &&
           c4_velocity2 <= tol;
  }
};

// Full hierarchy in dependency order: q0, w1, q1, w2, q2, w3.
CompatData build_compat_data(const PhaseMesh& m, const NodalField& u0, const Forcing& f,
                             double nu, const ElasticityTensor& c);

CompatReport check_compatibility(const PhaseMesh& m, const CompatData& d, const Forcing& f,
                                 double nu, const ElasticityTensor& c);

// Individual stages, each recomputing what it needs from the given inputs.
NodalField build_q0(const PhaseMesh& m, const NodalField& u0, const Forcing& f, double nu,
                    SolveReport* rep = nullptr);

struct W1Result {
  NodalField w1;        // merged
  NodalField w1_solid;  // solid formula on solid nodes
  double interface_mismatch = 0;
};
W1Result build_w1(const PhaseMesh& m, const NodalField& u0, const NodalField& q0,
                  const Forcing& f, double nu);

struct PressureHierarchy {
  NodalField q1, q2;
  SolveReport q1_solve, q2_solve;
};
PressureHierarchy build_pressure_hierarchy(const PhaseMesh& m, const NodalField& u0,
                                           const NodalField& w1, const NodalField& w1_solid,
                                           const NodalField& q0, const Forcing& f, double nu,
                                           const ElasticityTensor& c);

struct VelocityHierarchy {
  NodalField w2, w3;
  NodalField w2_solid, w3_solid;
  double mismatch_w2 = 0;
  double mismatch_w3 = 0;
};
VelocityHierarchy build_velocity_hierarchy(const PhaseMesh& m, const NodalField& u0,
                                           const NodalField& w1, const NodalField& w1_solid,
                                           const NodalField& q0, const NodalField& q1,
                                           const Forcing& f, double nu,
                                           const ElasticityTensor& c);

// Solid forcing pair derived from the data hierarchy. The solid taylor field
// X(t) = u0 + t w1 + (t^2/2) w2 enters the momentum balance through three
// realizations, all precomputed as static coefficient triples in t:
//   pair*:   weak volume pairing  int_s stress_raw(grad X) : grad phi,
//            the single term the time stepper adds (scaled by kappa)
//   strong*: nodal field -div stress_raw(grad X) on solid nodes
//   g*:      interface traction stress_raw(grad X) N at facet centers
struct HgForcing {
  NodalField pair0, pair1, pair2;
  NodalField strong0, strong1, strong2;
  std::vector<Vec> g0, g1, g2;

  NodalField pairing_at(double t) const;
  NodalField strong_at(double t) const;
  std::vector<Vec> g_at(double t) const;
};

HgForcing forcing_hg(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u0,
                     const NodalField& w1_solid, const NodalField& w2_solid);

}  // namespace fsi
