#pragma once
#include <vector>

#include "fsi/fields.hpp"
#include "fsi/kinematics.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

// Isotropic elasticity coefficients
//   c^{ijkl} = lambda d^{ij} d^{kl} + mu (d^{ik} d^{jl} + d^{il} d^{jk});
// pointwise stable on symmetric S: c:S:S = lambda tr(S)^2 + 2 mu |S|^2.
struct ElasticityTensor {
  double lambda = 0, mu = 0;
  int dim = 2;
  ElasticityTensor(double l, double m, int d);
  double c_eval(int i, int j, int k, int l) const;
  // contraction c^{ijkl} B_kl for symmetric B: lambda tr(B) I + 2 mu B
  Mat contract(const Mat& b) const;
  // c^{ijkl} (G_kl + G_lk) = 2 lambda tr(G) I + 2 mu (G + G^T)
  Mat stress_sym(const Mat& g) const;
  // c^{ijkl} G_kl (unsymmetrized bracket) = lambda tr(G) I + mu (G + G^T)
  Mat stress_raw(const Mat& g) const;
};

// Weak-form outputs are load vectors over the global nodal space
// (n_nodes * dim entries); entries vanish for test functions supported away
// from the integrated phase. validate() rejects non-finite entries.
struct OperatorOutput {
  NodalField load;
  void validate() const;
};

// <L(u), phi> with natural boundary, volume realization:
//   -int_solid c^{ijkl} (u^k,_l + u^l,_k) phi^i,_j
OperatorOutput linear_L(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u);

// Strong-form L(u) at nodes: FD divergence of the FD-built nodal stress
// field. Shares the stencil path with the hierarchy builders so algebraic
// identities between the two hold to rounding.
NodalField linear_L_strong(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u,
                           FdMask mask = {});

// Displacement eta - x as a nodal field, and the Green strain offset written
// in the displacement gradient: E + E^T + E^T E. Equal to strain_offset(I + E)
// in exact arithmetic, but bitwise zero in the undeformed state, which the
// equilibrium guarantees of the solid terms rely on.
NodalField displacement_field(const PhaseMesh& m, const NodalField& eta);
Mat strain_from_displacement(const Mat& e, int d);

// int_solid c^{mjkl} (eta,_m . eta,_j - d_mj) eta^i,_k phi^i,_l
OperatorOutput nonlinear_N(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& eta);

// Interface traction c^{mjkl}(eta,_m . eta,_j - d_mj) eta^i,_k N_l per facet,
// evaluated at facet centers with the solid-side configuration gradient.
std::vector<Vec> traction_G(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& eta);

// nu * int_fluid a^j_l a^k_l v^i,_k phi^i,_j  (a given at fluid quad points)
OperatorOutput fluid_viscous(const PhaseMesh& m, const TensorField& a, const NodalField& v,
                             double nu);

// Lagrangian divergence a^k_i v^i,_k at the evaluation points of `a`
std::vector<double> lagrangian_div(const PhaseMesh& m, const TensorField& a, const NodalField& v);

// int_fluid a^k_i q phi^i,_k with q sampled at the points of `a`
// (layout [slot * pts_per_cell + qpt])
OperatorOutput pressure_term(const PhaseMesh& m, const TensorField& a,
                             const std::vector<double>& q);

// nodal symmetric stress field 2 lambda tr(grad u) I + 2 mu (grad u + grad u^T),
// gradients by FD at nodes; layout [node * dim * dim + i * dim + j]
NodalField stress_field_sym(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u,
                            FdMask mask = {});
// FD divergence over the second index of a nodal matrix field
NodalField fd_divergence(const PhaseMesh& m, const NodalField& t, FdMask mask = {});

}  // namespace fsi
