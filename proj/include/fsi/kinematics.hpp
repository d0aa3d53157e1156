#pragma once
#include <vector>

#include "fsi/fields.hpp"
#include "fsi/mesh.hpp"

namespace fsi {

// Per-cell, per-point matrix data (configuration gradients, cofactors,
// strain offsets). `cells` lists the cells covered, `pts_per_cell` is the
// number of evaluation points (quadrature points or 1 for cell centers).
struct TensorField {
  int dim = 2;
  int pts_per_cell = 0;
  std::vector<int> cells;
  std::vector<Mat> val;  // [cell_slot * pts_per_cell + q]
  const Mat& at(int slot, int q) const { return val[size_t(slot * pts_per_cell + q)]; }
  Mat& at(int slot, int q) { return val[size_t(slot * pts_per_cell + q)]; }
};

enum class EvalAt { QuadPoints, CellCenters };

// Gradient of a nodal vector field on the cells of a region.
// Throws if the field length does not match dim * n_nodes.
TensorField gradient(const PhaseMesh& m, const NodalField& eta, Region r,
                     EvalAt where = EvalAt::QuadPoints);

// a = adj(F) = [Cof F]^T, entrywise over a tensor field; a F = det(F) I.
TensorField cofactor_field(const TensorField& grad);
Mat cofactor(const Mat& f, int d);

std::vector<double> jacobian_det(const TensorField& grad);  // det per point
double min_jacobian_det(const PhaseMesh& m, const NodalField& eta, Region r);

// Green strain offset eta,_m . eta,_j - delta_mj = F^T F - I (exact symmetry:
// only the upper triangle is computed and mirrored).
TensorField strain_offset(const TensorField& grad);
Mat strain_offset(const Mat& f, int d);

// Row divergence of the cofactor field by central differences of cell-center
// values; returns max |sum_j d_j a^j_i| over interior cells of the region.
// Exactly zero for affine configurations; decays at the discretization order
// for smooth ones.
double piola_residual(const PhaseMesh& m, const NodalField& eta, Region r);

// ---------------------------------------------------------------------------
// Cofactor jet: given F(t) = G0 + t G1 + (t^2/2) G2 + (t^3/6) G3 (derivative
// data, not plain coefficients), return a(F(t)) as a truncated Taylor
// polynomial. deriv(n) recovers d^n a / dt^n at t = 0.
TaylorMat cofactor_jet(const Mat& g0, const Mat& g1, const Mat& g2, const Mat& g3, int d);

// FD oracle for the jet: n-th derivative (n <= 3) of adj(F(t)) at t = 0 using
// a 7-point symmetric stencil, exact for the polynomial entries of a(t).
Mat cofactor_jet_fd(const Mat& g0, const Mat& g1, const Mat& g2, const Mat& g3, int d, int n,
                    double step);

}  // namespace fsi
