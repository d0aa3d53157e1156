#pragma once
#include <cstdint>
#include <vector>

#include "fsi/mesh.hpp"

namespace fsi {

// Nodal fields are flat vectors, layout [node * comps + component].
using NodalField = std::vector<double>;

NodalField zero_field(const PhaseMesh& m, int comps);
NodalField identity_configuration(const PhaseMesh& m);  // eta(x) = x

// Value / gradient of a nodal field at a tabulated point of a cell.
// For vector fields (comps == dim) the gradient rows are components,
// columns derivative directions.
Vec eval_vec(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q);
double eval_scalar(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q);
Mat grad_vec(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q);
Vec grad_scalar(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q);

// One-point shape table at an arbitrary reference coordinate in [0,1]^d
ShapeTable point_shapes(const PhaseMesh& m, const Vec& xi);

enum class Region { All, Fluid, Solid };
const std::vector<int>& region_cells(const PhaseMesh& m, Region r);

// Quadrature norms over a cell region
double l2_norm_sq(const PhaseMesh& m, const NodalField& f, int comps, Region r);
double h1_seminorm_sq(const PhaseMesh& m, const NodalField& f, int comps, Region r);

// L2 norm of a cellwise-constant field over its cells
double cell_l2_norm_sq(const PhaseMesh& m, const std::vector<double>& cellvals,
                       const std::vector<int>& cells);

// Lumped nodal integration weights for one phase (sum of adjacent cell
// volumes / 2^d); zero at nodes not touching the phase.
std::vector<double> lumped_node_weights(const PhaseMesh& m, Region r);

// ---------------------------------------------------------------------------
// Finite differences on the node lattice. `mask` (optional) marks nodes whose
// values are meaningful; stencils shift to one-sided second-order forms when
// a neighbor is masked out or off the lattice, and degrade to first order
// only if even those nodes are unavailable.

struct FdMask {
  const std::vector<uint8_t>* valid = nullptr;  // nullptr = all nodes valid
  bool ok(int node) const { return valid == nullptr || (*valid)[size_t(node)] != 0; }
};

// first derivative of component `comp` along `axis` at `node`
double fd_d1(const PhaseMesh& m, const NodalField& f, int comps, int comp, int node, int axis,
             FdMask mask = {});
// second derivative, axes may coincide (d^2/da db)
double fd_d2(const PhaseMesh& m, const NodalField& f, int comps, int comp, int node, int axis_a,
             int axis_b, FdMask mask = {});

Vec fd_grad_scalar(const PhaseMesh& m, const NodalField& f, int node, FdMask mask = {});
Mat fd_grad_vec(const PhaseMesh& m, const NodalField& f, int node, FdMask mask = {});
Vec fd_laplacian_vec(const PhaseMesh& m, const NodalField& f, int node, FdMask mask = {});

}  // namespace fsi
