#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fsi/smallmat.hpp"

namespace fsi {

struct Box {
  Vec lo, hi;
};

struct GeometrySpec {
  int dim = 2;
  Box container;
  std::vector<Box> solids;  // may be empty (pure fluid)
  double h = 0.0;           // target resolution
};

enum class Phase : uint8_t { Fluid = 0, Solid = 1 };

// Face between a fluid cell and a solid cell. The unit normal is
// sign * e_axis and points from the fluid side into the solid.
struct InterfaceFacet {
  int fluid_cell = -1, solid_cell = -1;
  int axis = 0, sign = +1;
  Vec center;
  double area = 0;
  std::array<int, 4> nodes{-1, -1, -1, -1};  // nodes of the face, 2 in 2d, 4 in 3d
  int n_nodes = 0;
};

// Face of a cell lying on the container boundary; normal = sign * e_axis,
// outward.
struct OuterFacet {
  int cell = -1;
  int axis = 0, sign = +1;
  Vec center;
  double area = 0;
};

// Tensor-product Gauss rule and precomputed Q1 shape data at its points.
// The mesh is uniform so physical shape gradients are cell independent.
struct QuadRule {
  int npts = 0;
  std::vector<Vec> xi;  // reference coordinates in [0,1]^d
  std::vector<double> w;  // weights including the cell volume
};

struct ShapeTable {
  int nsh = 0;                    // 2^d shape functions
  std::vector<double> val;        // [qpt * nsh + a]
  std::vector<Vec> grad;          // physical gradients, same layout
};

struct PhaseMesh {
  int dim = 2;
  Vec origin;
  std::array<int, 3> ncell{1, 1, 1};
  std::array<int, 3> nnode{1, 1, 1};
  std::array<double, 3> h{0, 0, 0};
  int n_cells = 0, n_nodes = 0;
  double cell_vol = 0;

  std::vector<Phase> phase;          // per cell
  std::vector<int> fluid_cells, solid_cells;
  std::vector<InterfaceFacet> interface_facets;
  std::vector<OuterFacet> outer_facets;

  std::vector<uint8_t> node_on_outer;    // node lies on container boundary
  std::vector<uint8_t> node_in_fluid;    // node of some fluid cell
  std::vector<uint8_t> node_in_solid;    // node of some solid cell
  std::vector<uint8_t> node_on_interface;

  QuadRule quad;          // 3-point Gauss per axis
  ShapeTable shapes;      // at quad points
  ShapeTable center;      // single-point table at the cell center

  int cell_index(int ix, int iy, int iz) const {
    return (iz * ncell[1] + iy) * ncell[0] + ix;
  }
  void cell_coords(int c, int& ix, int& iy, int& iz) const {
    ix = c % ncell[0];
    iy = (c / ncell[0]) % ncell[1];
    iz = c / (ncell[0] * ncell[1]);
  }
  int node_index(int ix, int iy, int iz) const {
    return (iz * nnode[1] + iy) * nnode[0] + ix;
  }
  void node_coords(int p, int& ix, int& iy, int& iz) const {
    ix = p % nnode[0];
    iy = (p / nnode[0]) % nnode[1];
    iz = p / (nnode[0] * nnode[1]);
  }
  Vec node_pos(int p) const {
    int ix, iy, iz;
    node_coords(p, ix, iy, iz);
    Vec x;
    x[0] = origin[0] + ix * h[0];
    x[1] = origin[1] + iy * h[1];
    if (dim == 3) x[2] = origin[2] + iz * h[2];
    return x;
  }
  Vec cell_lo(int c) const {
    int ix, iy, iz;
    cell_coords(c, ix, iy, iz);
    Vec x;
    x[0] = origin[0] + ix * h[0];
    x[1] = origin[1] + iy * h[1];
    if (dim == 3) x[2] = origin[2] + iz * h[2];
    return x;
  }
  Vec cell_center(int c) const {
    Vec x = cell_lo(c);
    for (int a = 0; a < dim; ++a) x[a] += 0.5 * h[size_t(a)];
    return x;
  }
  // Q1 vertex ordering: lexicographic in (dx, dy, dz) offsets
  std::array<int, 8> cell_nodes(int c) const {
    int ix, iy, iz;
    cell_coords(c, ix, iy, iz);
    std::array<int, 8> ns{};
    int n = 0;
    int zmax = (dim == 3) ? 1 : 0;
    for (int dz = 0; dz <= zmax; ++dz)
      for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) ns[size_t(n++)] = node_index(ix + dx, iy + dy, iz + dz);
    return ns;
  }
  int nodes_per_cell() const { return 1 << dim; }
  bool is_fluid(int c) const { return phase[size_t(c)] == Phase::Fluid; }
};

// Raises std::runtime_error on invalid geometry: solids outside the container,
// overlapping or touching solids, solids touching the outer boundary,
// nonpositive resolution.
PhaseMesh build_mesh(const GeometrySpec& g);

// Q1 shape values and physical gradients at the given reference points.
ShapeTable make_shape_table(const PhaseMesh& m, const std::vector<Vec>& pts);

// Plain-text mesh dump, one record per line, documented header.
std::string dump_mesh(const PhaseMesh& m);

}  // namespace fsi
