#include "fsi/mesh.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fsi/io.hpp"

namespace fsi {

namespace {

bool inside_box(const Vec& x, const Box& b, int d) {
  for (int a = 0; a < d; ++a)
    if (x[a] < b.lo[a] || x[a] > b.hi[a]) return false;
  return true;
}

// 1d Gauss-Legendre, 3 points on [0,1], exact through degree 5
void gauss3(double* x, double* w) {
  const double s = std::sqrt(3.0 / 5.0);
  x[0] = 0.5 * (1.0 - s);
  x[1] = 0.5;
  x[2] = 0.5 * (1.0 + s);
  w[0] = 5.0 / 18.0;
  w[1] = 8.0 / 18.0;
  w[2] = 5.0 / 18.0;
}

}  // namespace

ShapeTable make_shape_table(const PhaseMesh& m, const std::vector<Vec>& pts) {
  ShapeTable t;
  const int d = m.dim;
  t.nsh = 1 << d;
  t.val.resize(pts.size() * size_t(t.nsh));
  t.grad.resize(pts.size() * size_t(t.nsh));
  for (size_t q = 0; q < pts.size(); ++q) {
    const Vec& xi = pts[q];
    int a = 0;
    int zmax = (d == 3) ? 1 : 0;
    for (int dz = 0; dz <= zmax; ++dz)
      for (int dy = 0; dy <= 1; ++dy)
        for (int dx = 0; dx <= 1; ++dx) {
          double s[3] = {dx ? xi[0] : 1.0 - xi[0], dy ? xi[1] : 1.0 - xi[1],
                         dz ? xi[2] : 1.0 - xi[2]};
          double g[3] = {dx ? 1.0 : -1.0, dy ? 1.0 : -1.0, dz ? 1.0 : -1.0};
          double v = s[0] * s[1];
          if (d == 3) v *= s[2];
          t.val[q * size_t(t.nsh) + size_t(a)] = v;
          Vec gr;
          gr[0] = g[0] * s[1] / m.h[0];
          gr[1] = g[1] * s[0] / m.h[1];
          if (d == 3) {
            gr[0] *= s[2];
            gr[1] *= s[2];
            gr[2] = g[2] * s[0] * s[1] / m.h[2];
          }
          t.grad[q * size_t(t.nsh) + size_t(a)] = gr;
          ++a;
        }
  }
  return t;
}

PhaseMesh build_mesh(const GeometrySpec& g) {
  if (g.dim != 2 && g.dim != 3) throw std::runtime_error("build_mesh: dim must be 2 or 3");
  if (!(g.h > 0)) throw std::runtime_error("build_mesh: resolution h must be positive");
  for (int a = 0; a < g.dim; ++a)
    if (!(g.container.hi[a] > g.container.lo[a]))
      throw std::runtime_error("build_mesh: container box has nonpositive extent");

  for (size_t s = 0; s < g.solids.size(); ++s) {
    const Box& b = g.solids[s];
    for (int a = 0; a < g.dim; ++a) {
      if (!(b.hi[a] > b.lo[a]))
        throw std::runtime_error("build_mesh: solid box " + std::to_string(s) +
                                 " has nonpositive extent");
      if (b.lo[a] <= g.container.lo[a] || b.hi[a] >= g.container.hi[a])
        throw std::runtime_error("build_mesh: solid box " + std::to_string(s) +
                                 " is not strictly inside the container");
    }
    for (size_t r = 0; r < s; ++r) {
      // require positive separation between solids
      bool separated = false;
      for (int a = 0; a < g.dim; ++a)
        if (g.solids[r].hi[a] < b.lo[a] || b.hi[a] < g.solids[r].lo[a]) separated = true;
      if (!separated)
        throw std::runtime_error("build_mesh: solid boxes " + std::to_string(r) + " and " +
                                 std::to_string(s) + " overlap or touch");
    }
  }

  PhaseMesh m;
  m.dim = g.dim;
  m.origin = g.container.lo;
  m.cell_vol = 1.0;
  for (int a = 0; a < g.dim; ++a) {
    double len = g.container.hi[a] - g.container.lo[a];
    int n = std::max(1, int(std::lround(len / g.h)));
    m.ncell[size_t(a)] = n;
    m.nnode[size_t(a)] = n + 1;
    m.h[size_t(a)] = len / n;
    m.cell_vol *= m.h[size_t(a)];
  }
  if (g.dim == 2) {
    m.ncell[2] = 1;
    m.nnode[2] = 1;
  }
  m.n_cells = m.ncell[0] * m.ncell[1] * (g.dim == 3 ? m.ncell[2] : 1);
  m.n_nodes = m.nnode[0] * m.nnode[1] * (g.dim == 3 ? m.nnode[2] : 1);

  m.phase.assign(size_t(m.n_cells), Phase::Fluid);
  for (int c = 0; c < m.n_cells; ++c) {
    Vec x = m.cell_center(c);
    for (const Box& b : g.solids)
      if (inside_box(x, b, g.dim)) {
        m.phase[size_t(c)] = Phase::Solid;
        break;
      }
  }
  for (int c = 0; c < m.n_cells; ++c)
    (m.is_fluid(c) ? m.fluid_cells : m.solid_cells).push_back(c);

  // solid cells must not touch the outer boundary (solid strictly interior)
  for (int c : m.solid_cells) {
    int ix, iy, iz;
    m.cell_coords(c, ix, iy, iz);
    bool touches = ix == 0 || ix == m.ncell[0] - 1 || iy == 0 || iy == m.ncell[1] - 1;
    if (g.dim == 3) touches = touches || iz == 0 || iz == m.ncell[2] - 1;
    if (touches)
      throw std::runtime_error("build_mesh: solid phase touches the outer boundary at h = " +
                               format_double(g.h));
  }

  // interface facets between phase-differing neighbor cells
  const int zmax = (g.dim == 3) ? m.ncell[2] : 1;
  for (int iz = 0; iz < zmax; ++iz)
    for (int iy = 0; iy < m.ncell[1]; ++iy)
      for (int ix = 0; ix < m.ncell[0]; ++ix) {
        int c = m.cell_index(ix, iy, iz);
        int idx[3] = {ix, iy, iz};
        for (int a = 0; a < g.dim; ++a) {
          if (idx[a] + 1 >= m.ncell[size_t(a)]) continue;
          int jdx[3] = {ix, iy, iz};
          jdx[a] += 1;
          int cn = m.cell_index(jdx[0], jdx[1], jdx[2]);
          if (m.phase[size_t(c)] == m.phase[size_t(cn)]) continue;
          InterfaceFacet f;
          f.axis = a;
          if (m.is_fluid(c)) {
            f.fluid_cell = c;
            f.solid_cell = cn;
            f.sign = +1;  // normal along +e_a, from fluid into solid
          } else {
            f.fluid_cell = cn;
            f.solid_cell = c;
            f.sign = -1;
          }
          Vec lo = m.cell_lo(cn);  // shared face = lower face of the upper cell along a
          f.center = lo;
          f.area = 1.0;
          for (int b = 0; b < g.dim; ++b)
            if (b != a) {
              f.center[b] += 0.5 * m.h[size_t(b)];
              f.area *= m.h[size_t(b)];
            }
          // face nodes: the 2^(d-1) nodes of the shared face
          int base[3] = {jdx[0], jdx[1], jdx[2]};
          f.n_nodes = 0;
          if (g.dim == 2) {
            int b = (a == 0) ? 1 : 0;
            for (int k = 0; k <= 1; ++k) {
              int nc[3] = {base[0], base[1], 0};
              nc[b] += k;
              f.nodes[size_t(f.n_nodes++)] = m.node_index(nc[0], nc[1], nc[2]);
            }
          } else {
            int b1 = (a + 1) % 3, b2 = (a + 2) % 3;
            for (int k2 = 0; k2 <= 1; ++k2)
              for (int k1 = 0; k1 <= 1; ++k1) {
                int nc[3] = {base[0], base[1], base[2]};
                nc[b1] += k1;
                nc[b2] += k2;
                f.nodes[size_t(f.n_nodes++)] = m.node_index(nc[0], nc[1], nc[2]);
              }
          }
          m.interface_facets.push_back(f);
        }
      }

  // outer facets
  for (int iz = 0; iz < zmax; ++iz)
    for (int iy = 0; iy < m.ncell[1]; ++iy)
      for (int ix = 0; ix < m.ncell[0]; ++ix) {
        int c = m.cell_index(ix, iy, iz);
        int idx[3] = {ix, iy, iz};
        for (int a = 0; a < g.dim; ++a)
          for (int sgn = -1; sgn <= 1; sgn += 2) {
            if (sgn < 0 && idx[a] != 0) continue;
            if (sgn > 0 && idx[a] != m.ncell[size_t(a)] - 1) continue;
            OuterFacet f;
            f.cell = c;
            f.axis = a;
            f.sign = sgn;
            f.center = m.cell_center(c);
            f.center[a] += 0.5 * sgn * m.h[size_t(a)];
            f.area = 1.0;
            for (int b = 0; b < g.dim; ++b)
              if (b != a) f.area *= m.h[size_t(b)];
            m.outer_facets.push_back(f);
          }
      }

  // node classifications
  m.node_on_outer.assign(size_t(m.n_nodes), 0);
  m.node_in_fluid.assign(size_t(m.n_nodes), 0);
  m.node_in_solid.assign(size_t(m.n_nodes), 0);
  m.node_on_interface.assign(size_t(m.n_nodes), 0);
  for (int p = 0; p < m.n_nodes; ++p) {
    int ix, iy, iz;
    m.node_coords(p, ix, iy, iz);
    bool on = ix == 0 || ix == m.nnode[0] - 1 || iy == 0 || iy == m.nnode[1] - 1;
    if (g.dim == 3) on = on || iz == 0 || iz == m.nnode[2] - 1;
    m.node_on_outer[size_t(p)] = on ? 1 : 0;
  }
  for (int c = 0; c < m.n_cells; ++c) {
    auto ns = m.cell_nodes(c);
    for (int a = 0; a < m.nodes_per_cell(); ++a) {
      if (m.is_fluid(c))
        m.node_in_fluid[size_t(ns[size_t(a)])] = 1;
      else
        m.node_in_solid[size_t(ns[size_t(a)])] = 1;
    }
  }
  for (const auto& f : m.interface_facets)
    for (int k = 0; k < f.n_nodes; ++k) m.node_on_interface[size_t(f.nodes[size_t(k)])] = 1;

  // quadrature and shape tables
  double gx[3], gw[3];
  gauss3(gx, gw);
  std::vector<Vec> pts;
  if (g.dim == 2) {
    for (int j = 0; j < 3; ++j)
      for (int i = 0; i < 3; ++i) {
        Vec xi;
        xi[0] = gx[i];
        xi[1] = gx[j];
        pts.push_back(xi);
        m.quad.w.push_back(gw[i] * gw[j] * m.cell_vol);
      }
  } else {
    for (int k = 0; k < 3; ++k)
      for (int j = 0; j < 3; ++j)
        for (int i = 0; i < 3; ++i) {
          Vec xi;
          xi[0] = gx[i];
          xi[1] = gx[j];
          xi[2] = gx[k];
          pts.push_back(xi);
          m.quad.w.push_back(gw[i] * gw[j] * gw[k] * m.cell_vol);
        }
  }
  m.quad.npts = int(pts.size());
  m.quad.xi = pts;
  m.shapes = make_shape_table(m, pts);
  std::vector<Vec> cpt(1);
  cpt[0][0] = cpt[0][1] = cpt[0][2] = 0.5;
  m.center = make_shape_table(m, cpt);

  return m;
}

std::string dump_mesh(const PhaseMesh& m) {
  std::ostringstream os;
  os << "# mesh dump v1: dim, spacing, nodes (id x...), cells (id nodes... phase),"
        " interface facets (id fluid_cell solid_cell axis sign center...)\n";
  os << "dim " << m.dim << "\n";
  os << "spacing";
  for (int a = 0; a < m.dim; ++a) os << " " << format_double(m.h[size_t(a)]);
  os << "\nnodes " << m.n_nodes << "\n";
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    os << p;
    for (int a = 0; a < m.dim; ++a) os << " " << format_double(x[a]);
    os << "\n";
  }
  os << "cells " << m.n_cells << "\n";
  for (int c = 0; c < m.n_cells; ++c) {
    os << c;
    auto ns = m.cell_nodes(c);
    for (int a = 0; a < m.nodes_per_cell(); ++a) os << " " << ns[size_t(a)];
    os << " " << (m.is_fluid(c) ? "fluid" : "solid") << "\n";
  }
  os << "interface_facets " << m.interface_facets.size() << "\n";
  for (size_t i = 0; i < m.interface_facets.size(); ++i) {
    const auto& f = m.interface_facets[i];
    os << i << " " << f.fluid_cell << " " << f.solid_cell << " " << f.axis << " " << f.sign;
    for (int a = 0; a < m.dim; ++a) os << " " << format_double(f.center[a]);
    os << "\n";
  }
  return os.str();
}

}  // namespace fsi
