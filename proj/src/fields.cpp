#include "fsi/fields.hpp"

#include <stdexcept>

namespace fsi {

NodalField zero_field(const PhaseMesh& m, int comps) {
  return NodalField(size_t(m.n_nodes) * size_t(comps), 0.0);
}

NodalField identity_configuration(const PhaseMesh& m) {
  NodalField f(size_t(m.n_nodes) * size_t(m.dim));
  for (int p = 0; p < m.n_nodes; ++p) {
    Vec x = m.node_pos(p);
    for (int a = 0; a < m.dim; ++a) f[size_t(p * m.dim + a)] = x[a];
  }
  return f;
}

Vec eval_vec(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q) {
  auto ns = m.cell_nodes(cell);
  Vec v;
  for (int a = 0; a < t.nsh; ++a) {
    double s = t.val[size_t(q * t.nsh + a)];
    int p = ns[size_t(a)];
    for (int i = 0; i < m.dim; ++i) v[i] += s * f[size_t(p * m.dim + i)];
  }
  return v;
}

double eval_scalar(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q) {
  auto ns = m.cell_nodes(cell);
  double v = 0;
  for (int a = 0; a < t.nsh; ++a) v += t.val[size_t(q * t.nsh + a)] * f[size_t(ns[size_t(a)])];
  return v;
}

Mat grad_vec(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q) {
  auto ns = m.cell_nodes(cell);
  Mat g;
  for (int a = 0; a < t.nsh; ++a) {
    const Vec& dn = t.grad[size_t(q * t.nsh + a)];
    int p = ns[size_t(a)];
    for (int i = 0; i < m.dim; ++i) {
      double fv = f[size_t(p * m.dim + i)];
      for (int k = 0; k < m.dim; ++k) g(i, k) += fv * dn[k];
    }
  }
  return g;
}

Vec grad_scalar(const PhaseMesh& m, const NodalField& f, int cell, const ShapeTable& t, int q) {
  auto ns = m.cell_nodes(cell);
  Vec g;
  for (int a = 0; a < t.nsh; ++a) {
    const Vec& dn = t.grad[size_t(q * t.nsh + a)];
    double fv = f[size_t(ns[size_t(a)])];
    for (int k = 0; k < m.dim; ++k) g[k] += fv * dn[k];
  }
  return g;
}

namespace {
const std::vector<int>& all_cells(const PhaseMesh& m) {
  static thread_local std::vector<int> cache;
  cache.resize(size_t(m.n_cells));
  for (int c = 0; c < m.n_cells; ++c) cache[size_t(c)] = c;
  return cache;
}
}  // namespace

ShapeTable point_shapes(const PhaseMesh& m, const Vec& xi) {
  std::vector<Vec> pts(1);
  pts[0] = xi;
  return make_shape_table(m, pts);
}

const std::vector<int>& region_cells(const PhaseMesh& m, Region r) {
  switch (r) {
    case Region::Fluid:
      return m.fluid_cells;
    case Region::Solid:
      return m.solid_cells;
    default:
      return all_cells(m);
  }
}

double l2_norm_sq(const PhaseMesh& m, const NodalField& f, int comps, Region r) {
  double s = 0;
  for (int c : region_cells(m, r))
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      if (comps == 1) {
        double v = eval_scalar(m, f, c, m.shapes, q);
        s += w * v * v;
      } else {
        Vec v = eval_vec(m, f, c, m.shapes, q);
        s += w * dot(v, v, m.dim);
      }
    }
  return s;
}

double h1_seminorm_sq(const PhaseMesh& m, const NodalField& f, int comps, Region r) {
  double s = 0;
  for (int c : region_cells(m, r))
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      if (comps == 1) {
        Vec g = grad_scalar(m, f, c, m.shapes, q);
        s += w * dot(g, g, m.dim);
      } else {
        Mat g = grad_vec(m, f, c, m.shapes, q);
        for (int i = 0; i < m.dim; ++i)
          for (int k = 0; k < m.dim; ++k) s += w * g(i, k) * g(i, k);
      }
    }
  return s;
}

double cell_l2_norm_sq(const PhaseMesh& m, const std::vector<double>& cellvals,
                       const std::vector<int>& cells) {
  double s = 0;
  for (size_t i = 0; i < cells.size(); ++i)
    s += m.cell_vol * cellvals[size_t(cells[i])] * cellvals[size_t(cells[i])];
  return s;
}

std::vector<double> lumped_node_weights(const PhaseMesh& m, Region r) {
  std::vector<double> w(size_t(m.n_nodes), 0.0);
  double share = m.cell_vol / m.nodes_per_cell();
  for (int c : region_cells(m, r)) {
    auto ns = m.cell_nodes(c);
    for (int a = 0; a < m.nodes_per_cell(); ++a) w[size_t(ns[size_t(a)])] += share;
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

// offset node along axis, -1 if off lattice
int shift_node(const PhaseMesh& m, int node, int axis, int by) {
  int c[3];
  m.node_coords(node, c[0], c[1], c[2]);
  c[axis] += by;
  if (c[axis] < 0 || c[axis] >= m.nnode[size_t(axis)]) return -1;
  return m.node_index(c[0], c[1], c[2]);
}

struct Line {
  // usable nodes at offsets -3..+3 along one axis; idx[k+3], -1 if unusable
  std::array<int, 7> idx;
};

Line probe_line(const PhaseMesh& m, int node, int axis, FdMask mask) {
  Line l;
  for (int k = -3; k <= 3; ++k) {
    int p = shift_node(m, node, axis, k);
    if (p >= 0 && !mask.ok(p)) p = -1;
    l.idx[size_t(k + 3)] = p;
  }
  return l;
}

double value(const NodalField& f, int comps, int comp, int node) {
  return f[size_t(node * comps + comp)];
}

double d1_line(const PhaseMesh& m, const NodalField& f, int comps, int comp, const Line& l,
               int axis) {
  const double h = m.h[size_t(axis)];
  auto at = [&](int off) { return l.idx[size_t(off + 3)]; };
  auto v = [&](int off) { return value(f, comps, comp, at(off)); };
  if (at(1) >= 0 && at(-1) >= 0) return (v(1) - v(-1)) / (2 * h);
  if (at(1) >= 0 && at(2) >= 0) return (-3 * v(0) + 4 * v(1) - v(2)) / (2 * h);
  if (at(-1) >= 0 && at(-2) >= 0) return (3 * v(0) - 4 * v(-1) + v(-2)) / (2 * h);
  if (at(1) >= 0) return (v(1) - v(0)) / h;  // first-order fallback
  if (at(-1) >= 0) return (v(0) - v(-1)) / h;
  throw std::runtime_error("fd_d1: no usable stencil at node");
}

double d2_line(const PhaseMesh& m, const NodalField& f, int comps, int comp, const Line& l,
               int axis) {
  const double h2 = m.h[size_t(axis)] * m.h[size_t(axis)];
  auto at = [&](int off) { return l.idx[size_t(off + 3)]; };
  auto v = [&](int off) { return value(f, comps, comp, at(off)); };
  if (at(1) >= 0 && at(-1) >= 0) return (v(1) - 2 * v(0) + v(-1)) / h2;
  if (at(1) >= 0 && at(2) >= 0 && at(3) >= 0)
    return (2 * v(0) - 5 * v(1) + 4 * v(2) - v(3)) / h2;
  if (at(-1) >= 0 && at(-2) >= 0 && at(-3) >= 0)
    return (2 * v(0) - 5 * v(-1) + 4 * v(-2) - v(-3)) / h2;
  if (at(1) >= 0 && at(2) >= 0) return (v(0) - 2 * v(1) + v(2)) / h2;  // first order
  if (at(-1) >= 0 && at(-2) >= 0) return (v(0) - 2 * v(-1) + v(-2)) / h2;
  throw std::runtime_error("fd_d2: no usable stencil at node");
}

}  // namespace

double fd_d1(const PhaseMesh& m, const NodalField& f, int comps, int comp, int node, int axis,
             FdMask mask) {
  return d1_line(m, f, comps, comp, probe_line(m, node, axis, mask), axis);
}

double fd_d2(const PhaseMesh& m, const NodalField& f, int comps, int comp, int node, int axis_a,
             int axis_b, FdMask mask) {
  if (axis_a == axis_b) return d2_line(m, f, comps, comp, probe_line(m, node, axis_a, mask), axis_a);
  // mixed: outer d1 along axis_a of the inner d1 along axis_b
  Line la = probe_line(m, node, axis_a, mask);
  auto inner = [&](int off) -> double {
    int p = la.idx[size_t(off + 3)];
    if (p < 0) throw std::runtime_error("fd_d2: mixed stencil node unavailable");
    return fd_d1(m, f, comps, comp, p, axis_b, mask);
  };
  const double h = m.h[size_t(axis_a)];
  auto ok = [&](int off) { return la.idx[size_t(off + 3)] >= 0; };
  if (ok(1) && ok(-1)) return (inner(1) - inner(-1)) / (2 * h);
  if (ok(1) && ok(2)) return (-3 * inner(0) + 4 * inner(1) - inner(2)) / (2 * h);
  if (ok(-1) && ok(-2)) return (3 * inner(0) - 4 * inner(-1) + inner(-2)) / (2 * h);
  if (ok(1)) return (inner(1) - inner(0)) / h;
  if (ok(-1)) return (inner(0) - inner(-1)) / h;
  throw std::runtime_error("fd_d2: no usable mixed stencil at node");
}

Vec fd_grad_scalar(const PhaseMesh& m, const NodalField& f, int node, FdMask mask) {
  Vec g;
  for (int a = 0; a < m.dim; ++a) g[a] = fd_d1(m, f, 1, 0, node, a, mask);
  return g;
}

Mat fd_grad_vec(const PhaseMesh& m, const NodalField& f, int node, FdMask mask) {
  Mat g;
  for (int i = 0; i < m.dim; ++i)
    for (int a = 0; a < m.dim; ++a) g(i, a) = fd_d1(m, f, m.dim, i, node, a, mask);
  return g;
}

Vec fd_laplacian_vec(const PhaseMesh& m, const NodalField& f, int node, FdMask mask) {
  Vec lap;
  for (int i = 0; i < m.dim; ++i) {
    double s = 0;
    for (int a = 0; a < m.dim; ++a) s += fd_d2(m, f, m.dim, i, node, a, a, mask);
    lap[i] = s;
  }
  return lap;
}

}  // namespace fsi
