#include "fsi/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace fsi {

TensorField gradient(const PhaseMesh& m, const NodalField& eta, Region r, EvalAt where) {
  if (eta.size() != size_t(m.n_nodes) * size_t(m.dim))
    throw std::runtime_error("gradient: field size does not match mesh (component count?)");
  const ShapeTable& t = (where == EvalAt::QuadPoints) ? m.shapes : m.center;
  const int npts = (where == EvalAt::QuadPoints) ? m.quad.npts : 1;
  TensorField out;
  out.dim = m.dim;
  out.pts_per_cell = npts;
  out.cells = region_cells(m, r);
  out.val.resize(out.cells.size() * size_t(npts));
  for (size_t s = 0; s < out.cells.size(); ++s)
    for (int q = 0; q < npts; ++q) out.at(int(s), q) = grad_vec(m, eta, out.cells[s], t, q);
  return out;
}

Mat cofactor(const Mat& f, int d) { return adjugate(f, d); }

TensorField cofactor_field(const TensorField& grad) {
  TensorField out = grad;
  for (auto& v : out.val) v = adjugate(v, grad.dim);
  return out;
}

std::vector<double> jacobian_det(const TensorField& grad) {
  std::vector<double> out(grad.val.size());
  for (size_t i = 0; i < grad.val.size(); ++i) out[i] = det(grad.val[i], grad.dim);
  return out;
}

double min_jacobian_det(const PhaseMesh& m, const NodalField& eta, Region r) {
  // evaluated through the displacement: the discrete gradient of the identity
  // map carries summation rounding, and the determinant must read exactly one
  // at rest
  NodalField u = identity_configuration(m);
  for (size_t k = 0; k < u.size(); ++k) u[k] = eta[k] - u[k];
  TensorField g = gradient(m, u, r, EvalAt::QuadPoints);
  double mn = std::numeric_limits<double>::infinity();
  for (auto& f : g.val) {
    for (int i = 0; i < m.dim; ++i) f(i, i) += 1.0;
    mn = std::min(mn, det(f, m.dim));
  }
  return mn;
}

Mat strain_offset(const Mat& f, int d) {
  Mat b;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double s = 0;
      for (int p = 0; p < d; ++p) s += f(p, i) * f(p, j);
      if (i == j) s -= 1.0;
      b(i, j) = s;
      b(j, i) = s;  // mirrored, symmetric by construction
    }
  return b;
}

TensorField strain_offset(const TensorField& grad) {
  TensorField out = grad;
  for (auto& v : out.val) v = strain_offset(v, grad.dim);
  return out;
}

double piola_residual(const PhaseMesh& m, const NodalField& eta, Region r) {
  TensorField a = cofactor_field(gradient(m, eta, r, EvalAt::CellCenters));
  // map cell id -> slot for neighbor lookup
  std::vector<int> slot(size_t(m.n_cells), -1);
  for (size_t s = 0; s < a.cells.size(); ++s) slot[size_t(a.cells[s])] = int(s);
  double worst = 0;
  for (size_t s = 0; s < a.cells.size(); ++s) {
    int c = a.cells[s];
    int ix, iy, iz;
    m.cell_coords(c, ix, iy, iz);
    int idx[3] = {ix, iy, iz};
    bool interior = true;
    int nb[3][2];
    for (int ax = 0; ax < m.dim && interior; ++ax) {
      for (int pm = 0; pm < 2; ++pm) {
        int j[3] = {idx[0], idx[1], idx[2]};
        j[ax] += pm ? 1 : -1;
        if (j[ax] < 0 || j[ax] >= m.ncell[size_t(ax)]) {
          interior = false;
          break;
        }
        int cn = m.cell_index(j[0], j[1], j[2]);
        if (slot[size_t(cn)] < 0) {
          interior = false;
          break;
        }
        nb[ax][pm] = slot[size_t(cn)];
      }
    }
    if (!interior) continue;
    for (int i = 0; i < m.dim; ++i) {
      double div = 0;
      for (int ax = 0; ax < m.dim; ++ax) {
        // a^j_i with j = ax: row ax, column i of the matrix a
        double up = a.at(nb[ax][1], 0)(ax, i);
        double dn = a.at(nb[ax][0], 0)(ax, i);
        div += (up - dn) / (2.0 * m.h[size_t(ax)]);
      }
      worst = std::max(worst, std::fabs(div));
    }
  }
  return worst;
}

TaylorMat cofactor_jet(const Mat& g0, const Mat& g1, const Mat& g2, const Mat& g3, int d) {
  TaylorMat f;
  f.c[0] = g0;
  f.c[1] = g1;
  f.c[2] = 0.5 * g2;
  f.c[3] = (1.0 / 6.0) * g3;
  return tadjugate(f, d);
}

Mat cofactor_jet_fd(const Mat& g0, const Mat& g1, const Mat& g2, const Mat& g3, int d, int n,
                    double step) {
  if (n < 0 || n > 3) throw std::runtime_error("cofactor_jet_fd: derivative order must be 0..3");
  const int npts = 7;
  double grid[npts], w[npts * 4];
  for (int k = 0; k < npts; ++k) grid[k] = (k - 3) * step;
  fornberg_weights(0.0, grid, npts, n, w);
  Mat out;
  for (int k = 0; k < npts; ++k) {
    double t = grid[k];
    Mat f = g0 + t * g1 + (0.5 * t * t) * g2 + (t * t * t / 6.0) * g3;
    out = out + w[n * npts + k] * adjugate(f, d);
  }
  return out;
}

}  // namespace fsi
