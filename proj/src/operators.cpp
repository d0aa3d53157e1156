#include "fsi/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace fsi {

ElasticityTensor::ElasticityTensor(double l, double m, int d) : lambda(l), mu(m), dim(d) {
  if (!(m > 0) || l < 0) throw std::runtime_error("ElasticityTensor: need mu > 0 and lambda >= 0");
  if (d != 2 && d != 3) throw std::runtime_error("ElasticityTensor: dim must be 2 or 3");
}

double ElasticityTensor::c_eval(int i, int j, int k, int l) const {
  auto kd = [](int a, int b) { return a == b ? 1.0 : 0.0; };
  return lambda * kd(i, j) * kd(k, l) + mu * (kd(i, k) * kd(j, l) + kd(i, l) * kd(j, k));
}

Mat ElasticityTensor::contract(const Mat& b) const {
  Mat r = (2.0 * mu) * b;
  double t = lambda * trace(b, dim);
  for (int i = 0; i < dim; ++i) r(i, i) += t;
  return r;
}

Mat ElasticityTensor::stress_sym(const Mat& g) const {
  Mat r;
  double t = 2.0 * lambda * trace(g, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r(i, j) = 2.0 * mu * (g(i, j) + g(j, i)) + (i == j ? t : 0.0);
  return r;
}

Mat ElasticityTensor::stress_raw(const Mat& g) const {
  Mat r;
  double t = lambda * trace(g, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) r(i, j) = mu * (g(i, j) + g(j, i)) + (i == j ? t : 0.0);
  return r;
}

void OperatorOutput::validate() const {
  for (double v : load)
    if (!std::isfinite(v)) throw std::runtime_error("OperatorOutput: non-finite entry");
}

NodalField displacement_field(const PhaseMesh& m, const NodalField& eta) {
  NodalField u = identity_configuration(m);
  for (size_t k = 0; k < u.size(); ++k) u[k] = eta[k] - u[k];
  return u;
}

Mat strain_from_displacement(const Mat& e, int d) {
  Mat b = matmul(transpose(e, d), e, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) b(i, j) += e(i, j) + e(j, i);
  return b;
}

OperatorOutput linear_L(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u) {
  OperatorOutput out{zero_field(m, m.dim)};
  const int nsh = m.shapes.nsh;
  for (int cell : m.solid_cells) {
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      Mat sig = c.stress_sym(grad_vec(m, u, cell, m.shapes, q));
      for (int a = 0; a < nsh; ++a) {
        const Vec& dn = m.shapes.grad[size_t(q * nsh + a)];
        int p = ns[size_t(a)];
        for (int i = 0; i < m.dim; ++i) {
          double s = 0;
          for (int j = 0; j < m.dim; ++j) s += sig(i, j) * dn[j];
          out.load[size_t(p * m.dim + i)] -= w * s;
        }
      }
    }
  }
  return out;
}

NodalField stress_field_sym(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u,
                            FdMask mask) {
  NodalField t(size_t(m.n_nodes) * size_t(m.dim) * size_t(m.dim), 0.0);
  for (int p = 0; p < m.n_nodes; ++p) {
    if (mask.valid && !mask.ok(p)) continue;
    Mat sig = c.stress_sym(fd_grad_vec(m, u, p, mask));
    for (int i = 0; i < m.dim; ++i)
      for (int j = 0; j < m.dim; ++j)
        t[size_t(p) * size_t(m.dim * m.dim) + size_t(i * m.dim + j)] = sig(i, j);
  }
  return t;
}

NodalField fd_divergence(const PhaseMesh& m, const NodalField& t, FdMask mask) {
  const int dd = m.dim * m.dim;
  NodalField out = zero_field(m, m.dim);
  for (int p = 0; p < m.n_nodes; ++p) {
    if (mask.valid && !mask.ok(p)) continue;
    for (int i = 0; i < m.dim; ++i) {
      double s = 0;
      for (int l = 0; l < m.dim; ++l) s += fd_d1(m, t, dd, i * m.dim + l, p, l, mask);
      out[size_t(p * m.dim + i)] = s;
    }
  }
  return out;
}

NodalField linear_L_strong(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u,
                           FdMask mask) {
  return fd_divergence(m, stress_field_sym(m, c, u, mask), mask);
}

OperatorOutput nonlinear_N(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& eta) {
  OperatorOutput out{zero_field(m, m.dim)};
  NodalField disp = displacement_field(m, eta);
  const int nsh = m.shapes.nsh;
  for (int cell : m.solid_cells) {
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      Mat e = grad_vec(m, disp, cell, m.shapes, q);
      Mat f = Mat::identity(m.dim) + e;
      Mat pk = matmul(f, c.contract(strain_from_displacement(e, m.dim)), m.dim);  // F (lam tr B I + 2 mu B)
      for (int a = 0; a < nsh; ++a) {
        const Vec& dn = m.shapes.grad[size_t(q * nsh + a)];
        int p = ns[size_t(a)];
        for (int i = 0; i < m.dim; ++i) {
          double s = 0;
          for (int l = 0; l < m.dim; ++l) s += pk(i, l) * dn[l];
          out.load[size_t(p * m.dim + i)] += w * s;
        }
      }
    }
  }
  return out;
}

std::vector<Vec> traction_G(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& eta) {
  std::vector<Vec> g(m.interface_facets.size());
  NodalField disp = displacement_field(m, eta);
  for (size_t k = 0; k < m.interface_facets.size(); ++k) {
    const auto& fct = m.interface_facets[k];
    // solid-side gradient at the facet center: evaluate the solid cell's
    // shapes at the face midpoint in reference coordinates
    Vec xi;
    xi[0] = xi[1] = xi[2] = 0.5;
    Vec lo = m.cell_lo(fct.solid_cell);
    xi[fct.axis] = (fct.center[fct.axis] - lo[fct.axis]) / m.h[size_t(fct.axis)];
    ShapeTable t = point_shapes(m, xi);
    Mat e = grad_vec(m, disp, fct.solid_cell, t, 0);
    Mat f = Mat::identity(m.dim) + e;
    Mat pk = matmul(f, c.contract(strain_from_displacement(e, m.dim)), m.dim);
    Vec n;
    n[fct.axis] = double(fct.sign);
    g[k] = matvec(pk, n, m.dim);
  }
  return g;
}

OperatorOutput fluid_viscous(const PhaseMesh& m, const TensorField& a, const NodalField& v,
                             double nu) {
  if (a.pts_per_cell != m.quad.npts)
    throw std::runtime_error("fluid_viscous: cofactor field must be at quadrature points");
  OperatorOutput out{zero_field(m, m.dim)};
  const int nsh = m.shapes.nsh;
  for (size_t s = 0; s < a.cells.size(); ++s) {
    int cell = a.cells[s];
    if (!m.is_fluid(cell)) throw std::runtime_error("fluid_viscous: non-fluid cell in field");
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = nu * m.quad.w[size_t(q)];
      const Mat& A = a.at(int(s), q);
      Mat aat;  // (A A^T)^{jk} = a^j_l a^k_l
      for (int j = 0; j < m.dim; ++j)
        for (int k = 0; k < m.dim; ++k) {
          double t = 0;
          for (int l = 0; l < m.dim; ++l) t += A(j, l) * A(k, l);
          aat(j, k) = t;
        }
      Mat gv = grad_vec(m, v, cell, m.shapes, q);
      for (int an = 0; an < nsh; ++an) {
        const Vec& dn = m.shapes.grad[size_t(q * nsh + an)];
        int p = ns[size_t(an)];
        for (int i = 0; i < m.dim; ++i) {
          double t = 0;
          for (int j = 0; j < m.dim; ++j)
            for (int k = 0; k < m.dim; ++k) t += dn[j] * aat(j, k) * gv(i, k);
          out.load[size_t(p * m.dim + i)] += w * t;
        }
      }
    }
  }
  return out;
}

std::vector<double> lagrangian_div(const PhaseMesh& m, const TensorField& a, const NodalField& v) {
  const ShapeTable& t = (a.pts_per_cell == m.quad.npts) ? m.shapes : m.center;
  std::vector<double> out(a.val.size());
  for (size_t s = 0; s < a.cells.size(); ++s)
    for (int q = 0; q < a.pts_per_cell; ++q)
      out[size_t(int(s) * a.pts_per_cell + q)] =
          trace_prod(a.at(int(s), q), grad_vec(m, v, a.cells[s], t, q), m.dim);
  return out;
}

OperatorOutput pressure_term(const PhaseMesh& m, const TensorField& a,
                             const std::vector<double>& q) {
  if (q.size() != a.val.size()) throw std::runtime_error("pressure_term: q/a layout mismatch");
  if (a.pts_per_cell != m.quad.npts)
    throw std::runtime_error("pressure_term: cofactor field must be at quadrature points");
  OperatorOutput out{zero_field(m, m.dim)};
  const int nsh = m.shapes.nsh;
  for (size_t s = 0; s < a.cells.size(); ++s) {
    int cell = a.cells[s];
    auto ns = m.cell_nodes(cell);
    for (int qq = 0; qq < m.quad.npts; ++qq) {
      double wq = m.quad.w[size_t(qq)] * q[size_t(int(s) * a.pts_per_cell + qq)];
      const Mat& A = a.at(int(s), qq);
      for (int an = 0; an < nsh; ++an) {
        const Vec& dn = m.shapes.grad[size_t(qq * nsh + an)];
        int p = ns[size_t(an)];
        for (int i = 0; i < m.dim; ++i) {
          double t = 0;
          for (int k = 0; k < m.dim; ++k) t += A(k, i) * dn[k];
          out.load[size_t(p * m.dim + i)] += wq * t;
        }
      }
    }
  }
  return out;
}

}  // namespace fsi
