#include "fsi/compat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fsi {

// ---------------------------------------------------------------------------
// Forcing finite-difference defaults

Vec Forcing::f_t(double t, const Vec& x) const {
  const double s = 1e-6;
  Vec a = f(t + s, x), b = f(t - s, x);
  return (1.0 / (2 * s)) * (a - b);
}

Vec Forcing::f_tt(double t, const Vec& x) const {
  const double s = 1e-4;
  Vec a = f(t + s, x), mid = f(t, x), b = f(t - s, x);
  return (1.0 / (s * s)) * (a - 2.0 * mid + b);
}

Vec Forcing::f_ttt(double t, const Vec& x) const {
  const double s = 1e-3;
  Vec r = f(t + 2 * s, x) - 2.0 * f(t + s, x) + 2.0 * f(t - s, x) - f(t - 2 * s, x);
  return (1.0 / (2 * s * s * s)) * r;
}

Mat Forcing::grad_f(double t, const Vec& x) const {
  const double s = 1e-6;
  Mat g;
  for (int j = 0; j < dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += s;
    xm[j] -= s;
    Vec a = f(t, xp), b = f(t, xm);
    for (int i = 0; i < dim; ++i) g(i, j) = (a[i] - b[i]) / (2 * s);
  }
  return g;
}

Mat Forcing::grad_f_t(double t, const Vec& x) const {
  const double s = 1e-6;
  Mat g;
  for (int j = 0; j < dim; ++j) {
    Vec xp = x, xm = x;
    xp[j] += s;
    xm[j] -= s;
    Vec a = f_t(t, xp), b = f_t(t, xm);
    for (int i = 0; i < dim; ++i) g(i, j) = (a[i] - b[i]) / (2 * s);
  }
  return g;
}

Vec Forcing::hess_quad(double t, const Vec& x, const Vec& u) const {
  double un = norm2(u, dim);
  if (un == 0) return Vec{};
  // second directional derivative along u
  const double s = 1e-4 / std::max(1.0, un);
  Vec xp = x + s * u, xm = x - s * u;
  Vec r = f(t, xp) - 2.0 * f(t, x) + f(t, xm);
  return (1.0 / (s * s)) * r;
}

// ---------------------------------------------------------------------------
// Mixed elliptic core

std::vector<Vec> interface_node_normals(const PhaseMesh& m) {
  std::vector<Vec> nrm(size_t(m.n_nodes));
  for (const auto& fct : m.interface_facets) {
    Vec n;
    n[fct.axis] = double(fct.sign);
    for (int k = 0; k < fct.n_nodes; ++k) nrm[size_t(fct.nodes[size_t(k)])] = nrm[size_t(fct.nodes[size_t(k)])] + n;
  }
  for (auto& n : nrm) {
    double l = norm2(n, m.dim);
    if (l > 0) n = (1.0 / l) * n;
  }
  return nrm;
}

namespace {

// reference coordinates of a physical point within a cell, clamped
Vec ref_coords(const PhaseMesh& m, int cell, const Vec& x) {
  Vec lo = m.cell_lo(cell), xi;
  for (int a = 0; a < m.dim; ++a)
    xi[a] = std::clamp((x[a] - lo[a]) / m.h[size_t(a)], 0.0, 1.0);
  return xi;
}

Vec interp_vec(const PhaseMesh& m, const NodalField& f, int cell, const Vec& x) {
  return eval_vec(m, f, cell, point_shapes(m, ref_coords(m, cell, x)), 0);
}

// 2-point Gauss nodes on [0,1]
constexpr double kGaussLo = 0.5 - 0.28867513459481287;
constexpr double kGaussHi = 0.5 + 0.28867513459481287;

// quadrature points of an outer facet in the reference cube of its cell
void outer_facet_gauss(const PhaseMesh& m, const OuterFacet& fct, std::vector<Vec>& xi,
                       double& weight) {
  xi.clear();
  Vec base;
  base[0] = base[1] = base[2] = 0.5;
  base[fct.axis] = fct.sign > 0 ? 1.0 : 0.0;
  int t0 = -1, t1 = -1;
  for (int a = 0; a < m.dim; ++a)
    if (a != fct.axis) (t0 < 0 ? t0 : t1) = a;
  if (m.dim == 2) {
    for (double g : {kGaussLo, kGaussHi}) {
      Vec p = base;
      p[t0] = g;
      xi.push_back(p);
    }
    weight = fct.area / 2.0;
  } else {
    for (double g0 : {kGaussLo, kGaussHi})
      for (double g1 : {kGaussLo, kGaussHi}) {
        Vec p = base;
        p[t0] = g0;
        p[t1] = g1;
        xi.push_back(p);
      }
    weight = fct.area / 4.0;
  }
}

}  // namespace

NodalField solve_fluid_poisson(const PhaseMesh& m, const FluidPoissonProblem& p,
                               SolveReport* rep) {
  SparseSystem sys(m.n_nodes);
  const int nsh = m.shapes.nsh;

  for (int cell : m.fluid_cells) {
    auto ns = m.cell_nodes(cell);
    for (int q = 0; q < m.quad.npts; ++q) {
      double w = m.quad.w[size_t(q)];
      for (int a = 0; a < nsh; ++a) {
        const Vec& ga = m.shapes.grad[size_t(q * nsh + a)];
        for (int b = 0; b < nsh; ++b) {
          const Vec& gb = m.shapes.grad[size_t(q * nsh + b)];
          sys.add(ns[size_t(a)], ns[size_t(b)], w * dot(ga, gb, m.dim));
        }
        if (!p.volume_rhs.empty()) {
          double r = eval_scalar(m, p.volume_rhs, cell, m.shapes, q);
          sys.add_rhs(ns[size_t(a)], -w * r * m.shapes.val[size_t(q * nsh + a)]);
        }
      }
    }
  }

  if (p.neumann) {
    std::vector<Vec> xi;
    double w = 0;
    for (const auto& fct : m.outer_facets) {
      if (!m.is_fluid(fct.cell)) continue;
      outer_facet_gauss(m, fct, xi, w);
      auto ns = m.cell_nodes(fct.cell);
      for (const Vec& pt : xi) {
        ShapeTable t = make_shape_table(m, {pt});
        Vec lo = m.cell_lo(fct.cell);
        Vec x;
        for (int a = 0; a < m.dim; ++a) x[a] = lo[a] + pt[a] * m.h[size_t(a)];
        double flux = p.neumann(fct, x);
        for (int a = 0; a < nsh; ++a)
          sys.add_rhs(ns[size_t(a)], w * flux * t.val[size_t(a)]);
      }
    }
  }

  bool any_interface = false;
  for (int n = 0; n < m.n_nodes; ++n) {
    if (!m.node_in_fluid[size_t(n)]) {
      sys.pin(n, 0.0);
    } else if (m.node_on_interface[size_t(n)]) {
      sys.pin(n, p.dirichlet.empty() ? 0.0 : p.dirichlet[size_t(n)]);
      any_interface = true;
    }
  }
  if (!any_interface) {
    // pure Neumann problem: ground the constant mode at the first fluid node
    for (int n = 0; n < m.n_nodes; ++n)
      if (m.node_in_fluid[size_t(n)]) {
        sys.pin(n, 0.0);
        break;
      }
  }

  SpMat a;
  DVec b;
  sys.finalize(a, b);
  DVec x = DVec::Zero(m.n_nodes);
  SolveReport r = solve_spd(a, b, x, 1e-12, 10 * m.n_nodes);
  if (rep) *rep = r;
  if (!r.converged)
    throw std::runtime_error("solve_fluid_poisson: conjugate gradients did not converge");

  NodalField q(size_t(m.n_nodes), 0.0);
  for (int n = 0; n < m.n_nodes; ++n) q[size_t(n)] = x[n];
  return q;
}

// ---------------------------------------------------------------------------
// Hierarchy engine. Stages run in dependency order q0, w1, q1, w2, q2, w3;
// each may be preempted by seeding the corresponding field, so the partial
// builders skip the elliptic solves they were given answers for.

namespace {

double vmax(const Vec& a, int d) {
  double s = 0;
  for (int i = 0; i < d; ++i) s = std::max(s, std::fabs(a[i]));
  return s;
}

class Engine {
 public:
  Engine(const PhaseMesh& mesh, const NodalField& u0, const Forcing& f, double nu_,
         const ElasticityTensor& ct)
      : m(mesh), frc(f), nu(nu_), c(ct), d(mesh.dim) {
    if (u0.size() != size_t(m.n_nodes) * size_t(d))
      throw std::runtime_error("compat: u0 has wrong length");
    fmask.valid = &m.node_in_fluid;
    smask.valid = &m.node_in_solid;
    nrm = interface_node_normals(m);
    out.u0 = u0;
  }

  void seed_q0(const NodalField& q0) {
    out.q0 = q0;
    have_q0 = true;
  }
  void seed_w1(const NodalField& w1, const NodalField& w1s, double mismatch) {
    out.w1 = w1;
    out.w1_solid = w1s;
    out.mismatch_w1 = mismatch;
    have_w1 = true;
  }
  void seed_q1(const NodalField& q1) {
    out.q1 = q1;
    have_q1 = true;
  }
  void seed_w2(const NodalField& w2, const NodalField& w2s, double mismatch) {
    out.w2 = w2;
    out.w2_solid = w2s;
    out.mismatch_w2 = mismatch;
    have_w2 = true;
  }
  void seed_q2(const NodalField& q2) {
    out.q2 = q2;
    have_q2 = true;
  }
  void seed_w3(const NodalField& w3, const NodalField& w3s, double mismatch) {
    out.w3 = w3;
    out.w3_solid = w3s;
    out.mismatch_w3 = mismatch;
    have_w3 = true;
  }

  void ensure_q0() {
    if (have_q0) return;
    ensure_grads_u0();

    FluidPoissonProblem p;
    p.volume_rhs.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      Vec x = m.node_pos(n);
      Mat at = dadjugate(Mat::identity(d), gu0_f[size_t(n)], d);
      p.volume_rhs[size_t(n)] =
          trace(frc.grad_f(0.0, x), d) + trace_prod(at, gu0_f[size_t(n)], d);
    }
    p.dirichlet.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!m.node_on_interface[size_t(n)]) continue;
      Vec gn = matvec(gu0_f[size_t(n)], nrm[size_t(n)], d);
      p.dirichlet[size_t(n)] = nu * dot(gn, nrm[size_t(n)], d);
    }
    p.neumann = [this](const OuterFacet& fct, const Vec& x) {
      Vec n;
      n[fct.axis] = double(fct.sign);
      Vec flux = frc.f(0.0, x) + nu * interp_vec(m, lap_u0, fct.cell, x);
      return dot(flux, n, d);
    };
    out.q0 = solve_fluid_poisson(m, p, &out.q0_solve);
    have_q0 = true;
  }

  void ensure_w1() {
    if (have_w1) return;
    ensure_q0();
    ensure_grads_u0();
    out.w1 = zero_field(m, d);
    out.w1_solid = zero_field(m, d);
    for (int n = 0; n < m.n_nodes; ++n) {
      Vec x = m.node_pos(n);
      Vec fl{}, sl{};
      if (fmask.ok(n)) {
        Vec gq = fd_grad_scalar(m, out.q0, n, fmask);
        Vec lu = at_vec(lap_u0, n);
        fl = nu * lu - gq + frc.f(0.0, x);
      }
      if (smask.ok(n)) {
        sl = frc.f(0.0, x);
        for (int i = 0; i < d; ++i) out.w1_solid[size_t(n * d + i)] = sl[i];
      }
      Vec merged = fmask.ok(n) ? fl : sl;
      for (int i = 0; i < d; ++i) out.w1[size_t(n * d + i)] = merged[i];
      if (m.node_on_interface[size_t(n)]) out.mismatch_w1 = std::max(out.mismatch_w1, vmax(fl - sl, d));
    }
    have_w1 = true;
  }

  void ensure_q1() {
    if (have_q1) return;
    ensure_V();

    FluidPoissonProblem p;
    p.volume_rhs.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      double divv = 0;
      for (int i = 0; i < d; ++i) divv += fd_d1(m, V, d, i, n, i, fmask);
      const TaylorMat& a = A[size_t(n)];
      p.volume_rhs[size_t(n)] = divv + 2.0 * trace_prod(a.deriv(1), gw1_f[size_t(n)], d) +
                                trace_prod(a.deriv(2), gu0_f[size_t(n)], d);
    }
    p.dirichlet.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!m.node_on_interface[size_t(n)]) continue;
      const Vec& nn = nrm[size_t(n)];
      Mat inner = matmul(gu0_f[size_t(n)], AAT[size_t(n)].deriv(1), d);
      double visc = nu * (dot(matvec(gw1_f[size_t(n)], nn, d), nn, d) +
                          dot(matvec(inner, nn, d), nn, d));
      double pres = out.q0[size_t(n)] *
                    dot(matvec(transpose(A[size_t(n)].deriv(1), d), nn, d), nn, d);
      double solid = dot(matvec(Tsvk[size_t(n)].deriv(1), nn, d), nn, d);
      p.dirichlet[size_t(n)] = visc - pres - solid;
    }
    p.neumann = [this](const OuterFacet& fct, const Vec& x) {
      Vec n;
      n[fct.axis] = double(fct.sign);
      return dot(interp_vec(m, V, fct.cell, x), n, d);
    };
    out.q1 = solve_fluid_poisson(m, p, &out.q1_solve);
    have_q1 = true;
  }

  void ensure_w2() {
    if (have_w2) return;
    ensure_q1();
    out.w2 = zero_field(m, d);
    out.w2_solid = zero_field(m, d);
    NodalField tsvk1(size_t(m.n_nodes) * size_t(d) * size_t(d), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!smask.ok(n)) continue;
      Mat t1 = Tsvk[size_t(n)].deriv(1);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) tsvk1[size_t(n) * size_t(d * d) + size_t(i * d + j)] = t1(i, j);
    }
    NodalField div_tsvk1 = fd_divergence(m, tsvk1, smask);
    for (int n = 0; n < m.n_nodes; ++n) {
      Vec x = m.node_pos(n);
      Vec fl{}, sl{};
      if (fmask.ok(n)) {
        Vec gq = fd_grad_scalar(m, out.q1, n, fmask);
        fl = at_vec(V, n) - gq;
      }
      if (smask.ok(n)) {
        sl = frc.f_t(0.0, x) + at_vec(div_tsvk1, n);
        for (int i = 0; i < d; ++i) out.w2_solid[size_t(n * d + i)] = sl[i];
      }
      Vec merged = fmask.ok(n) ? fl : sl;
      for (int i = 0; i < d; ++i) out.w2[size_t(n * d + i)] = merged[i];
      if (m.node_on_interface[size_t(n)]) out.mismatch_w2 = std::max(out.mismatch_w2, vmax(fl - sl, d));
    }
    have_w2 = true;
  }

  void ensure_q2() {
    if (have_q2) return;
    ensure_V2();

    FluidPoissonProblem p;
    p.volume_rhs.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      double divv = 0;
      for (int i = 0; i < d; ++i) divv += fd_d1(m, V2, d, i, n, i, fmask);
      const TaylorMat& a = A[size_t(n)];
      p.volume_rhs[size_t(n)] = divv + 3.0 * trace_prod(a.deriv(1), gw2_f[size_t(n)], d) +
                                3.0 * trace_prod(a.deriv(2), gw1_f[size_t(n)], d) +
                                trace_prod(a.deriv(3), gu0_f[size_t(n)], d);
    }
    p.dirichlet.assign(size_t(m.n_nodes), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!m.node_on_interface[size_t(n)]) continue;
      const Vec& nn = nrm[size_t(n)];
      double visc = nu * dot(matvec(Tfl[size_t(n)].deriv(2), nn, d), nn, d);
      double solid = dot(matvec(Tsvk[size_t(n)].deriv(2), nn, d), nn, d);
      double pres = out.q0[size_t(n)] *
                        dot(matvec(transpose(A[size_t(n)].deriv(2), d), nn, d), nn, d) +
                    2.0 * out.q1[size_t(n)] *
                        dot(matvec(transpose(A[size_t(n)].deriv(1), d), nn, d), nn, d);
      p.dirichlet[size_t(n)] = visc - solid - pres;
    }
    p.neumann = [this](const OuterFacet& fct, const Vec& x) {
      Vec n;
      n[fct.axis] = double(fct.sign);
      return dot(interp_vec(m, V2, fct.cell, x), n, d);
    };
    out.q2 = solve_fluid_poisson(m, p, &out.q2_solve);
    have_q2 = true;
  }

  void ensure_w3() {
    if (have_w3) return;
    ensure_q2();
    ensure_V2();
    out.w3 = zero_field(m, d);
    out.w3_solid = zero_field(m, d);

    NodalField tsvk2(size_t(m.n_nodes) * size_t(d) * size_t(d), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!smask.ok(n)) continue;
      Mat t2 = Tsvk[size_t(n)].deriv(2);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) tsvk2[size_t(n) * size_t(d * d) + size_t(i * d + j)] = t2(i, j);
    }
    NodalField div_tsvk2 = fd_divergence(m, tsvk2, smask);

    for (int n = 0; n < m.n_nodes; ++n) {
      Vec x = m.node_pos(n);
      Vec fl{}, sl{};
      if (fmask.ok(n)) {
        // tt coefficient of a^j_i(t) q(t),_j with the pressure jet q0+t q1+(t^2/2) q2
        Vec gq0 = fd_grad_scalar(m, out.q0, n, fmask);
        Vec gq1 = fd_grad_scalar(m, out.q1, n, fmask);
        Vec gq2 = fd_grad_scalar(m, out.q2, n, fmask);
        const TaylorMat& a = A[size_t(n)];
        Vec pres_tt;
        for (int i = 0; i < d; ++i) {
          double c2 = 0;
          for (int j = 0; j < d; ++j)
            c2 += a.c[0](j, i) * 0.5 * gq2[j] + a.c[1](j, i) * gq1[j] + a.c[2](j, i) * gq0[j];
          pres_tt[i] = 2.0 * c2;
        }
        fl = nu * at_vec(div_Ttt, n) + at_vec(ftt, n) - pres_tt;
      }
      if (smask.ok(n)) {
        sl = frc.f_tt(0.0, x) + at_vec(div_tsvk2, n);
        for (int i = 0; i < d; ++i) out.w3_solid[size_t(n * d + i)] = sl[i];
      }
      Vec merged = fmask.ok(n) ? fl : sl;
      for (int i = 0; i < d; ++i) out.w3[size_t(n * d + i)] = merged[i];
      if (m.node_on_interface[size_t(n)]) out.mismatch_w3 = std::max(out.mismatch_w3, vmax(fl - sl, d));
    }
    have_w3 = true;
  }

  CompatReport report() {
    ensure_jets(true);
    CompatReport r;
    r.c1_accel_mismatch = out.mismatch_w1;
    r.c4_velocity2 = out.mismatch_w2;
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!m.node_on_outer[size_t(n)]) continue;
      r.c1_w1_outer = std::max(r.c1_w1_outer, norm2(at_vec(out.w1, n), d));
      r.c1_w2_outer = std::max(r.c1_w2_outer, norm2(at_vec(out.w2, n), d));
    }
    for (const auto& fct : m.interface_facets) {
      Vec nn;
      nn[fct.axis] = double(fct.sign);
      Vec strain{}, rate1{}, rate2{};
      for (int k = 0; k < fct.n_nodes; ++k) {
        int n = fct.nodes[size_t(k)];
        strain = strain + matvec(gu0_f[size_t(n)], nn, d);
        Vec fl1 = nu * matvec(Tfl[size_t(n)].deriv(1), nn, d) -
                  out.q0[size_t(n)] * matvec(transpose(A[size_t(n)].deriv(1), d), nn, d);
        Vec sl1 = matvec(Tsvk[size_t(n)].deriv(1), nn, d);
        rate1 = rate1 + (fl1 - sl1);
        Vec fl2 = nu * matvec(Tfl[size_t(n)].deriv(2), nn, d) -
                  out.q0[size_t(n)] * matvec(transpose(A[size_t(n)].deriv(2), d), nn, d) -
                  2.0 * out.q1[size_t(n)] * matvec(transpose(A[size_t(n)].deriv(1), d), nn, d);
        Vec sl2 = matvec(Tsvk[size_t(n)].deriv(2), nn, d);
        rate2 = rate2 + (fl2 - sl2);
      }
      double inv = 1.0 / fct.n_nodes;
      strain = inv * strain;
      rate1 = inv * rate1;
      rate2 = inv * rate2;
      auto tangential = [&](Vec v) { return v - dot(v, nn, d) * nn; };
      r.c1_tangential_strain = std::max(r.c1_tangential_strain, norm2(tangential(strain), d));
      r.c2_traction_rate = std::max(r.c2_traction_rate, norm2(tangential(rate1), d));
      r.c3_traction_rate2 = std::max(r.c3_traction_rate2, norm2(tangential(rate2), d));
    }
    return r;
  }

  CompatData out;

 private:
  Vec at_vec(const NodalField& f, int n) const {
    Vec v;
    for (int i = 0; i < d; ++i) v[i] = f[size_t(n * d + i)];
    return v;
  }

  void ensure_grads_u0() {
    if (done_grads_u0) return;
    gu0_f.assign(size_t(m.n_nodes), Mat{});
    gu0_s.assign(size_t(m.n_nodes), Mat{});
    lap_u0 = zero_field(m, d);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (fmask.ok(n)) {
        gu0_f[size_t(n)] = fd_grad_vec(m, out.u0, n, fmask);
        Vec l = fd_laplacian_vec(m, out.u0, n, fmask);
        for (int i = 0; i < d; ++i) lap_u0[size_t(n * d + i)] = l[i];
      }
      if (smask.ok(n)) gu0_s[size_t(n)] = fd_grad_vec(m, out.u0, n, smask);
    }
    done_grads_u0 = true;
  }

  // node jets along the canonical configuration expansion
  //   eta(t) = id + t u0 + (t^2/2) w1 + (t^3/6) w2
  // fluid side: A = adj(grad eta), AAT = A A^T, Tfl = Gw AAT with the
  // velocity gradient jet Gw = grad u0 + t grad w1 + (t^2/2) grad w2;
  // solid side: Tsvk = F contract(F^T F - I).
  void ensure_jets(bool with_w2) {
    if (jets_stage >= (with_w2 ? 2 : 1)) return;
    ensure_w1();
    if (with_w2) ensure_w2();
    ensure_grads_u0();

    gw1_f.assign(size_t(m.n_nodes), Mat{});
    gw1_s.assign(size_t(m.n_nodes), Mat{});
    gw2_f.assign(size_t(m.n_nodes), Mat{});
    gw2_s.assign(size_t(m.n_nodes), Mat{});
    A.assign(size_t(m.n_nodes), TaylorMat{});
    AAT.assign(size_t(m.n_nodes), TaylorMat{});
    Tfl.assign(size_t(m.n_nodes), TaylorMat{});
    Tsvk.assign(size_t(m.n_nodes), TaylorMat{});
    lap_w1 = zero_field(m, d);

    for (int n = 0; n < m.n_nodes; ++n) {
      if (fmask.ok(n)) {
        gw1_f[size_t(n)] = fd_grad_vec(m, out.w1, n, fmask);
        Vec l = fd_laplacian_vec(m, out.w1, n, fmask);
        for (int i = 0; i < d; ++i) lap_w1[size_t(n * d + i)] = l[i];
        if (with_w2) gw2_f[size_t(n)] = fd_grad_vec(m, out.w2, n, fmask);

        TaylorMat F;
        F.c[0] = Mat::identity(d);
        F.c[1] = gu0_f[size_t(n)];
        F.c[2] = 0.5 * gw1_f[size_t(n)];
        if (with_w2) F.c[3] = (1.0 / 6.0) * gw2_f[size_t(n)];
        A[size_t(n)] = tadjugate(F, d);
        AAT[size_t(n)] = tmul(A[size_t(n)], ttranspose(A[size_t(n)], d), d);
        TaylorMat gw;
        gw.c[0] = gu0_f[size_t(n)];
        gw.c[1] = gw1_f[size_t(n)];
        if (with_w2) gw.c[2] = 0.5 * gw2_f[size_t(n)];
        Tfl[size_t(n)] = tmul(gw, AAT[size_t(n)], d);
      }
      if (smask.ok(n)) {
        gw1_s[size_t(n)] = fd_grad_vec(m, out.w1_solid, n, smask);
        if (with_w2) gw2_s[size_t(n)] = fd_grad_vec(m, out.w2_solid, n, smask);

        TaylorMat F;
        F.c[0] = Mat::identity(d);
        F.c[1] = gu0_s[size_t(n)];
        F.c[2] = 0.5 * gw1_s[size_t(n)];
        if (with_w2) F.c[3] = (1.0 / 6.0) * gw2_s[size_t(n)];
        TaylorMat B = tmul(ttranspose(F, d), F, d);
        B.c[0] = B.c[0] - Mat::identity(d);
        TaylorMat PB;
        for (int k = 0; k < 4; ++k) PB.c[size_t(k)] = c.contract(B.c[size_t(k)]);
        Tsvk[size_t(n)] = tmul(F, PB, d);
      }
    }
    jets_stage = with_w2 ? 2 : 1;
  }

  // volume bracket of the first pressure problem, reused by w2:
  //   V = nu lap w1 + (f o eta)_t(0) + nu div_j((AAT)_t grad u0) - div_j(A_t^T q0)
  void ensure_V() {
    if (have_V) return;
    ensure_jets(false);
    const int dd = d * d;
    NodalField inner(size_t(m.n_nodes) * size_t(dd), 0.0);
    NodalField s1(size_t(m.n_nodes) * size_t(dd), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      Mat mi = matmul(gu0_f[size_t(n)], AAT[size_t(n)].deriv(1), d);
      Mat ms = out.q0[size_t(n)] * transpose(A[size_t(n)].deriv(1), d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          inner[size_t(n) * size_t(dd) + size_t(i * d + j)] = mi(i, j);
          s1[size_t(n) * size_t(dd) + size_t(i * d + j)] = ms(i, j);
        }
    }
    NodalField div_inner = fd_divergence(m, inner, fmask);
    NodalField div_s1 = fd_divergence(m, s1, fmask);
    V = zero_field(m, d);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      Vec x = m.node_pos(n);
      Vec ft0 = frc.f_t(0.0, x) + matvec(frc.grad_f(0.0, x), at_vec(out.u0, n), d);
      Vec v = nu * at_vec(lap_w1, n) + ft0 + nu * at_vec(div_inner, n) - at_vec(div_s1, n);
      for (int i = 0; i < d; ++i) V[size_t(n * d + i)] = v[i];
    }
    have_V = true;
  }

  // second-order bracket, reused by w3:
  //   V2 = (f o eta)_tt(0) + nu div_j [Gw AAT]_tt - div_j(A_tt^T q0 + 2 A_t^T q1)
  void ensure_V2() {
    if (have_V2) return;
    ensure_w2();
    ensure_jets(true);
    const int dd = d * d;
    NodalField ttt(size_t(m.n_nodes) * size_t(dd), 0.0);
    NodalField s2(size_t(m.n_nodes) * size_t(dd), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      Mat mt = Tfl[size_t(n)].deriv(2);
      Mat ms = out.q0[size_t(n)] * transpose(A[size_t(n)].deriv(2), d) +
               2.0 * out.q1[size_t(n)] * transpose(A[size_t(n)].deriv(1), d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          ttt[size_t(n) * size_t(dd) + size_t(i * d + j)] = mt(i, j);
          s2[size_t(n) * size_t(dd) + size_t(i * d + j)] = ms(i, j);
        }
    }
    div_Ttt = fd_divergence(m, ttt, fmask);
    NodalField div_s2 = fd_divergence(m, s2, fmask);
    ftt = zero_field(m, d);
    V2 = zero_field(m, d);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!fmask.ok(n)) continue;
      Vec x = m.node_pos(n);
      Vec u = at_vec(out.u0, n);
      Vec comp = frc.f_tt(0.0, x) + 2.0 * matvec(frc.grad_f_t(0.0, x), u, d) +
                 frc.hess_quad(0.0, x, u) + matvec(frc.grad_f(0.0, x), at_vec(out.w1, n), d);
      Vec v = comp + nu * at_vec(div_Ttt, n) - at_vec(div_s2, n);
      for (int i = 0; i < d; ++i) {
        ftt[size_t(n * d + i)] = comp[i];
        V2[size_t(n * d + i)] = v[i];
      }
    }
    have_V2 = true;
  }

  const PhaseMesh& m;
  const Forcing& frc;
  double nu;
  ElasticityTensor c;
  int d;
  FdMask fmask, smask;
  std::vector<Vec> nrm;

  bool have_q0 = false, have_w1 = false, have_q1 = false;
  bool have_w2 = false, have_q2 = false, have_w3 = false;
  bool done_grads_u0 = false, have_V = false, have_V2 = false;
  int jets_stage = 0;

  std::vector<Mat> gu0_f, gw1_f, gw2_f;
  std::vector<Mat> gu0_s, gw1_s, gw2_s;
  std::vector<TaylorMat> A, AAT, Tfl, Tsvk;
  NodalField lap_u0, lap_w1;
  NodalField V, V2, ftt, div_Ttt;
};

}  // namespace

// ---------------------------------------------------------------------------
// public entry points

CompatData build_compat_data(const PhaseMesh& m, const NodalField& u0, const Forcing& f,
                             double nu, const ElasticityTensor& c) {
  Engine e(m, u0, f, nu, c);
  e.ensure_w3();
  return e.out;
}

CompatReport check_compatibility(const PhaseMesh& m, const CompatData& d, const Forcing& f,
                                 double nu, const ElasticityTensor& c) {
  Engine e(m, d.u0, f, nu, c);
  e.seed_q0(d.q0);
  e.seed_w1(d.w1, d.w1_solid, d.mismatch_w1);
  e.seed_q1(d.q1);
  e.seed_w2(d.w2, d.w2_solid, d.mismatch_w2);
  e.seed_q2(d.q2);
  e.seed_w3(d.w3, d.w3_solid, d.mismatch_w3);
  return e.report();
}

NodalField build_q0(const PhaseMesh& m, const NodalField& u0, const Forcing& f, double nu,
                    SolveReport* rep) {
  ElasticityTensor dummy(0.0, 1.0, m.dim);
  Engine e(m, u0, f, nu, dummy);
  e.ensure_q0();
  if (rep) *rep = e.out.q0_solve;
  return e.out.q0;
}

W1Result build_w1(const PhaseMesh& m, const NodalField& u0, const NodalField& q0,
                  const Forcing& f, double nu) {
  ElasticityTensor dummy(0.0, 1.0, m.dim);
  Engine e(m, u0, f, nu, dummy);
  e.seed_q0(q0);
  e.ensure_w1();
  return {e.out.w1, e.out.w1_solid, e.out.mismatch_w1};
}

PressureHierarchy build_pressure_hierarchy(const PhaseMesh& m, const NodalField& u0,
                                           const NodalField& w1, const NodalField& w1_solid,
                                           const NodalField& q0, const Forcing& f, double nu,
                                           const ElasticityTensor& c) {
  Engine e(m, u0, f, nu, c);
  e.seed_q0(q0);
  e.seed_w1(w1, w1_solid, 0.0);
  e.ensure_q2();
  return {e.out.q1, e.out.q2, e.out.q1_solve, e.out.q2_solve};
}

VelocityHierarchy build_velocity_hierarchy(const PhaseMesh& m, const NodalField& u0,
                                           const NodalField& w1, const NodalField& w1_solid,
                                           const NodalField& q0, const NodalField& q1,
                                           const Forcing& f, double nu,
                                           const ElasticityTensor& c) {
  Engine e(m, u0, f, nu, c);
  e.seed_q0(q0);
  e.seed_w1(w1, w1_solid, 0.0);
  e.seed_q1(q1);
  e.ensure_w3();
  return {e.out.w2, e.out.w3, e.out.w2_solid, e.out.w3_solid, e.out.mismatch_w2,
          e.out.mismatch_w3};
}

// ---------------------------------------------------------------------------
// solid forcing pair

namespace {

NodalField combine3(const NodalField& a, const NodalField& b, const NodalField& cc, double t) {
  NodalField r(a.size());
  double s2 = 0.5 * t * t;
  for (size_t k = 0; k < a.size(); ++k) r[k] = a[k] + t * b[k] + s2 * cc[k];
  return r;
}

}  // namespace

NodalField HgForcing::pairing_at(double t) const { return combine3(pair0, pair1, pair2, t); }
NodalField HgForcing::strong_at(double t) const { return combine3(strong0, strong1, strong2, t); }
std::vector<Vec> HgForcing::g_at(double t) const {
  std::vector<Vec> r(g0.size());
  double s2 = 0.5 * t * t;
  for (size_t k = 0; k < r.size(); ++k) r[k] = g0[k] + t * g1[k] + s2 * g2[k];
  return r;
}

HgForcing forcing_hg(const PhaseMesh& m, const ElasticityTensor& c, const NodalField& u0,
                     const NodalField& w1_solid, const NodalField& w2_solid) {
  const int d = m.dim;
  FdMask smask;
  smask.valid = &m.node_in_solid;
  HgForcing out;

  const NodalField* fields[3] = {&u0, &w1_solid, &w2_solid};
  NodalField* pairs[3] = {&out.pair0, &out.pair1, &out.pair2};
  NodalField* strongs[3] = {&out.strong0, &out.strong1, &out.strong2};
  std::vector<Vec>* gs[3] = {&out.g0, &out.g1, &out.g2};

  const int nsh = m.shapes.nsh;
  for (int k = 0; k < 3; ++k) {
    const NodalField& x = *fields[k];

    // weak pairing int_s stress_raw(grad X) : grad phi
    NodalField pair = zero_field(m, d);
    for (int cell : m.solid_cells) {
      auto ns = m.cell_nodes(cell);
      for (int q = 0; q < m.quad.npts; ++q) {
        double w = m.quad.w[size_t(q)];
        Mat sig = c.stress_raw(grad_vec(m, x, cell, m.shapes, q));
        for (int a = 0; a < nsh; ++a) {
          const Vec& dn = m.shapes.grad[size_t(q * nsh + a)];
          for (int i = 0; i < d; ++i) {
            double s = 0;
            for (int j = 0; j < d; ++j) s += sig(i, j) * dn[j];
            pair[size_t(ns[size_t(a)] * d + i)] += w * s;
          }
        }
      }
    }
    *pairs[k] = pair;

    // strong field -div stress_raw(grad X) at solid nodes
    const int dd = d * d;
    NodalField sig_nodal(size_t(m.n_nodes) * size_t(dd), 0.0);
    for (int n = 0; n < m.n_nodes; ++n) {
      if (!smask.ok(n)) continue;
      Mat sig = c.stress_raw(fd_grad_vec(m, x, n, smask));
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) sig_nodal[size_t(n) * size_t(dd) + size_t(i * d + j)] = sig(i, j);
    }
    NodalField divsig = fd_divergence(m, sig_nodal, smask);
    NodalField strong = zero_field(m, d);
    for (size_t idx = 0; idx < strong.size(); ++idx) strong[idx] = -divsig[idx];
    *strongs[k] = strong;

    // interface traction stress_raw(grad X) N at facet centers, solid side
    std::vector<Vec> g(m.interface_facets.size());
    for (size_t fi = 0; fi < m.interface_facets.size(); ++fi) {
      const auto& fct = m.interface_facets[fi];
      Vec xi;
      xi[0] = xi[1] = xi[2] = 0.5;
      Vec lo = m.cell_lo(fct.solid_cell);
      xi[fct.axis] = (fct.center[fct.axis] - lo[fct.axis]) / m.h[size_t(fct.axis)];
      ShapeTable t = point_shapes(m, xi);
      Mat sig = c.stress_raw(grad_vec(m, x, fct.solid_cell, t, 0));
      Vec n;
      n[fct.axis] = double(fct.sign);
      g[fi] = matvec(sig, n, d);
    }
    *gs[k] = g;
  }
  return out;
}

}  // namespace fsi
